use thiserror::Error;

/// Errors raised by the modeling library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration field failed validation. `field` is a dotted path.
    #[error("{field}: {message}")]
    InvalidField { field: String, message: String },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("cannot parse quantity `{input}`: {reason}")]
    Quantity { input: String, reason: String },

    #[error("no remote memory configured")]
    NoRemoteMemory,

    #[error("radix too small: k={0} supports no endpoints")]
    RadixTooSmall(u64),

    /// A fat-tree switch tier uses more ports than the switch radix provides.
    #[error("{tier} switches need {needed} ports but the radix is {radix}")]
    PortOvercommit {
        tier: &'static str,
        needed: u64,
        radix: u64,
    },

    #[error("empty sample: all counters are zero")]
    EmptySample,

    #[error("{0}")]
    Model(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("json error: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

/// Deserializes JSON, reporting the dotted path of the offending field.
pub(crate) fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path.is_empty() || path == "." {
            Error::Json(inner.to_string())
        } else {
            Error::InvalidField {
                field: path,
                message: inner.to_string(),
            }
        }
    })
}

pub type Result<T> = std::result::Result<T, Error>;
