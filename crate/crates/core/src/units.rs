//! Unit handling.
//!
//! Everything is stored internally as bytes, bytes/second and seconds (`f64`).
//! Configuration files may spell quantities either as plain numbers in those
//! base units or as strings with a suffix:
//!
//! * sizes: `B`, `KB`, `MB`, `GB`, `TB`, `PB` (decimal) and `KiB` .. `PiB` (binary)
//! * bandwidths: any size suffix followed by `/s`, e.g. `"100 GB/s"`
//! * durations: `s`, `ms`, `us` (or `µs`), `ns`

use serde::{Deserialize, Deserializer};

use crate::error::{Error, Result};

pub const KB: f64 = 1e3;
pub const MB: f64 = 1e6;
pub const GB: f64 = 1e9;
pub const TB: f64 = 1e12;
pub const PB: f64 = 1e15;
pub const KIB: f64 = 1024.0;
pub const MIB: f64 = 1024.0 * 1024.0;
pub const US: f64 = 1e-6;

fn size_multiplier(suffix: &str) -> Option<f64> {
    let m = match suffix {
        "" | "B" => 1.0,
        "KB" | "kB" => KB,
        "MB" => MB,
        "GB" => GB,
        "TB" => TB,
        "PB" => PB,
        "KiB" => KIB,
        "MiB" => MIB,
        "GiB" => MIB * KIB,
        "TiB" => MIB * MIB,
        "PiB" => MIB * MIB * KIB,
        _ => return None,
    };
    Some(m)
}

fn time_multiplier(suffix: &str) -> Option<f64> {
    let m = match suffix {
        "" | "s" => 1.0,
        "ms" => 1e-3,
        "us" | "µs" | "μs" => 1e-6,
        "ns" => 1e-9,
        _ => return None,
    };
    Some(m)
}

/// Splits `"4.5 TB"` into `(4.5, "TB")` using the longest numeric prefix.
fn split_number(input: &str) -> Result<(f64, &str)> {
    let s = input.trim();
    s.char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(s.len()))
        .rev()
        .find_map(|end| s[..end].parse::<f64>().ok().map(|v| (v, s[end..].trim())))
        .ok_or_else(|| Error::Quantity {
            input: input.to_string(),
            reason: "missing numeric value".into(),
        })
}

fn bad_suffix(input: &str, what: &str) -> Error {
    Error::Quantity {
        input: input.to_string(),
        reason: format!("unrecognized {what} suffix"),
    }
}

pub fn parse_bytes(input: &str) -> Result<f64> {
    let (v, suffix) = split_number(input)?;
    let m = size_multiplier(suffix).ok_or_else(|| bad_suffix(input, "size"))?;
    Ok(v * m)
}

pub fn parse_bandwidth(input: &str) -> Result<f64> {
    let (v, suffix) = split_number(input)?;
    let size = suffix
        .strip_suffix("/s")
        .or_else(|| suffix.strip_suffix("ps"))
        .unwrap_or(suffix)
        .trim();
    let m = size_multiplier(size).ok_or_else(|| bad_suffix(input, "bandwidth"))?;
    Ok(v * m)
}

pub fn parse_seconds(input: &str) -> Result<f64> {
    let (v, suffix) = split_number(input)?;
    let m = time_multiplier(suffix).ok_or_else(|| bad_suffix(input, "time"))?;
    Ok(v * m)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Num(f64),
    Str(String),
}

macro_rules! quantity_deserializer {
    ($name:ident, $opt:ident, $parse:ident) => {
        pub fn $name<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
            match NumOrStr::deserialize(d)? {
                NumOrStr::Num(n) => Ok(n),
                NumOrStr::Str(s) => $parse(&s).map_err(serde::de::Error::custom),
            }
        }

        pub fn $opt<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Option<f64>, D::Error> {
            match Option::<NumOrStr>::deserialize(d)? {
                None => Ok(None),
                Some(NumOrStr::Num(n)) => Ok(Some(n)),
                Some(NumOrStr::Str(s)) => $parse(&s).map(Some).map_err(serde::de::Error::custom),
            }
        }
    };
}

/// Serde helpers for quantity fields.
pub mod de {
    use super::*;

    quantity_deserializer!(bytes, opt_bytes, parse_bytes);
    quantity_deserializer!(bandwidth, opt_bandwidth, parse_bandwidth);
    quantity_deserializer!(seconds, opt_seconds, parse_seconds);
}

/// Decimal gigabytes (per second) for display.
pub fn to_gb(x: f64) -> f64 {
    x / GB
}

pub fn to_tb(x: f64) -> f64 {
    x / TB
}

/// Human-readable size with a decimal suffix, e.g. `4 TB`.
pub fn fmt_bytes(x: f64) -> String {
    let (div, unit) = if x >= PB {
        (PB, "PB")
    } else if x >= TB {
        (TB, "TB")
    } else if x >= GB {
        (GB, "GB")
    } else if x >= MB {
        (MB, "MB")
    } else if x >= KB {
        (KB, "KB")
    } else {
        (1.0, "B")
    };
    format!("{} {unit}", trim_float(x / div, 3))
}

/// Rounds to `digits` decimals and strips trailing zeros.
pub fn trim_float(x: f64, digits: usize) -> String {
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
