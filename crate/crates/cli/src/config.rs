use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use dismem_core::techdb::SystemConfig;

pub const CONFIG_DIR_ENV: &str = "DISMEM_CONFIG_DIR";

/// A resolved machine plus per-command option defaults from the same file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub system: SystemConfig,
    pub options: Map<String, Value>,
    /// Where the config came from, for diagnostics.
    pub source: String,
}

impl Loaded {
    /// Option defaults for one subcommand (`options.<command>` in the file).
    pub fn command_options(&self, command: &str) -> Option<&Value> {
        self.options.get(command)
    }
}

fn candidate(dir: &Path, name: &str) -> Option<PathBuf> {
    [dir.join(name), dir.join(format!("{name}.json"))]
        .into_iter()
        .find(|p| p.is_file())
}

/// Resolves `--machine`: `default`, a file path, or a name looked up in the
/// config directory.
pub fn locate(machine: &str, config_dir: Option<&Path>) -> Result<Option<PathBuf>> {
    if machine != "default" {
        let direct = PathBuf::from(machine);
        if direct.is_file() {
            return Ok(Some(direct));
        }
    }
    if let Some(found) = config_dir.and_then(|d| candidate(d, machine)) {
        return Ok(Some(found));
    }
    if machine == "default" {
        Ok(None)
    } else {
        bail!("machine config `{machine}` not found (not a file, and not in the config directory)")
    }
}

pub fn load(machine: &str, config_dir: Option<&Path>) -> Result<Loaded> {
    match locate(machine, config_dir)? {
        None => parse(SystemConfig::default_json(), "builtin default"),
        Some(path) => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            parse(&text, &path.display().to_string())
        }
    }
}

pub fn parse(text: &str, source: &str) -> Result<Loaded> {
    let mut value: Value = serde_json::from_str(text).with_context(|| format!("{source}: invalid JSON"))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| anyhow!("{source}: top level must be an object"))?;
    let options = match obj.remove("options") {
        None => Map::new(),
        Some(Value::Object(m)) => m,
        Some(_) => bail!("{source}: options: must be an object keyed by command name"),
    };
    let system = SystemConfig::from_json(&value.to_string()).map_err(|e| anyhow!("{source}: {e}"))?;
    Ok(Loaded {
        system,
        options,
        source: source.to_string(),
    })
}

/// Fills unset (`None`) fields of `flags` from the config-file defaults;
/// flags given on the command line win.
pub fn overlay<T: Serialize + DeserializeOwned>(flags: &T, defaults: Option<&Value>, command: &str) -> Result<T> {
    let mut merged = match defaults {
        None => Map::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => bail!("options.{command}: must be an object"),
    };
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| anyhow!("options.{command}: {e}"))
}
