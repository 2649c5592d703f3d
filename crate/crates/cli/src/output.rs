use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Output directory of one command together with its resolved config.
pub struct Run {
    pub command: &'static str,
    pub config: Value,
    pub hash: String,
    pub out: PathBuf,
}

/// SHA-256 of the canonical JSON of `{command, config}`; object keys are sorted.
pub fn config_hash(command: &str, config: &Value) -> String {
    let canonical = json!({ "command": command, "config": config }).to_string();
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

impl Run {
    /// `config` must not contain the output directory, so that reruns into
    /// different directories hash alike.
    pub fn new(command: &'static str, config: &impl Serialize, out: &Path) -> Result<Self, CliError> {
        let config = serde_json::to_value(config)?;
        std::fs::create_dir_all(out)?;
        Ok(Run {
            command,
            hash: config_hash(command, &config),
            config,
            out: out.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn meta(&self) -> Value {
        json!({ "command": self.command, "config": self.config, "config_hash": self.hash })
    }

    /// Writes `body` after a `# {metadata}` line.
    pub fn write_csv(&self, name: &str, body: &str) -> Result<(), CliError> {
        let text = format!("# {}\n{body}", self.meta());
        std::fs::write(self.path(name), text)?;
        Ok(())
    }

    /// Writes `value` as pretty JSON with the metadata fields added at top level.
    pub fn write_json(&self, name: &str, value: impl Serialize) -> Result<(), CliError> {
        let mut v = serde_json::to_value(value)?;
        if let Value::Object(map) = &mut v {
            map.insert("command".into(), json!(self.command));
            map.insert("config".into(), self.config.clone());
            map.insert("config_hash".into(), json!(self.hash));
        }
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        std::fs::write(self.path(name), text)?;
        Ok(())
    }
}

/// Names of the failed checks.
pub fn failed(checks: &[(&str, bool)]) -> Vec<String> {
    checks
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name.to_string())
        .collect()
}

/// Turns failed checks into an exit-4 error.
pub fn finish(checks: &[(&str, bool)]) -> Result<(), CliError> {
    let f = failed(checks);
    if f.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(f))
    }
}

pub fn checks_json(checks: &[(&str, bool)]) -> Value {
    let mut m = serde_json::Map::new();
    for (name, ok) in checks {
        m.insert(name.to_string(), json!(ok));
    }
    Value::Object(m)
}
