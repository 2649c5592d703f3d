use serde_json::json;

/// Failure of a command, carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters (exit 2).
    Validation(String),
    /// A construction step failed (exit 3).
    Construction(String),
    /// Outputs were written but a result check failed (exit 4).
    Check(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Construction(_) => 3,
            CliError::Check(_) => 4,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            CliError::Validation(m) => ("validation", m.clone()),
            CliError::Construction(m) => ("construction", m.clone()),
            CliError::Check(failed) => ("check", format!("failed checks: {}", failed.join(", "))),
        };
        let mut v = json!({ "error": { "kind": kind, "message": message, "exit_code": self.exit_code() } });
        if let CliError::Check(failed) = self {
            v["error"]["failed"] = json!(failed);
        }
        v
    }
}

impl From<sewn_core::Error> for CliError {
    fn from(e: sewn_core::Error) -> Self {
        match e {
            sewn_core::Error::NonPositiveScalar(_) => CliError::Check(vec![e.to_string()]),
            e if e.is_validation() => CliError::Validation(e.to_string()),
            e => CliError::Construction(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Construction(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Construction(format!("json: {e}"))
    }
}
