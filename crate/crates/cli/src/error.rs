use std::path::Path;

use serde_json::json;

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Numerical(toda_kdv::Error),
    /// Exit 1.
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            CliError::Config(m) => ("config", m.clone()),
            CliError::Numerical(e) => ("numerical", e.to_string()),
            CliError::Io(m) => ("io", m.clone()),
        };
        json!({ "error": kind, "message": message, "exit_code": self.exit_code() })
    }
}

impl From<toda_kdv::Error> for CliError {
    fn from(e: toda_kdv::Error) -> Self {
        use toda_kdv::Error as E;
        match e {
            // bad inputs rather than failed numerics
            E::InvalidArgument(_)
            | E::DegreeTooLarge { .. }
            | E::NonFiniteCoefficient { .. }
            | E::NonPositiveOffDiagonal { .. } => CliError::Config(e.to_string()),
            e => CliError::Numerical(e),
        }
    }
}
