use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Verify(_) => 4,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }
}

impl From<robustq::Error> for CliError {
    fn from(e: robustq::Error) -> Self {
        use robustq::Error as E;
        match e {
            E::NonConvergence { .. } | E::IterationCap { .. } | E::UnattainableBudget { .. } => {
                CliError::NonConvergence(e.to_string())
            }
            E::Domain { .. } | E::Range { .. } | E::InvalidParameter(_) => CliError::Config(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(format!("json: {e}"))
    }
}
