use thiserror::Error;

/// Failures of the front end, each with a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] frontlab::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    /// 2 for usage and domain errors, 3 for numerical failures, 4 for
    /// infeasible constant selections.
    pub fn exit_code(&self) -> i32 {
        use frontlab::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Json { .. } | CliError::Csv { .. } => 2,
            CliError::Core(e) => match e {
                E::Domain(_) | E::Parameter(_) | E::RegimeMismatch(_) | E::CertificateViolation { .. } => 2,
                E::InfeasibleSelection { .. } => 4,
                E::BlowUp(_)
                | E::StabilityFailure { .. }
                | E::NewtonFailure { .. }
                | E::DomainExhausted { .. }
                | E::NonTermination { .. }
                | E::Transform(_)
                | E::SearchExhausted { .. }
                | E::EmptyTrace
                | E::DegenerateFit(_) => 3,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}
