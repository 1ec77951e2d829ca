use thiserror::Error;

/// Errors raised across the library.
///
/// Variants map onto the failure classes of the command-line front end:
/// domain/parameter errors, numerical failures and infeasible constant
/// selections each get their own exit code there.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("certificate violated by {bound} bound at s = {s:e} (margin {margin:e})")]
    CertificateViolation {
        bound: &'static str,
        s: f64,
        margin: f64,
    },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("infeasible selection: {condition}")]
    InfeasibleSelection { condition: String },

    #[error("growth solution blows up at t = {0}")]
    BlowUp(f64),

    #[error("explicit update left the admissible band at node {node} (value {value})")]
    StabilityFailure { node: usize, value: f64 },

    #[error("nonlinear solve failed to converge at t = {t} (dt = {dt:e})")]
    NewtonFailure { t: f64, dt: f64 },

    #[error("front reached the right edge of the domain at t = {t} (x = {x})")]
    DomainExhausted { t: f64, x: f64 },

    #[error("shooting did not terminate before y = {y_max}")]
    NonTermination { y_max: f64 },

    #[error("transform error: {0}")]
    Transform(String),

    #[error("speed search exhausted after {halvings} halvings")]
    SearchExhausted { halvings: u32 },

    #[error("no level crossing found in any snapshot")]
    EmptyTrace,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

impl Error {
    pub(crate) fn infeasible(condition: impl Into<String>) -> Self {
        Error::InfeasibleSelection {
            condition: condition.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
