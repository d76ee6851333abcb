use thiserror::Error;

pub type Result<T> = std::result::Result<T, HamfError>;

#[derive(Debug, Error)]
pub enum HamfError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A truncated series would need more terms than the configured cap.
    #[error("term cap exceeded: {what} needs {needed} terms, cap is {cap}")]
    TermCap {
        what: &'static str,
        needed: u64,
        cap: u64,
    },

    /// A quantity that must be exact (e.g. a winding number) came out inconsistent.
    #[error("numerical fault: {0}")]
    Numerical(String),

    #[error("coefficient {k} violates the decay certificate: |h_k| = {value} > {bound}")]
    DecayViolation { k: u64, value: f64, bound: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HamfError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        HamfError::Domain(msg.into())
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            HamfError::Domain(_) | HamfError::Parse(_) | HamfError::DecayViolation { .. } => 2,
            HamfError::TermCap { .. }
            | HamfError::Numerical(_)
            | HamfError::Io(_)
            | HamfError::Csv(_) => 1,
        }
    }
}
