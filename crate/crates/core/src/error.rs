use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),
    #[error("unknown {kind} `{name}`")]
    UnknownId { kind: &'static str, name: String },
    #[error("duplicate {kind} `{name}`")]
    DuplicateId { kind: &'static str, name: String },
    #[error("index {index} outside a universe of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("illegal routing step: {0}")]
    IllegalStep(String),
    #[error("graph is not stopping: some vertex cannot reach a sink")]
    NotStopping,
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("step cap of {cap} exceeded after {} steps", partial.len())]
    StepCapExceeded { cap: u64, partial: Vec<usize> },
    #[error("walk step cap of {cap} exceeded")]
    WalkStepCapExceeded { cap: u64 },
    #[error("oracle bound exceeded: {0}")]
    OracleBound(String),
    #[error("inconclusive search: {0}")]
    Inconclusive(String),
    #[error("configurations are not linearly equivalent")]
    NotLinearlyEquivalent,
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
