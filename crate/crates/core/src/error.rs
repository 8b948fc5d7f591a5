use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: side {k} (need k >= 3)")]
    InvalidGrid { k: usize },

    #[error("exhaustive enumeration over 2^{cells} fields is too large (k <= 4 required)")]
    EnumerationTooLarge { cells: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("coverage of range {c} overlaps itself on a {k}x{k} torus (need k >= 2c+1)")]
    CoverageOverlap { c: u32, k: usize },

    #[error("pattern has {got} bits, sensing function expects {expected}")]
    PatternSize { expected: usize, got: usize },

    #[error("invalid sensing function: {0}")]
    InvalidSensingFunction(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("conditional on output {x} with zero probability")]
    UndefinedConditional { x: usize },

    #[error("inconsistent types: {0}")]
    InconsistentTypes(String),

    #[error("marginalization direction not available for range {c}")]
    WrongDirection { c: u32 },

    #[error("infeasible constraint set: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
