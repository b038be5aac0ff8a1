use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty aggregation set")]
    EmptySet,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("gradient vector must have at least one coordinate")]
    EmptyVector,

    #[error("non-finite value {value} at coordinate {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate sample: zero variance")]
    DegenerateSample,

    #[error("f exceeds collected set: f = {f}, collected = {collected}")]
    FExceedsCollected { f: usize, collected: usize },

    #[error("over-trimmed: trimming {trim} from each side of {m} values leaves nothing")]
    OverTrimmed { trim: usize, m: usize },

    #[error("Krum needs n ≥ f + 3 (n = {n}, f = {f})")]
    KrumTooFew { n: usize, f: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown worker id {0}")]
    UnknownWorker(usize),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("infeasible dataset: {0}")]
    InfeasibleDataset(String),

    #[error("idx format: {0}")]
    Idx(String),
}
