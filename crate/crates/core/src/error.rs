use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0:?} lies outside the density's domain")]
    OutsideDomain(Vec<f64>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("states are not lattice neighbours: {from:?} -> {to:?}")]
    NotAdjacent { from: Vec<i64>, to: Vec<i64> },

    #[error("state space of {states} states exceeds the cap of {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },

    #[error("network is disconnected")]
    Disconnected,

    #[error("maximum of the density is attained at {0} vertices; use the multi-maximum variant")]
    NonUniqueMaximum(usize),

    #[error("chain is not reversible (detailed-balance violation {0:e})")]
    NonReversible(f64),

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error("bound overflows: {0}")]
    Overflow(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("distributions have mismatched supports ({0} vs {1} states)")]
    SupportMismatch(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
