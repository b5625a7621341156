use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A relation matrix failed one of the partial-order axioms.
    #[error("invalid partial order: {0}")]
    InvalidOrder(String),

    /// A state label was not found in the ground set.
    #[error("unknown state label `{0}`")]
    UnknownState(String),

    /// Vector/matrix sizes do not agree with the poset dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A weight vector is not a probability distribution.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// An exact enumeration or exact forward iteration was requested on an
    /// instance larger than its guard allows.
    #[error("capacity exceeded: {what} requires {limit_desc} (got {got}); {hint}")]
    CapacityExceeded {
        what: &'static str,
        limit_desc: String,
        got: usize,
        hint: &'static str,
    },

    /// A drift certificate violates its own constraints (V < 1, d < 1, ...).
    #[error("invalid drift certificate: {0}")]
    InvalidCertificate(String),

    /// The small set is empty where a nonempty one is required.
    #[error("empty small set: the coupling constant is an infimum over C x C and is undefined for empty C")]
    EmptySmallSet,

    /// A grid argument was empty or out of range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A stochastic recursive sequence stepped outside its state space.
    #[error("model domain error at step {step}: {msg}")]
    ModelDomain { step: usize, msg: String },

    /// Configuration-level failure (missing block, inconsistent fields).
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
