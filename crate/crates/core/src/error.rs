use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("focal set {bits:#b} is not contained in a frame of {size} elements")]
    OutsideFrame { bits: u64, size: usize },

    #[error("mass functions are defined on different frames")]
    FrameMismatch,

    #[error("the empty set cannot carry mass")]
    EmptyFocalSet,

    #[error("invalid mass {value} on focal set {bits:#b}")]
    InvalidMass { bits: u64, value: f64 },

    #[error("masses sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("total conflict (K = {k}) between evidence {left} and evidence {right}")]
    TotalConflict { k: f64, left: usize, right: usize },

    #[error("logarithm base must be finite and greater than 1, got {0}")]
    InvalidLogBase(f64),

    #[error("sigma must be finite and positive, got {0}")]
    InvalidSigma(f64),

    #[error("need at least {needed} bodies of evidence, got {got}")]
    TooFewEvidences { needed: usize, got: usize },

    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid confusion matrix: {0}")]
    InvalidConfusion(String),

    #[error("invalid score matrix: {0}")]
    InvalidScores(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("bodies of evidence disagree on {0}")]
    ShapeMismatch(String),
}
