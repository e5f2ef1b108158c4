use thiserror::Error;

/// Errors raised by the clustering pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// `p_i > 0` where `q_i = 0`.
    #[error("absolute continuity violated at index {index}")]
    AbsoluteContinuityViolation { index: usize },

    #[error("weight vector has zero L1 norm")]
    AllZeroWeights,

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("data matrix too small: {rows} rows, {cols} columns")]
    TooSmall { rows: usize, cols: usize },

    /// Feature has zero sample standard deviation.
    #[error("feature {0} is constant")]
    ConstantFeature(usize),

    #[error("bandwidth for feature {0} must be finite and positive")]
    InvalidBandwidth(usize),

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("label {label} out of range for {k} clusters")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("{n} points cannot fill {k} clusters")]
    InsufficientPoints { n: usize, k: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Every per-feature mutual information vanished; the partition carries no signal.
    #[error("all per-feature mutual informations are zero")]
    DegenerateMi,

    #[error("label vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("infeasible mixture spec: {0}")]
    InfeasibleSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
