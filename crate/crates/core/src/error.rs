use thiserror::Error;

/// Errors produced by the linear algebra, state construction and certificate layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("hermiticity violated by {defect}")]
    NotHermitian { defect: f64 },

    #[error("positivity violated by {defect}")]
    NotPositive { defect: f64 },

    #[error("trace violated: trace is {trace}")]
    TraceNotOne { trace: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("{function} is undefined for eigenvalue {eigenvalue}")]
    UndefinedSpectralFunction {
        function: &'static str,
        eigenvalue: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid tensor shape: {0}")]
    InvalidShape(String),

    #[error("subsystem index {index} out of range for {len} subsystems")]
    InvalidSubsystem { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{which} is rank deficient (min eigenvalue {min_eigenvalue:e}); regularize with epsilon_mix first")]
    RankDeficient {
        which: &'static str,
        min_eigenvalue: f64,
    },

    #[error("support violation: {what} has weight {weight:e} outside the support")]
    SupportViolation { what: &'static str, weight: f64 },

    #[error("degenerate overlap: 1 - hs/2 = {argument} is not positive")]
    DegenerateOverlap { argument: f64 },

    #[error("channel is not trace preserving (defect {defect:e})")]
    NotTracePreserving { defect: f64 },

    #[error("weights {which} sum to {sum}, expected 1")]
    WeightNormalization { which: &'static str, sum: f64 },

    #[error("construction check failed: {what} residual {residual:e} exceeds {limit:e}")]
    ConstructionCheck {
        what: &'static str,
        residual: f64,
        limit: f64,
    },

    #[error("matrix file: {0}")]
    MatrixFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
