//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by constructors and operations in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry count {got} does not match {rows}x{cols}")]
    EntryCount {
        rows: usize,
        cols: usize,
        got: usize,
    },

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("subsystem dimensions {product} do not factor dimension {dim}")]
    BadFactorization { dim: usize, product: usize },

    #[error("subsystem index {index} out of range for {count} factors")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("empty subsystem selection")]
    EmptyKeepSet,

    #[error("tensor dimension {dim} exceeds the configured maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("matrix is not Hermitian (max deviation {deviation})")]
    NotHermitian { deviation: f64 },

    #[error("trace deviates from 1 by {deviation}")]
    NotUnitTrace { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("vector norm deviates from 1 by {deviation}")]
    NotNormalized { deviation: f64 },

    #[error("cannot normalize a vector of negligible norm {norm}")]
    ZeroNorm { norm: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    EigNoConvergence { sweeps: usize },

    #[error("matrix is not idempotent (max deviation {deviation})")]
    NotIdempotent { deviation: f64 },

    #[error("trace {trace} is not within tolerance of an integer rank")]
    RankNotIntegral { trace: f64 },

    #[error("spanning set is linearly dependent (smallest Gram eigenvalue {min_eigenvalue})")]
    DependentVectors { min_eigenvalue: f64 },

    #[error("PVM elements {first} and {second} are not orthogonal (max entry {deviation})")]
    PvmNotOrthogonal {
        first: usize,
        second: usize,
        deviation: f64,
    },

    #[error("PVM elements do not resolve the identity (max deviation {deviation})")]
    PvmIncomplete { deviation: f64 },

    #[error("PVM has {elements} elements but {labels} outcome labels")]
    PvmLabelCount { elements: usize, labels: usize },

    #[error("raw probability {value} lies outside the tolerance band")]
    ProbabilityOutOfBand { value: f64 },

    #[error("shared projector is not an element of context '{context}'")]
    SharedElementMissing { context: String },

    #[error("conditioning event has probability {probability} below the zero threshold")]
    ZeroProbabilityEvent { probability: f64 },

    #[error("index {index} out of range {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("coupling matrix row {row} has {got} entries, expected {expected}")]
    CouplingShape {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("amplitude weights do not sum to 1 (deviation {deviation})")]
    WeightsNotNormalized { deviation: f64 },

    #[error("{context} count {got} does not match pointer dimension {expected}")]
    PointerCount {
        context: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("time grid is empty")]
    EmptyGrid,

    #[error("time grid must be finite and ascending at position {index}")]
    BadGrid { index: usize },

    #[error("classicality threshold {value} must lie in (0, 1)")]
    ThresholdOutOfRange { value: f64 },

    #[error("fiducial dimension {dim} outside supported range 2..={max}")]
    FiducialDimOutOfRange { dim: usize, max: usize },

    #[error("observable set is not informationally complete (span rank {rank} < {required})")]
    IncompleteFiducialSet { rank: usize, required: usize },

    #[error("probability table does not match the fiducial set: {reason}")]
    TableMismatch { reason: String },

    #[error("distribution for '{label}' sums to {sum}, not 1")]
    DistributionNotNormalized { label: String, sum: f64 },

    #[error("distribution for '{label}' has a negative entry {value}")]
    NegativeProbability { label: String, value: f64 },

    #[error("product outcome space has {atoms} atoms, above the cap {max}")]
    ProductSpaceTooLarge { atoms: usize, max: usize },

    #[error("sample count must be at least 1")]
    NoSamples,
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
