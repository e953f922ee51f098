use thiserror::Error;

/// Errors for Gaussian-state metrology computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} must be even and at least 2")]
    BadDimension(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error("unphysical correlation matrix: max |gamma| = {gamma_abs}")]
    Unphysical { gamma_abs: f64 },

    #[error("extremal state: |gamma| = {gamma_abs} has no finite generator matrix")]
    ExtremalState { gamma_abs: f64 },

    #[error("partition function overflowed; use log_partition_function")]
    PartitionOverflow,

    #[error("majorana index {index} out of range for {dim} operators")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("index tuple must be strictly increasing with even nonzero length")]
    BadIndexTuple,

    #[error(
        "singular pair ({j},{k}): |gamma_j gamma_k - 1| < eps but tangent component {magnitude} is not removable"
    )]
    SingularPair { j: usize, k: usize, magnitude: f64 },

    #[error("QFIM is singular: min eigenvalue {min_eig}")]
    SingularQfim { min_eig: f64 },

    #[error("cost matrix is not symmetric positive definite")]
    NonPdCost,

    #[error("mode count {n} outside dense-oracle range 1..={max}")]
    ModeCount { n: usize, max: usize },

    #[error("tangent leaves the state's support: |drho| = {magnitude} on the kernel")]
    KernelTangent { magnitude: f64 },

    #[error("parameter '{name}' = {value} outside the family domain")]
    DomainViolation { name: String, value: f64 },

    #[error("kitaev chain needs at least 2 sites, got {0}")]
    TooFewSites(usize),

    #[error("family has {expected} parameters, point has {got}")]
    ParameterCount { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
