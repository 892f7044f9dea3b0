use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("vector {index} has norm {norm:e}, below the zero tolerance")]
    ZeroVector { index: usize, norm: f64 },

    #[error("sequence is empty")]
    EmptySequence,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not normal (deviation {deviation:e})")]
    NotNormal { deviation: f64 },

    #[error("eigen/singular value iteration did not converge within {iterations} sweeps")]
    ConvergenceFailure { iterations: usize },

    #[error("unknown generator kind `{0}`")]
    UnknownKind(String),

    #[error("invalid parameters: {0}")]
    ParamValidation(String),

    #[error("sequence is not a frame for its span (lower bound {lower:e})")]
    NotFrameSequence { lower: f64 },

    #[error("sequence is not Parseval (max |S - I| = {residual:e})")]
    NotParseval { residual: f64 },

    #[error("blocks do not partition the index set: {0}")]
    NotPartition(String),

    #[error("scalar {index} is zero")]
    ZeroScalar { index: usize },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("parameters are not admissible: {0}")]
    Inadmissible(String),

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("point {index} has modulus {modulus} outside the open unit disc")]
    ModulusOutOfRange { index: usize, modulus: f64 },

    #[error("points {first} and {second} coincide")]
    RepeatedEigenvalue { first: usize, second: usize },

    #[error("iterate A^{power} of seed {seed} vanished")]
    IterateVanished { power: usize, seed: usize },

    #[error("operator norm is {norm}, expected 1")]
    NormNotOne { norm: f64 },

    #[error("unknown gallery id `{0}`")]
    UnknownGalleryId(String),
}

pub type Result<T, E = FrameError> = std::result::Result<T, E>;
