//! Numerical toolkit for frames and Bessel sequences in finite truncations of a
//! separable Hilbert space.
//!
//! Infinite sequences are modelled by [`GeneratorSequence`]s that materialize
//! growing prefixes; statements about the infinite object become
//! [`DivergenceVerdict`]s over a [`TruncationSchedule`].

// Negated comparisons below also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod frame;
pub mod gallery;
pub mod generator;
pub mod hilbert;
pub mod iterative;
pub mod multiplier;
pub mod normalization;
pub mod perturbation;
pub mod random;

pub use error::{FrameError, Result};
pub use frame::{
    balan_check, biorthogonal_dual, canonical_parseval, frame_bounds, frame_operator, gram_matrix, parseval_residual,
    verify_projection_model, AnalysisMatrix, BalanReport, FrameBounds, Minimality, ProjectionModelReport,
};
pub use generator::GeneratorSequence;
pub use hilbert::{
    hermitian_eig, inner, project, singular_values, ComplexVector, LinearOperator, SpectralData, SubspaceSpec,
    VectorSequence, C64,
};
pub use iterative::{IterativeSystemSpec, OperatorSpec, TrajectoryReport};
pub use multiplier::{FactorizationResult, MultiplierSpec};
pub use normalization::{
    normalize, CategoryReport, Classification, DivergenceVerdict, NormalizabilityReport, TruncationSchedule,
    VerdictRule,
};
pub use perturbation::{PerturbationCertificate, PerturbationParams};

/// Numerical thresholds shared across modules.
pub mod tol {
    /// Vectors with smaller norm count as zero elements.
    pub const ZERO_TOL: f64 = 1e-13;
    pub const HERMITIAN_REL: f64 = 1e-12;
    pub const NORMAL_REL: f64 = 1e-10;
    pub const ORTHONORMAL: f64 = 1e-10;
    /// Eigenvalues of a frame operator below `RANK_REL · λ_max` are treated as zero.
    pub const RANK_REL: f64 = 1e-12;
    /// `max|S − I|` allowed for a sequence to count as Parseval.
    pub const PARSEVAL: f64 = 1e-8;
    pub const DIVERGENCE_FACTOR: f64 = 4.0;
    pub const PLATEAU_TOL: f64 = 0.05;
    /// Norm-bounded-below cutoff.
    pub const NBB_TOL: f64 = 1e-6;
    /// Relative change allowed between the last two schedule points of a frame proxy.
    pub const FRAME_PROXY_TOL: f64 = 0.05;
    pub const COMPACT_TAIL: f64 = 1e-8;
    pub const FIXED_POINT: f64 = 1e-9;
    pub const PAIRING_NONZERO: f64 = 1e-10;
    pub const DEFAULT_SEED: u64 = 0x5EED_F4A3;
}
