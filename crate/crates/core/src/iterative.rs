//! Orbits `{A^n x}` of normal operators, Carleson products, norm
//! trajectories and the witnesses for non-normalizability.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{FrameError, Result};
use crate::frame::{bounds_from_spectrum, frame_bounds};
use crate::generator::GeneratorSequence;
use crate::hilbert::{
    eig_hermitian_matrix, inner, re, svd, ComplexVector, LinearOperator, SubspaceSpec, VectorSequence, C64,
};
use crate::normalization::{
    bessel_normalizable_probe, lower_normalizable_probe, normalize, probe_trace, Classification, DivergenceVerdict,
    TruncationSchedule,
};
use crate::tol;

/// Dense matrix that serializes as rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix(pub DMatrix<C64>);

impl Serialize for DenseMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<C64>> = self.0.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    DiagonalNormal {
        eigenvalues: Vec<C64>,
    },
    /// `Σ λ_j e_j e_j^H` with real `λ_j`.
    SelfAdjointSpectral {
        eigenvalues: Vec<f64>,
    },
    DenseNormal {
        matrix: DenseMatrix,
    },
    /// Diagonal with moduli non-increasing, the finite model of a compact operator.
    CompactDiagonal {
        diagonal: Vec<f64>,
    },
}

impl OperatorSpec {
    pub fn dense(matrix: DMatrix<C64>) -> Result<Self> {
        let spec = Self::DenseNormal { matrix: DenseMatrix(matrix) };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::DiagonalNormal { eigenvalues } => eigenvalues.len(),
            Self::SelfAdjointSpectral { eigenvalues } => eigenvalues.len(),
            Self::DenseNormal { matrix } => matrix.0.nrows(),
            Self::CompactDiagonal { diagonal } => diagonal.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(FrameError::ParamValidation("operator dimension must be positive".into()));
        }
        match self {
            Self::DenseNormal { matrix } => {
                let op = LinearOperator::new(matrix.0.clone())?;
                if !op.is_normal() {
                    return Err(FrameError::NotNormal { deviation: op.normal_deviation() });
                }
            }
            Self::CompactDiagonal { diagonal } if diagonal.windows(2).any(|w| w[1].abs() > w[0].abs()) => {
                return Err(FrameError::ParamValidation("compact diagonal must be non-increasing in modulus".into()));
            }
            _ => {}
        }
        Ok(())
    }

    /// Diagonal entries, when the operator is diagonal in the standard basis.
    pub fn diagonal(&self) -> Option<Vec<C64>> {
        match self {
            Self::DiagonalNormal { eigenvalues } => Some(eigenvalues.clone()),
            Self::SelfAdjointSpectral { eigenvalues } => Some(eigenvalues.iter().map(|&l| re(l)).collect()),
            Self::CompactDiagonal { diagonal } => Some(diagonal.iter().map(|&l| re(l)).collect()),
            Self::DenseNormal { .. } => None,
        }
    }

    pub fn to_operator(&self) -> LinearOperator {
        match (self, self.diagonal()) {
            (_, Some(d)) => LinearOperator::diagonal(&d),
            (Self::DenseNormal { matrix }, None) => LinearOperator::new(matrix.0.clone()).expect("validated square"),
            _ => unreachable!(),
        }
    }

    pub fn apply(&self, x: &ComplexVector) -> Result<ComplexVector> {
        if x.dim() != self.dim() {
            return Err(FrameError::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        Ok(match (self, self.diagonal()) {
            (_, Some(d)) => ComplexVector::new(x.components().iter().zip(&d).map(|(a, b)| a * b).collect()),
            (Self::DenseNormal { matrix }, None) => ComplexVector::from_dvector(&matrix.0 * x.as_dvector()),
            _ => unreachable!(),
        })
    }

    pub fn operator_norm(&self) -> Result<f64> {
        match self.diagonal() {
            Some(d) => Ok(d.iter().map(|z| z.norm()).fold(0.0, f64::max)),
            None => self.to_operator().operator_norm(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterativeSystemSpec {
    pub op: OperatorSpec,
    pub seeds: Vec<ComplexVector>,
    pub n_max: usize,
}

impl IterativeSystemSpec {
    pub fn new(op: OperatorSpec, seeds: Vec<ComplexVector>, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(FrameError::ParamValidation("n_max must be at least 1".into()));
        }
        GeneratorSequence::OperatorOrbit { op: op.clone(), seeds: seeds.clone() }.validate()?;
        Ok(Self { op, seeds, n_max })
    }

    /// The orbit as a generator whose level is the iteration depth.
    pub fn generator(&self) -> GeneratorSequence {
        GeneratorSequence::OperatorOrbit { op: self.op.clone(), seeds: self.seeds.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Iteration {
    pub sequence: VectorSequence,
    /// Set when an iterate fell below the zero threshold; the system is
    /// cut before that power.
    pub truncated: Option<TruncationWarning>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationWarning {
    pub power: usize,
    pub seed: usize,
    pub norm: f64,
}

/// `x_1, …, x_S, A x_1, …, A x_S, …, A^{n_max} x_S`.
pub fn iterate(spec: &IterativeSystemSpec) -> Result<Iteration> {
    let mut out = Vec::with_capacity(spec.seeds.len() * (spec.n_max + 1));
    let mut current = spec.seeds.clone();
    let mut truncated = None;
    'powers: for power in 0..=spec.n_max {
        for (seed, v) in current.iter().enumerate() {
            let norm = v.norm();
            if !(norm > tol::ZERO_TOL) {
                if power == 0 {
                    return Err(FrameError::IterateVanished { power, seed });
                }
                truncated = Some(TruncationWarning { power, seed, norm });
                break 'powers;
            }
        }
        out.extend(current.iter().cloned());
        if power < spec.n_max {
            current = current.iter().map(|v| spec.op.apply(v)).collect::<Result<_>>()?;
        }
    }
    let sequence = VectorSequence::new(spec.op.dim(), out, "orbit")?;
    Ok(Iteration { sequence, truncated })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CarlesonReport {
    pub inf_value: f64,
    /// Zero-based index attaining the infimum.
    pub argmin_n: usize,
    pub products: Vec<f64>,
}

/// `inf_n Π_{k≠n} |λ_n − λ_k| / |1 − conj(λ_n) λ_k|` over the first `k_max` points.
pub fn carleson_product(lambdas: &[C64], k_max: usize) -> Result<CarlesonReport> {
    let pts = &lambdas[..k_max.min(lambdas.len())];
    if pts.is_empty() {
        return Err(FrameError::EmptySequence);
    }
    for (index, z) in pts.iter().enumerate() {
        if !(z.norm() < 1.0) {
            return Err(FrameError::ModulusOutOfRange { index, modulus: z.norm() });
        }
    }
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            if pts[i] == pts[j] {
                return Err(FrameError::RepeatedEigenvalue { first: i, second: j });
            }
        }
    }
    let one = re(1.0);
    let products: Vec<f64> = (0..pts.len())
        .map(|n| {
            let a = pts[n];
            (0..pts.len())
                .filter(|&k| k != n)
                .map(|k| {
                    let b = pts[k];
                    // 1 − conj(a) b written to keep the small defects exact
                    let denom = (one - a.conj()) + a.conj() * (one - b);
                    (a - b).norm() / denom.norm()
                })
                .product()
        })
        .collect();
    let (argmin_n, inf_value) =
        products.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
    Ok(CarlesonReport { inf_value, argmin_n, products })
}

/// Defects `a_k = 1 − λ_k = 2^{-k}`, `k = 1..=K`.
fn thm313_defects(k: usize) -> Vec<f64> {
    (1..=k).map(|j| 0.5f64.powi(j as i32)).collect()
}

pub fn thm313_lambdas(k: usize) -> Vec<f64> {
    thm313_defects(k).into_iter().map(|a| 1.0 - a).collect()
}

/// Seed coordinates `√(1 − λ_k²) = √(a_k (2 − a_k))`.
pub fn thm313_seed(k: usize) -> ComplexVector {
    ComplexVector::from_real(&thm313_defects(k).into_iter().map(|a| (a * (2.0 - a)).sqrt()).collect::<Vec<_>>())
}

/// Iteration depth at which `λ_K^n` drops below `1e-8`.
pub fn thm313_depth(k: usize) -> usize {
    let rate = -(-0.5f64.powi(k as i32)).ln_1p();
    (1e8f64.ln() / rate).ceil() as usize
}

/// `A = diag(1 − 2^{-k})`, seed with `⟨x, e_k⟩ = √(1 − λ_k²)`.
pub fn build_thm313_system(k: usize) -> Result<IterativeSystemSpec> {
    if k < 2 {
        return Err(FrameError::ParamValidation(format!("need at least 2 blocks, got {k}")));
    }
    IterativeSystemSpec::new(
        OperatorSpec::SelfAdjointSpectral { eigenvalues: thm313_lambdas(k) },
        vec![thm313_seed(k)],
        thm313_depth(k),
    )
}

/// Frame operator of the full orbit `{P_K A^n x}_{n ≥ 0}`, summed in closed
/// form: `S_jk = x_j x_k / (1 − λ_j λ_k)`.
pub fn thm313_orbit_frame_operator(k: usize) -> DMatrix<C64> {
    let a = thm313_defects(k);
    let x: Vec<f64> = a.iter().map(|&a| (a * (2.0 - a)).sqrt()).collect();
    DMatrix::from_fn(k, k, |i, j| re(x[i] * x[j] / (a[i] + a[j] - a[i] * a[j])))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Thm313Report {
    pub carleson: CarlesonReport,
    /// `‖P_k x‖ / √(1 − λ_k²)` over all k (read with j = k); all ones here.
    pub condition_e_range: (f64, f64),
    pub condition_e_reading: &'static str,
    pub frame_proxy_lower: DivergenceVerdict,
    pub frame_proxy_upper: DivergenceVerdict,
    pub frame_proxy_stable: bool,
    pub normalized: DivergenceVerdict,
}

pub const THM313_PROXY_SCHEDULE: [usize; 8] = [8, 16, 24, 32, 40, 48, 56, 64];
pub const THM313_NORMALIZED_SCHEDULE: [usize; 9] = [4, 5, 6, 7, 8, 9, 10, 11, 12];

/// Frame proxy of the orbit over `proxy_ks` and the normalized Bessel
/// probe of the iterated orbit over `normalized_ks`.
pub fn thm313_report(carleson_k: usize, proxy_ks: &[usize], normalized_ks: &[usize]) -> Result<Thm313Report> {
    let lambdas: Vec<C64> = thm313_lambdas(carleson_k).into_iter().map(re).collect();
    let carleson = carleson_product(&lambdas, carleson_k)?;
    let seed = thm313_seed(carleson_k);
    let ratios: Vec<f64> = thm313_lambdas(carleson_k)
        .iter()
        .zip(seed.components())
        .map(|(l, x)| x.norm() / (1.0 - l * l).sqrt())
        .collect();
    let condition_e_range =
        (ratios.iter().copied().fold(f64::INFINITY, f64::min), ratios.iter().copied().fold(0.0, f64::max));
    let bounds: Vec<(usize, f64, f64)> = proxy_ks
        .par_iter()
        .map(|&k| {
            let b = bounds_from_spectrum(&eig_hermitian_matrix(&thm313_orbit_frame_operator(k))?);
            Ok((k, b.ambient_lower, b.upper_opt))
        })
        .collect::<Result<_>>()?;
    let frame_proxy_lower = DivergenceVerdict::classify(bounds.iter().map(|b| (b.0, b.1)).collect(), true);
    let frame_proxy_upper = DivergenceVerdict::classify(bounds.iter().map(|b| (b.0, b.2)).collect(), false);
    let normalized_trace: Vec<(usize, f64)> = normalized_ks
        .par_iter()
        .map(|&k| {
            let it = iterate(&build_thm313_system(k)?)?;
            Ok((k, frame_bounds(&normalize(&it.sequence))?.upper_opt))
        })
        .collect::<Result<_>>()?;
    Ok(Thm313Report {
        carleson,
        condition_e_range,
        condition_e_reading: "j = k",
        frame_proxy_stable: frame_proxy_lower.is_bounded() && frame_proxy_upper.is_bounded(),
        frame_proxy_lower,
        frame_proxy_upper,
        normalized: DivergenceVerdict::classify(normalized_trace, false),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    DecreasingToZero,
    IncreasingUnbounded,
    Plateau,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub norms: Vec<f64>,
    pub regime: Regime,
    /// First `k` with `‖A^{k+1}x‖ > ‖A^k x‖`.
    pub k0: Option<usize>,
    /// `lim ‖A^n x‖` when the regime is a plateau.
    pub limit: Option<f64>,
    /// Largest relative shortfall of the growth envelope from `k0` on.
    pub envelope_violation: Option<f64>,
}

fn power_norms(op: &OperatorSpec, x: &ComplexVector, n_max: usize) -> Result<Vec<f64>> {
    let mut norms = Vec::with_capacity(n_max + 1);
    let mut v = x.clone();
    norms.push(v.norm());
    for _ in 0..n_max {
        v = op.apply(&v)?;
        norms.push(v.norm());
    }
    Ok(norms)
}

fn require_normal(op: &OperatorSpec) -> Result<()> {
    if let OperatorSpec::DenseNormal { matrix } = op {
        let o = LinearOperator::new(matrix.0.clone())?;
        if !o.is_normal() {
            return Err(FrameError::NotNormal { deviation: o.normal_deviation() });
        }
    }
    Ok(())
}

/// Squared mass of `x` on the spectral parts of `A` with modulus below,
/// at, and above one (eigenspaces of `A^H A`, which for normal `A` are
/// unions of eigenspaces of `A` sharing a modulus).
fn modulus_masses(op: &OperatorSpec, x: &ComplexVector) -> Result<(f64, f64, f64)> {
    const UNIT_BAND: f64 = 1e-10;
    let mut masses = (0.0, 0.0, 0.0);
    let mut add = |modulus_sq: f64, mass: f64| {
        if modulus_sq > 1.0 + UNIT_BAND {
            masses.2 += mass;
        } else if modulus_sq >= 1.0 - UNIT_BAND {
            masses.1 += mass;
        } else {
            masses.0 += mass;
        }
    };
    match op.diagonal() {
        Some(d) => d.iter().zip(x.components()).for_each(|(l, z)| add(l.norm_sqr(), z.norm_sqr())),
        None => {
            let m = op.to_operator().into_matrix();
            let spec = eig_hermitian_matrix(&(m.adjoint() * &m))?;
            for (l, v) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
                add(*l, inner(x, v)?.norm_sqr());
            }
        }
    }
    Ok(masses)
}

pub fn norm_trajectory(op: &OperatorSpec, x: &ComplexVector, n_max: usize) -> Result<TrajectoryReport> {
    require_normal(op)?;
    if !(x.norm() > tol::ZERO_TOL) {
        return Err(FrameError::ZeroVector { index: 0, norm: x.norm() });
    }
    let norms = power_norms(op, x, n_max)?;
    let k0 = norms.windows(2).position(|w| w[1] > w[0] * (1.0 + 1e-12));
    let (below, at, above) = modulus_masses(op, x)?;
    let noise = 1e-24 * x.norm_sq();
    let (regime, limit) = if above > noise {
        (Regime::IncreasingUnbounded, None)
    } else if k0.is_some() {
        (Regime::Mixed, None)
    } else if at > noise {
        (Regime::Plateau, Some(at.sqrt()))
    } else {
        let _ = below;
        (Regime::DecreasingToZero, None)
    };
    let envelope_violation = match k0 {
        Some(k) if n_max >= k + 2 => Some(lemma57_check(op, x, k, n_max - k)?),
        _ => None,
    };
    Ok(TrajectoryReport { norms, regime, k0, limit, envelope_violation })
}

/// `max_{2 ≤ n ≤ n_range} (env_n − ‖A^{k0+n}x‖) / ‖A^{k0+n}x‖` with
/// `env_n = (‖A^{k0+1}x‖/‖A^{k0}x‖)^{n−1} ‖A^{k0+1}x‖`.
pub fn lemma57_check(op: &OperatorSpec, x: &ComplexVector, k0: usize, n_range: usize) -> Result<f64> {
    require_normal(op)?;
    let norms = power_norms(op, x, k0 + n_range.max(2))?;
    if let Some(power) = norms.iter().position(|&n| !(n > 0.0)) {
        return Err(FrameError::IterateVanished { power, seed: 0 });
    }
    let ratio = norms[k0 + 1] / norms[k0];
    let mut worst = f64::NEG_INFINITY;
    for n in 2..=n_range.max(2) {
        let envelope = ratio.powi(n as i32 - 1) * norms[k0 + 1];
        let actual = norms[k0 + n];
        worst = worst.max((envelope - actual) / actual);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub w0: Vec<ComplexVector>,
    /// `max ‖A^H w_0 − w_0‖` over the fixed vectors.
    pub adjoint_residual: f64,
    /// `pairings[i][s] = ⟨w_i, x_s⟩`.
    pub pairings: Vec<Vec<C64>>,
    pub nonzero: Vec<Vec<bool>>,
}

/// Fixed vectors of a norm-one operator and their pairings with the seeds.
pub fn fixed_point_probe(op: &LinearOperator, seeds: &[ComplexVector]) -> Result<FixedPointReport> {
    let norm = op.operator_norm()?;
    if (norm - 1.0).abs() > 1e-10 {
        return Err(FrameError::NormNotOne { norm });
    }
    let d = op.dim();
    let shifted = op.matrix() - DMatrix::<C64>::identity(d, d);
    let s = svd(&shifted)?;
    let w0: Vec<ComplexVector> =
        (0..d).filter(|&k| s.singular_values[k] <= tol::FIXED_POINT).map(|k| s.right_vector(k)).collect();
    let adj = op.adjoint();
    let mut adjoint_residual: f64 = 0.0;
    for w in &w0 {
        adjoint_residual = adjoint_residual.max(adj.apply(w)?.sub(w)?.norm());
    }
    let mut pairings = Vec::with_capacity(w0.len());
    for w in &w0 {
        pairings.push(seeds.iter().map(|x| inner(w, x)).collect::<Result<Vec<_>>>()?);
    }
    let nonzero = pairings.iter().map(|row| row.iter().map(|z| z.norm() > tol::PAIRING_NONZERO).collect()).collect();
    Ok(FixedPointReport { w0, adjoint_residual, pairings, nonzero })
}

/// Which non-normalizability theorem a witness instantiates.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum WitnessKind {
    /// Norms tend to zero; the projections onto `M` keep a lower frame bound.
    VanishingNorms { subspace: SubspaceRule },
    /// Norms grow without bound; the projections onto `M` stay Bessel.
    GrowingNorms { subspace: SubspaceRule },
}

/// A subspace that grows with the truncation's ambient dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceRule {
    Ambient,
    /// `span{e_k : k ≥ first}` (zero-based).
    CoordinatesFrom {
        first: usize,
    },
}

impl SubspaceRule {
    pub fn at(&self, dim: usize) -> SubspaceSpec {
        match self {
            Self::Ambient => SubspaceSpec::whole(dim),
            Self::CoordinatesFrom { first } => SubspaceSpec::coordinates(dim, *first..dim),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WitnessStatus {
    HypothesisVerified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub kind: WitnessKind,
    pub status: WitnessStatus,
    /// Smallest (vanishing) or largest (growing) norm per level.
    pub norm_trend: DivergenceVerdict,
    /// Span lower bound (vanishing) or upper bound (growing) of `{P_M x_n}`.
    pub projected: DivergenceVerdict,
    /// Normalized Bessel probe (vanishing) or normalized lower probe (growing).
    pub normalized: DivergenceVerdict,
    pub conclusion_holds: bool,
}

fn projected_sequence(x: &VectorSequence, m: &SubspaceSpec) -> Result<VectorSequence> {
    let projected: Vec<ComplexVector> = x.iter().map(|v| m.project(v)).collect::<Result<_>>()?;
    let keep: Vec<ComplexVector> = projected.into_iter().filter(|v| v.norm() > tol::ZERO_TOL).collect();
    VectorSequence::new(x.ambient_dim(), keep, "projected")
}

pub fn nonnormalizability_witness(
    g: &GeneratorSequence,
    kind: WitnessKind,
    sched: &TruncationSchedule,
) -> Result<WitnessReport> {
    let vanishing = matches!(kind, WitnessKind::VanishingNorms { .. });
    let rule = match &kind {
        WitnessKind::VanishingNorms { subspace } | WitnessKind::GrowingNorms { subspace } => *subspace,
    };
    let norm_trace = probe_trace(g, sched, |x| {
        let norms = x.norms();
        Ok(if vanishing {
            norms.iter().copied().fold(f64::INFINITY, f64::min)
        } else {
            norms.iter().copied().fold(0.0, f64::max)
        })
    })?;
    let norm_trend = DivergenceVerdict::classify(norm_trace, vanishing);
    if !norm_trend.is_divergent() {
        return Err(FrameError::HypothesisFailed(format!(
            "norms do not {} along the schedule (trend {:?})",
            if vanishing { "tend to zero" } else { "grow without bound" },
            norm_trend.classification
        )));
    }
    let projected_trace = probe_trace(g, sched, |x| {
        let p = projected_sequence(x, &rule.at(x.ambient_dim()))?;
        let b = frame_bounds(&p)?;
        Ok(if vanishing { b.lower_opt } else { b.upper_opt })
    })?;
    let projected = DivergenceVerdict::classify(projected_trace, vanishing);
    if !projected.is_bounded() {
        return Err(FrameError::HypothesisFailed(format!(
            "projected {} bound is {:?}, not stable",
            if vanishing { "lower" } else { "upper" },
            projected.classification
        )));
    }
    let normalized = if vanishing { bessel_normalizable_probe(g, sched)? } else { lower_normalizable_probe(g, sched)? };
    Ok(WitnessReport {
        conclusion_holds: normalized.is_divergent(),
        kind,
        status: WitnessStatus::HypothesisVerified,
        norm_trend,
        projected,
        normalized,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactReport {
    pub smallest_singular_value: f64,
    pub compact_proxy: bool,
    /// `r_n = ‖A^{n+1}x‖ / ‖A^n x‖` for the first seed.
    pub ratios: Vec<f64>,
    /// First `n_0` with `r_n ≤ 1/2` for every later `n`.
    pub decay_onset: Option<usize>,
    pub regime: Regime,
    pub norm_bounded_below: bool,
    pub fixed_point: Option<FixedPointReport>,
    pub fixed_point_pairs: bool,
    /// Normalized Bessel probe over the depth schedule, restricted to depths
    /// whose iterates stay above the zero threshold.
    pub normalized: Option<DivergenceVerdict>,
    /// Whether some hypothesis variant applies (bounded-below norms or a
    /// fixed point pairing nontrivially with the seeds).
    pub variant_applies: bool,
    pub conclusion_holds: bool,
}

pub fn compact_iteration_probe(
    op: &OperatorSpec,
    seeds: &[ComplexVector],
    sched: &TruncationSchedule,
) -> Result<CompactReport> {
    op.validate()?;
    let first = seeds.first().ok_or(FrameError::EmptySequence)?;
    let svals = crate::hilbert::singular_values(op.to_operator().matrix())?;
    let smallest_singular_value = svals.last().copied().unwrap_or(0.0);
    let compact_proxy =
        matches!(op, OperatorSpec::CompactDiagonal { .. }) || smallest_singular_value <= tol::COMPACT_TAIL;
    if !compact_proxy {
        return Err(FrameError::HypothesisFailed("operator is not a compact model".into()));
    }
    let depth = sched.max();
    let norms = power_norms(op, first, depth)?;
    let ratios: Vec<f64> = norms.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect();
    let decay_onset = (0..ratios.len()).find(|&n0| ratios[n0..].iter().all(|&r| r <= 0.5));
    let regime = norm_trajectory(op, first, depth.min(64))?.regime;

    let mut safe_depth = depth;
    for s in seeds {
        let ns = power_norms(op, s, depth)?;
        if let Some(p) = ns.iter().position(|&n| !(n > tol::ZERO_TOL)) {
            safe_depth = safe_depth.min(p);
        }
    }
    let norm_bounded_below = safe_depth == depth
        && seeds.iter().all(|s| power_norms(op, s, depth).is_ok_and(|ns| ns.iter().all(|&n| n >= tol::NBB_TOL)));

    let op_norm = op.operator_norm()?;
    let fixed_point =
        if (op_norm - 1.0).abs() <= 1e-10 { Some(fixed_point_probe(&op.to_operator(), seeds)?) } else { None };
    let fixed_point_pairs = fixed_point.as_ref().is_some_and(|f| f.nonzero.iter().any(|row| row.iter().any(|&b| b)));

    let levels: Vec<usize> = sched.sizes().iter().copied().filter(|&l| l <= safe_depth).collect();
    let normalized = if levels.len() >= 3 {
        let g = GeneratorSequence::OperatorOrbit { op: op.clone(), seeds: seeds.to_vec() };
        Some(bessel_normalizable_probe(&g, &TruncationSchedule::new(levels)?)?)
    } else {
        None
    };
    let variant_applies = norm_bounded_below || fixed_point_pairs;
    let conclusion_holds =
        !variant_applies || normalized.as_ref().is_some_and(|v| v.classification == Classification::Divergent);
    Ok(CompactReport {
        smallest_singular_value,
        compact_proxy,
        ratios,
        decay_onset,
        regime,
        norm_bounded_below,
        fixed_point,
        fixed_point_pairs,
        normalized,
        variant_applies,
        conclusion_holds,
    })
}

/// `A = diag(1, 1/2, …, 1/d)` with seed `Σ e_k / k`.
pub fn compact_fixed_point(d: usize) -> (OperatorSpec, ComplexVector) {
    let diag: Vec<f64> = (1..=d).map(|k| 1.0 / k as f64).collect();
    let seed = ComplexVector::from_real(&diag);
    (OperatorSpec::CompactDiagonal { diagonal: diag }, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> OperatorSpec {
        OperatorSpec::DiagonalNormal { eigenvalues: v.iter().map(|&x| re(x)).collect() }
    }

    #[test]
    fn iterate_examples() {
        let spec = IterativeSystemSpec::new(diag(&[1.0]), vec![ComplexVector::basis(1, 0)], 3).unwrap();
        let it = iterate(&spec).unwrap();
        assert_eq!(it.sequence.len(), 4);
        assert!(it.sequence.iter().all(|v| *v == ComplexVector::basis(1, 0)));

        let spec = IterativeSystemSpec::new(diag(&[0.5]), vec![ComplexVector::from_real(&[1.0])], 3).unwrap();
        assert_eq!(iterate(&spec).unwrap().sequence.norms(), vec![1.0, 0.5, 0.25, 0.125]);

        let spec =
            IterativeSystemSpec::new(diag(&[0.5, 0.25]), vec![ComplexVector::from_real(&[1.0, 1.0])], 2).unwrap();
        let seq = iterate(&spec).unwrap().sequence;
        let expected = [[1.0, 1.0], [0.5, 0.25], [0.25, 0.0625]];
        for (v, e) in seq.iter().zip(expected) {
            assert_eq!(*v, ComplexVector::from_real(&e));
        }
    }

    #[test]
    fn iterate_truncates_vanishing_orbits() {
        let spec = IterativeSystemSpec::new(diag(&[1e-7]), vec![ComplexVector::from_real(&[1.0])], 5).unwrap();
        let it = iterate(&spec).unwrap();
        assert_eq!(it.sequence.len(), 2);
        assert_eq!(it.truncated.unwrap().power, 2);
    }

    #[test]
    fn carleson_examples() {
        let r = carleson_product(&[re(0.3)], 1).unwrap();
        assert_eq!(r.inf_value, 1.0);
        let r = carleson_product(&[re(0.5), re(0.75)], 2).unwrap();
        assert!((r.inf_value - 0.4).abs() < 1e-12);
        assert!((r.products[0] - 0.4).abs() < 1e-12 && (r.products[1] - 0.4).abs() < 1e-12);
        assert!(matches!(carleson_product(&[re(1.0)], 1), Err(FrameError::ModulusOutOfRange { .. })));
        assert!(matches!(
            carleson_product(&[re(0.5), re(0.5)], 2),
            Err(FrameError::RepeatedEigenvalue { first: 0, second: 1 })
        ));
    }

    #[test]
    fn thm313_small_system() {
        let spec = build_thm313_system(2).unwrap();
        let OperatorSpec::SelfAdjointSpectral { eigenvalues } = &spec.op else { panic!() };
        assert_eq!(eigenvalues, &vec![0.5, 0.75]);
        let s = &spec.seeds[0];
        assert!((s.get(0).re - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((s.get(1).re - 7f64.sqrt() / 4.0).abs() < 1e-15);
        let t = norm_trajectory(&spec.op, s, 20).unwrap();
        assert_eq!(t.regime, Regime::DecreasingToZero);
        assert!(build_thm313_system(1).is_err());
    }

    #[test]
    fn trajectory_examples() {
        let t = norm_trajectory(&diag(&[2.0]), &ComplexVector::from_real(&[1.0]), 6).unwrap();
        assert_eq!(t.regime, Regime::IncreasingUnbounded);
        assert_eq!(t.k0, Some(0));
        assert_eq!(t.envelope_violation, Some(0.0));
        let t = norm_trajectory(&diag(&[0.5]), &ComplexVector::from_real(&[1.0]), 6).unwrap();
        assert_eq!(t.regime, Regime::DecreasingToZero);
        let t = norm_trajectory(&diag(&[1.0, 0.5]), &ComplexVector::from_real(&[1.0, 1.0]), 10).unwrap();
        assert_eq!(t.regime, Regime::Plateau);
        assert!((t.limit.unwrap() - 1.0).abs() < 1e-15);
        for (n, v) in t.norms.iter().enumerate() {
            assert!((v - (1.0 + 0.25f64.powi(n as i32)).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn lemma57_scalar_equality() {
        assert_eq!(lemma57_check(&diag(&[2.0]), &ComplexVector::from_real(&[1.0]), 0, 8).unwrap(), 0.0);
        let v = lemma57_check(&diag(&[0.5, 2.0]), &ComplexVector::basis(2, 1), 0, 8).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn fixed_point_examples() {
        let seeds = [ComplexVector::from_real(&[1.0, 1.0])];
        let r = fixed_point_probe(&LinearOperator::identity(2), &seeds).unwrap();
        assert_eq!(r.w0.len(), 2);
        assert!(r.adjoint_residual < 1e-12);
        let r = fixed_point_probe(&LinearOperator::diagonal(&[re(1.0), re(0.5)]), &seeds).unwrap();
        assert_eq!(r.w0.len(), 1);
        assert!((r.w0[0].get(0).norm() - 1.0).abs() < 1e-12);
        assert!((r.pairings[0][0].norm() - 1.0).abs() < 1e-12);
        assert!(r.nonzero[0][0]);
        let rot = LinearOperator::new(DMatrix::from_row_slice(2, 2, &[re(0.0), re(-1.0), re(1.0), re(0.0)])).unwrap();
        assert!(fixed_point_probe(&rot, &seeds).unwrap().w0.is_empty());
        let half = LinearOperator::diagonal(&[re(0.5)]);
        assert!(matches!(fixed_point_probe(&half, &[]), Err(FrameError::NormNotOne { .. })));
    }

    #[test]
    fn compact_examples() {
        let (op, seed) = compact_fixed_point(32);
        let r = compact_iteration_probe(&op, &[seed], &TruncationSchedule::default()).unwrap();
        assert!(r.fixed_point_pairs && r.norm_bounded_below && r.variant_applies);
        let v = r.normalized.unwrap();
        assert_eq!(v.classification, Classification::Divergent);
        assert!((v.growth_exponent.unwrap() - 1.0).abs() < 0.1);
        assert!(r.conclusion_holds);

        let halves: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
        let op = OperatorSpec::CompactDiagonal { diagonal: halves };
        let r = compact_iteration_probe(&op, &[ComplexVector::from_real(&[1.0; 8])], &TruncationSchedule::default())
            .unwrap();
        assert_eq!(r.decay_onset, Some(0));
        assert_eq!(r.regime, Regime::DecreasingToZero);
        assert!(!r.variant_applies);
    }

    #[test]
    fn witness_rejects_constant_norms() {
        let kind = WitnessKind::VanishingNorms { subspace: SubspaceRule::Ambient };
        let err =
            nonnormalizability_witness(&GeneratorSequence::OrthonormalBasis, kind, &TruncationSchedule::default())
                .unwrap_err();
        assert!(matches!(err, FrameError::HypothesisFailed(_)));
    }
}
