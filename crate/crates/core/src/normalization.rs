//! Normalization, rescaling and the truncation probes that stand in for
//! statements about infinite sequences.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{FrameError, Result};
use crate::frame::{bounds_from_spectrum, frame_bounds, frame_spectrum, projected_delta_coordinates, AnalysisMatrix};
use crate::generator::GeneratorSequence;
use crate::hilbert::{inner, singular_values, ComplexVector, VectorSequence, C64};
use crate::tol;

/// Strictly increasing truncation levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationSchedule {
    sizes: Vec<usize>,
}

impl Serialize for TruncationSchedule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.sizes.serialize(s)
    }
}

impl TruncationSchedule {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 3 {
            return Err(FrameError::ParamValidation(format!("a schedule needs at least 3 sizes, got {}", sizes.len())));
        }
        if sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FrameError::ParamValidation(format!("schedule {sizes:?} is not strictly increasing from 1")));
        }
        Ok(Self { sizes })
    }

    /// `n0 · 2^k` for `k = 0..=k_max`.
    pub fn geometric(n0: usize, k_max: u32) -> Self {
        Self::new((0..=k_max).map(|k| n0 << k).collect()).expect("geometric schedule with n0 >= 1 and k_max >= 2")
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn max(&self) -> usize {
        *self.sizes.last().expect("nonempty")
    }

    pub fn min(&self) -> usize {
        self.sizes[0]
    }
}

impl Default for TruncationSchedule {
    fn default() -> Self {
        Self::geometric(8, 5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    Bounded,
    Divergent,
    Inconclusive,
}

/// A bound traced over a schedule and its classification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceVerdict {
    /// `(level, value)` pairs. When `inverted`, classification runs on
    /// `1/value`, so a lower bound collapsing to zero reads as Divergent.
    pub trace: Vec<(usize, f64)>,
    pub inverted: bool,
    pub classification: Classification,
    /// Least-squares slope of `log value` against `log level` over finite,
    /// positive entries of the classified trace.
    pub growth_exponent: Option<f64>,
    /// Last traced value (uninverted).
    pub limit_estimate: Option<f64>,
}

fn relative_increment(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a == 0.0 || !a.is_finite() || !b.is_finite() {
        f64::INFINITY
    } else {
        (b - a).abs() / a.abs()
    }
}

/// Thresholds used to classify a trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerdictRule {
    /// Largest relative step still counted as a plateau.
    pub plateau_tol: f64,
    /// Growth ratio, last over first, needed for Divergent.
    pub divergence_factor: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        Self { plateau_tol: tol::PLATEAU_TOL, divergence_factor: tol::DIVERGENCE_FACTOR }
    }
}

impl DivergenceVerdict {
    pub fn classify(trace: Vec<(usize, f64)>, inverted: bool) -> Self {
        Self::classify_with(trace, inverted, &VerdictRule::default())
    }

    pub fn classify_with(trace: Vec<(usize, f64)>, inverted: bool, rule: &VerdictRule) -> Self {
        let values: Vec<f64> = trace
            .iter()
            .map(|&(_, v)| {
                if inverted {
                    if v > 0.0 {
                        1.0 / v
                    } else {
                        f64::INFINITY
                    }
                } else {
                    v
                }
            })
            .collect();
        let classification = classify_values(&values, rule);
        let points: Vec<(f64, f64)> = trace
            .iter()
            .zip(&values)
            .filter(|(_, v)| v.is_finite() && **v > 0.0)
            .map(|(&(n, _), v)| ((n as f64).ln(), v.ln()))
            .collect();
        DivergenceVerdict {
            growth_exponent: least_squares_slope(&points),
            limit_estimate: trace.last().map(|&(_, v)| v),
            trace,
            inverted,
            classification,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.classification == Classification::Bounded
    }

    pub fn is_divergent(&self) -> bool {
        self.classification == Classification::Divergent
    }

    pub fn values(&self) -> Vec<f64> {
        self.trace.iter().map(|&(_, v)| v).collect()
    }
}

fn classify_values(values: &[f64], rule: &VerdictRule) -> Classification {
    let k = values.len();
    if k < 3 || values.iter().any(|v| v.is_nan()) {
        return Classification::Inconclusive;
    }
    let plateau = relative_increment(values[k - 3], values[k - 2]) <= rule.plateau_tol
        && relative_increment(values[k - 2], values[k - 1]) <= rule.plateau_tol;
    if plateau {
        return Classification::Bounded;
    }
    let monotone = values.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let (first, last) = (values[0], values[k - 1]);
    let ratio = if first > 0.0 {
        last / first
    } else if last > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    if monotone && ratio >= rule.divergence_factor {
        Classification::Divergent
    } else {
        Classification::Inconclusive
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// `x_n / ‖x_n‖`. Vectors already of unit norm up to rounding are kept
/// bit-for-bit, which makes the map idempotent.
pub fn normalize(x: &VectorSequence) -> VectorSequence {
    let vectors = x
        .iter()
        .map(|v| {
            let n = v.norm();
            if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
                v.clone()
            } else {
                v.scaled_real(1.0 / n)
            }
        })
        .collect();
    VectorSequence::new(x.ambient_dim(), vectors, x.label().to_string()).expect("rescaled nonzero vectors stay nonzero")
}

/// `c_n x_n`.
pub fn diag_rescale(x: &VectorSequence, c: &[C64]) -> Result<VectorSequence> {
    if c.len() != x.len() {
        return Err(FrameError::LengthMismatch { expected: x.len(), found: c.len() });
    }
    if let Some(index) = c.iter().position(|z| z.norm() == 0.0) {
        return Err(FrameError::ZeroScalar { index });
    }
    let vectors = x.iter().zip(c).map(|(v, s)| v.scaled(*s)).collect();
    VectorSequence::new(x.ambient_dim(), vectors, x.label().to_string())
}

/// Trace `f(materialize_level(level))` over the schedule, in parallel.
pub fn probe_trace<F>(g: &GeneratorSequence, sched: &TruncationSchedule, f: F) -> Result<Vec<(usize, f64)>>
where
    F: Fn(&VectorSequence) -> Result<f64> + Sync,
{
    sched.sizes().par_iter().map(|&level| Ok((level, f(&g.materialize_level(level)?)?))).collect()
}

fn upper_of(x: &VectorSequence) -> Result<f64> {
    Ok(frame_bounds(x)?.upper_opt)
}

fn lower_of(x: &VectorSequence, ambient: bool) -> Result<f64> {
    let b = frame_bounds(x)?;
    Ok(if ambient { b.ambient_lower } else { b.lower_opt })
}

/// Upper frame bound of the normalized truncations.
pub fn bessel_normalizable_probe(g: &GeneratorSequence, sched: &TruncationSchedule) -> Result<DivergenceVerdict> {
    let trace = probe_trace(g, sched, |x| upper_of(&normalize(x)))?;
    Ok(DivergenceVerdict::classify(trace, false))
}

/// Lower frame bound of the normalized truncations (ambient space for
/// complete families, span otherwise), classified on its reciprocal.
pub fn lower_normalizable_probe(g: &GeneratorSequence, sched: &TruncationSchedule) -> Result<DivergenceVerdict> {
    let ambient = g.complete_for_ambient();
    let trace = probe_trace(g, sched, |x| lower_of(&normalize(x), ambient))?;
    Ok(DivergenceVerdict::classify(trace, true))
}

/// Upper frame bound of the raw truncations.
pub fn bessel_probe(g: &GeneratorSequence, sched: &TruncationSchedule) -> Result<DivergenceVerdict> {
    let trace = probe_trace(g, sched, upper_of)?;
    Ok(DivergenceVerdict::classify(trace, false))
}

/// Lower frame bound of the raw truncations, classified on its reciprocal.
pub fn lower_probe(g: &GeneratorSequence, sched: &TruncationSchedule) -> Result<DivergenceVerdict> {
    let ambient = g.complete_for_ambient();
    let trace = probe_trace(g, sched, |x| lower_of(x, ambient))?;
    Ok(DivergenceVerdict::classify(trace, true))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    Constant,
    NonIncreasing,
    NonDecreasing,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormProfile {
    pub inf: f64,
    pub sup: f64,
    pub monotonicity: Monotonicity,
}

impl NormProfile {
    pub fn of(x: &VectorSequence) -> Self {
        let norms = x.norms();
        let inf = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let sup = norms.iter().copied().fold(0.0, f64::max);
        let up = norms.windows(2).all(|w| w[1] >= w[0]);
        let down = norms.windows(2).all(|w| w[1] <= w[0]);
        let monotonicity = match (up, down) {
            (true, true) => Monotonicity::Constant,
            (false, true) => Monotonicity::NonIncreasing,
            (true, false) => Monotonicity::NonDecreasing,
            (false, false) => Monotonicity::Mixed,
        };
        Self { inf, sup, monotonicity }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizabilityReport {
    pub bessel: DivergenceVerdict,
    pub lower: DivergenceVerdict,
    pub frame_normalizable: bool,
    /// Norms of the largest truncation.
    pub norm_profile: NormProfile,
}

pub fn normalizability_report(g: &GeneratorSequence, sched: &TruncationSchedule) -> Result<NormalizabilityReport> {
    let bessel = bessel_normalizable_probe(g, sched)?;
    let lower = lower_normalizable_probe(g, sched)?;
    let norm_profile = NormProfile::of(&g.materialize_level(sched.max())?);
    Ok(NormalizabilityReport {
        frame_normalizable: bessel.is_bounded() && lower.is_bounded(),
        bessel,
        lower,
        norm_profile,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Category {
    A,
    B,
    #[serde(rename = "C-candidate")]
    CCandidate,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellBounds {
    /// Norm window `[lo, hi)`.
    pub lo: f64,
    pub hi: f64,
    pub size: usize,
    /// Span bounds of the shell at the largest truncation.
    pub lower: f64,
    pub upper: f64,
    pub lower_verdict: Classification,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryReport {
    /// Category of the generator, judged from schedule trends.
    pub category: Category,
    /// Category of the largest finite materialization on its own.
    pub finite_category: Category,
    pub delta_thresholds: Vec<f64>,
    /// The threshold that separated the two parts, for category B.
    pub split_delta: Option<f64>,
    pub min_norm_trace: Vec<(usize, f64)>,
    pub sub_bounds: Vec<ShellBounds>,
}

/// Deciles of the observed norm distribution, distinct and descending.
pub fn default_delta_grid(x: &VectorSequence) -> Vec<f64> {
    let mut norms = x.norms();
    norms.sort_by(f64::total_cmp);
    let mut grid: Vec<f64> = (1..10).map(|q| norms[((q * norms.len()) / 10).min(norms.len() - 1)]).collect();
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.dedup();
    grid
}

fn shell(x: &VectorSequence, lo: f64, hi: f64) -> Option<VectorSequence> {
    let idx: Vec<usize> = x.norms().iter().enumerate().filter(|(_, &n)| n >= lo && n < hi).map(|(i, _)| i).collect();
    (!idx.is_empty()).then(|| x.select(&idx))
}

/// Span lower bound of the shell `lo ≤ ‖x_n‖ < hi` traced over the schedule,
/// or `None` if the shell is empty at some level.
fn shell_lower_verdict(
    g: &GeneratorSequence,
    sched: &TruncationSchedule,
    lo: f64,
    hi: f64,
) -> Result<Option<DivergenceVerdict>> {
    let trace: Vec<Option<(usize, f64)>> = sched
        .sizes()
        .par_iter()
        .map(|&level| {
            let x = g.materialize_level(level)?;
            match shell(&x, lo, hi) {
                Some(s) => Ok(Some((level, frame_bounds(&s)?.lower_opt))),
                None => Ok(None),
            }
        })
        .collect::<Result<_>>()?;
    Ok(trace.into_iter().collect::<Option<Vec<_>>>().map(|t| DivergenceVerdict::classify(t, true)))
}

/// Trichotomy classifier over shells of the norm distribution.
pub fn classify_category(
    g: &GeneratorSequence,
    sched: &TruncationSchedule,
    grid: Option<&[f64]>,
) -> Result<CategoryReport> {
    let bessel = bessel_normalizable_probe(g, sched)?;
    if !bessel.is_bounded() {
        return Err(FrameError::PreconditionFailed(format!(
            "normalized Bessel probe is {:?}, not Bounded",
            bessel.classification
        )));
    }
    let min_norm_trace = probe_trace(g, sched, |x| {
        let b = frame_bounds(x)?;
        if b.rank == 0 {
            return Err(FrameError::NotFrameSequence { lower: 0.0 });
        }
        Ok(x.norms().into_iter().fold(f64::INFINITY, f64::min))
    })?;
    let largest = g.materialize_level(sched.max())?;
    let delta_thresholds = match grid {
        Some(d) => {
            let mut d = d.to_vec();
            d.sort_by(|a, b| b.total_cmp(a));
            d.dedup();
            d
        }
        None => default_delta_grid(&largest),
    };
    let last_min = min_norm_trace.last().map_or(0.0, |p| p.1);
    let finite_category = if last_min >= tol::NBB_TOL { Category::A } else { Category::Unknown };
    let inf_trend = DivergenceVerdict::classify(min_norm_trace.clone(), true);

    // per-shell bounds at the largest truncation, between consecutive thresholds
    let mut edges = vec![f64::INFINITY];
    edges.extend(delta_thresholds.iter().copied());
    edges.push(0.0);
    let mut sub_bounds = Vec::new();
    for w in edges.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        if let Some(s) = shell(&largest, lo, hi) {
            let b = frame_bounds(&s)?;
            let verdict = shell_lower_verdict(g, sched, lo, hi)?;
            sub_bounds.push(ShellBounds {
                lo,
                hi,
                size: s.len(),
                lower: b.lower_opt,
                upper: b.upper_opt,
                lower_verdict: verdict.map_or(Classification::Inconclusive, |v| v.classification),
            });
        }
    }

    let mut split_delta = None;
    let category = if inf_trend.is_bounded() && last_min >= tol::NBB_TOL {
        Category::A
    } else {
        for &delta in &delta_thresholds {
            let high = shell_lower_verdict(g, sched, delta, f64::INFINITY)?;
            let low = shell_lower_verdict(g, sched, 0.0, delta)?;
            if let (Some(h), Some(l)) = (high, low) {
                if h.is_bounded() && l.is_divergent() {
                    split_delta = Some(delta);
                    break;
                }
            }
        }
        if split_delta.is_some() {
            Category::B
        } else {
            let stable = sub_bounds.len() >= 2 && sub_bounds.iter().all(|s| s.lower_verdict == Classification::Bounded);
            let uppers_shrink = sub_bounds.windows(2).all(|w| w[1].upper <= w[0].upper);
            if stable && uppers_shrink {
                Category::CCandidate
            } else {
                Category::Unknown
            }
        }
    };
    Ok(CategoryReport { category, finite_category, delta_thresholds, split_delta, min_norm_trace, sub_bounds })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalDecompositionReport {
    pub is_orthogonal: bool,
    pub max_inter_block: f64,
    pub sup_dim: usize,
    pub sup_card: usize,
    pub predicted_bessel_bound: f64,
    pub normalized_upper: f64,
    /// `normalized_upper ≤ sup_card + 1e-8`; only meaningful when orthogonal.
    pub bound_holds: bool,
}

pub fn orthogonal_decomposition_check(
    x: &VectorSequence,
    blocks: &[Vec<usize>],
) -> Result<OrthogonalDecompositionReport> {
    let mut owner = vec![usize::MAX; x.len()];
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(FrameError::NotPartition(format!("block {b} is empty")));
        }
        for &i in block {
            if i >= x.len() {
                return Err(FrameError::NotPartition(format!("index {i} outside 0..{}", x.len())));
            }
            if owner[i] != usize::MAX {
                return Err(FrameError::NotPartition(format!("index {i} appears in blocks {} and {b}", owner[i])));
            }
            owner[i] = b;
        }
    }
    if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(FrameError::NotPartition(format!("index {i} belongs to no block")));
    }
    // inner products only need checking between vectors of overlapping support
    let supports: Vec<BTreeSet<usize>> = x
        .iter()
        .map(|v| v.components().iter().enumerate().filter(|(_, z)| z.norm() != 0.0).map(|(i, _)| i).collect())
        .collect();
    let mut max_inter_block: f64 = 0.0;
    for m in 0..x.len() {
        for n in (m + 1)..x.len() {
            if owner[m] != owner[n] && !supports[m].is_disjoint(&supports[n]) {
                max_inter_block = max_inter_block.max(inner(x.get(m), x.get(n))?.norm());
            }
        }
    }
    let mut sup_dim = 0;
    for block in blocks {
        let sub = x.select(block);
        sup_dim = sup_dim.max(frame_bounds(&sub)?.rank);
    }
    let sup_card = blocks.iter().map(Vec::len).max().unwrap_or(0);
    let normalized_upper = frame_bounds(&normalize(x))?.upper_opt;
    Ok(OrthogonalDecompositionReport {
        is_orthogonal: max_inter_block <= 1e-10,
        max_inter_block,
        sup_dim,
        sup_card,
        predicted_bessel_bound: sup_card as f64,
        normalized_upper,
        bound_holds: normalized_upper <= sup_card as f64 + 1e-8,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IcrReport {
    /// Smallest singular value of `D_α` on the range of the analysis matrix.
    pub icr_constant: f64,
    pub range_contained: bool,
    pub normalized_lower: f64,
    pub upper: f64,
    /// `icr_constant² ≥ normalized_lower / upper − 1e-8`
    pub consistent: bool,
}

pub fn icr_check(x: &VectorSequence) -> Result<IcrReport> {
    let spec = frame_spectrum(x)?;
    let bounds = bounds_from_spectrum(&spec);
    if bounds.rank == 0 {
        return Err(FrameError::NotFrameSequence { lower: 0.0 });
    }
    let cutoff = tol::RANK_REL * bounds.upper_opt;
    let c = AnalysisMatrix::of(x);
    let keep: Vec<usize> = (0..spec.dim()).filter(|&k| spec.eigenvalues[k] > cutoff).collect();
    // D_α C V_r Λ_r^{-1/2}: D_α applied to an orthonormal basis of range(C)
    let mut m = nalgebra::DMatrix::<C64>::zeros(x.len(), keep.len());
    for (j, &k) in keep.iter().enumerate() {
        let col = c.apply(&spec.eigenvectors[k])? / C64::new(spec.eigenvalues[k].sqrt(), 0.0);
        m.set_column(j, &col);
    }
    for (n, norm) in x.norms().into_iter().enumerate() {
        let a = C64::new(1.0 / norm, 0.0);
        for z in m.row_mut(n).iter_mut() {
            *z *= a;
        }
    }
    let icr_constant = singular_values(&m)?.last().copied().unwrap_or(0.0);
    let normalized_lower = frame_bounds(&normalize(x))?.lower_opt;
    Ok(IcrReport {
        icr_constant,
        range_contained: true,
        normalized_lower,
        upper: bounds.upper_opt,
        consistent: icr_constant * icr_constant >= normalized_lower / bounds.upper_opt - 1e-8,
    })
}

/// Bessel probe of the normalized `{P_S δ_n}` per truncation.
pub fn psdelta_probe(g: &GeneratorSequence, sched: &TruncationSchedule) -> Result<DivergenceVerdict> {
    let trace = probe_trace(g, sched, |x| upper_of(&normalize(&projected_delta_coordinates(x)?)))?;
    Ok(DivergenceVerdict::classify(trace, false))
}

/// Shorthand for the `(0,0)` entry of the normalized frame operator: the
/// `e_1`-mass `Σ |⟨e_1, x_n/‖x_n‖⟩|²`.
pub fn normalized_e1_mass(x: &VectorSequence) -> f64 {
    let e1 = ComplexVector::basis(x.ambient_dim(), 0);
    normalize(x).iter().map(|v| inner(&e1, v).map_or(0.0, |z| z.norm_sqr())).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, eps: f64) -> bool {
        (a - b).abs() <= eps
    }

    #[test]
    fn schedule_validation() {
        assert_eq!(TruncationSchedule::default().sizes(), &[8, 16, 32, 64, 128, 256]);
        assert!(TruncationSchedule::new(vec![1, 2]).is_err());
        assert!(TruncationSchedule::new(vec![1, 3, 3]).is_err());
        assert!(TruncationSchedule::new(vec![0, 3, 4]).is_err());
    }

    #[test]
    fn verdict_rules() {
        let t = |v: &[f64]| v.iter().enumerate().map(|(i, &x)| (8usize << i, x)).collect::<Vec<_>>();
        let lin = DivergenceVerdict::classify(t(&[8.0, 16.0, 32.0, 64.0]), false);
        assert_eq!(lin.classification, Classification::Divergent);
        assert!(close(lin.growth_exponent.unwrap(), 1.0, 1e-12));
        let flat = DivergenceVerdict::classify(t(&[2.0, 2.0, 2.0]), false);
        assert_eq!(flat.classification, Classification::Bounded);
        assert_eq!(flat.limit_estimate, Some(2.0));
        let wobble = DivergenceVerdict::classify(t(&[1.0, 3.0, 2.0, 5.0]), false);
        assert_eq!(wobble.classification, Classification::Inconclusive);
        let collapse = DivergenceVerdict::classify(t(&[1.0, 0.5, 0.1, 0.0]), true);
        assert_eq!(collapse.classification, Classification::Divergent);
        let zeros = DivergenceVerdict::classify(t(&[0.0, 0.0, 0.0]), false);
        assert_eq!(zeros.classification, Classification::Bounded);
    }

    #[test]
    fn normalize_examples() {
        let x = VectorSequence::from_real_rows(2, &[&[2.0, 0.0], &[0.0, 3.0]], "x").unwrap();
        let n = normalize(&x);
        assert_eq!(n.vectors(), VectorSequence::orthonormal_basis(2).vectors());
        let ex = GeneratorSequence::ExactBessel.materialize(5).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (i, v) in normalize(&ex).iter().enumerate() {
            let mut target = vec![0.0; 6];
            target[0] = h;
            target[i + 1] = h;
            assert!(v.max_abs_diff(&ComplexVector::from_real(&target)) < 1e-15);
        }
        let once = normalize(&ex);
        assert_eq!(normalize(&once), once);
    }

    #[test]
    fn rescale_examples() {
        let x = GeneratorSequence::BasisWithScaledCopies.materialize(8).unwrap();
        let ones = vec![C64::new(1.0, 0.0); 8];
        assert_eq!(diag_rescale(&x, &ones).unwrap(), x);
        let inv: Vec<C64> = x.norms().iter().map(|n| C64::new(1.0 / n, 0.0)).collect();
        let r = diag_rescale(&x, &inv).unwrap();
        for (a, b) in r.iter().zip(normalize(&x).iter()) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }
        let mut bad = ones.clone();
        bad[3] = C64::new(0.0, 0.0);
        assert_eq!(diag_rescale(&x, &bad).unwrap_err(), FrameError::ZeroScalar { index: 3 });
        assert!(matches!(diag_rescale(&x, &ones[..3]), Err(FrameError::LengthMismatch { .. })));
    }

    #[test]
    fn probe_examples() {
        let sched = TruncationSchedule::default();
        let ex32 = bessel_normalizable_probe(&GeneratorSequence::BasisWithScaledCopies, &sched).unwrap();
        assert_eq!(ex32.classification, Classification::Bounded);
        assert!(close(ex32.limit_estimate.unwrap(), 2.0, 1e-12));

        let blocks = GeneratorSequence::ScaledRepeatedBlocks { whole_blocks: true };
        let v = bessel_normalizable_probe(&blocks, &blocks.default_schedule()).unwrap();
        assert_eq!(v.classification, Classification::Divergent);
        for &(k, b) in &v.trace {
            assert!(close(b, k as f64, 1e-9));
        }
        assert!(close(v.growth_exponent.unwrap(), 1.0, 0.1));

        let eb = bessel_normalizable_probe(&GeneratorSequence::ExactBessel, &sched).unwrap();
        assert_eq!(eb.classification, Classification::Divergent);
        assert!(close(eb.growth_exponent.unwrap(), 1.0, 0.1));

        let onb = lower_normalizable_probe(&GeneratorSequence::OrthonormalBasis, &sched).unwrap();
        assert_eq!(onb.classification, Classification::Bounded);
        let grow = lower_normalizable_probe(&GeneratorSequence::PowerScaledBasis { power: 1.0 }, &sched).unwrap();
        assert_eq!(grow.classification, Classification::Bounded);
        assert!(close(grow.limit_estimate.unwrap(), 1.0, 1e-12));
        let ex32_low = lower_normalizable_probe(&GeneratorSequence::BasisWithScaledCopies, &sched).unwrap();
        assert!(close(ex32_low.limit_estimate.unwrap(), 2.0, 1e-12));
    }

    #[test]
    fn category_examples() {
        let sched = TruncationSchedule::default();
        let r = classify_category(&GeneratorSequence::BasisWithScaledCopies, &sched, None).unwrap();
        assert_eq!(r.category, Category::B);
        assert_eq!(r.finite_category, Category::A);
        let r = classify_category(&GeneratorSequence::RepeatedBasis { copies: 2 }, &sched, None).unwrap();
        assert_eq!(r.category, Category::A);
        let blocks = GeneratorSequence::ScaledRepeatedBlocks { whole_blocks: true };
        let err = classify_category(&blocks, &blocks.default_schedule(), None).unwrap_err();
        assert!(matches!(err, FrameError::PreconditionFailed(_)));
    }

    #[test]
    fn orthogonal_decomposition_examples() {
        let onb = VectorSequence::orthonormal_basis(5);
        let blocks: Vec<Vec<usize>> = (0..5).map(|i| vec![i]).collect();
        let r = orthogonal_decomposition_check(&onb, &blocks).unwrap();
        assert!(r.is_orthogonal && r.sup_card == 1 && close(r.normalized_upper, 1.0, 1e-12));

        let g = GeneratorSequence::Orthoblock { per_block: 3, width: 2, norm_lo: 0.5, norm_hi: 2.0, seed: 7 };
        let x = g.materialize(30).unwrap();
        let r = orthogonal_decomposition_check(&x, &g.blocks(30).unwrap()).unwrap();
        assert!(r.is_orthogonal);
        assert_eq!(r.max_inter_block, 0.0);
        assert_eq!((r.sup_card, r.sup_dim), (3, 2));
        assert!(r.bound_holds);

        let bad = vec![vec![0, 1], vec![1, 2, 3, 4]];
        assert!(matches!(orthogonal_decomposition_check(&onb, &bad), Err(FrameError::NotPartition(_))));
    }

    #[test]
    fn icr_examples() {
        let r = icr_check(&VectorSequence::orthonormal_basis(3)).unwrap();
        assert!(close(r.icr_constant, 1.0, 1e-12));
        let x = VectorSequence::from_real_rows(2, &[&[2.0, 0.0], &[0.0, 1.0]], "x").unwrap();
        let r = icr_check(&x).unwrap();
        assert!(close(r.icr_constant, 0.5, 1e-12));
        assert!(r.consistent && r.range_contained);
    }

    #[test]
    fn psdelta_matches_direct_probe() {
        let sched = TruncationSchedule::default();
        let onb = psdelta_probe(&GeneratorSequence::OrthonormalBasis, &sched).unwrap();
        assert_eq!(onb.classification, Classification::Bounded);
        assert!(close(onb.limit_estimate.unwrap(), 1.0, 1e-10));
        let ex32 = psdelta_probe(&GeneratorSequence::BasisWithScaledCopies, &sched).unwrap();
        assert_eq!(ex32.classification, Classification::Bounded);
        let blocks = GeneratorSequence::ScaledRepeatedBlocks { whole_blocks: true };
        let v = psdelta_probe(&blocks, &blocks.default_schedule()).unwrap();
        assert_eq!(v.classification, Classification::Divergent);
    }

    #[test]
    fn e1_mass_of_exact_bessel() {
        for n in [8, 64] {
            let x = GeneratorSequence::ExactBessel.materialize(n).unwrap();
            assert!(close(normalized_e1_mass(&x), n as f64 / 2.0, 1e-10));
        }
    }
}
