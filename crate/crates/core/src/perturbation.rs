//! Paley–Wiener type perturbation checks and the guaranteed frame bounds
//! they imply.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frame::{frame_bounds, FrameBounds};
use crate::generator::GeneratorSequence;
use crate::hilbert::{re, svd, ComplexVector, SvdData, VectorSequence, C64};
use crate::normalization::{diag_rescale, normalize, probe_trace, DivergenceVerdict, TruncationSchedule};
use crate::random;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbationParams {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
}

impl PerturbationParams {
    pub fn new(lambda: f64, mu: f64, nu: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("mu", mu), ("nu", nu)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(FrameError::ParamValidation(format!(
                    "{name} must be a finite non-negative number, got {v}"
                )));
            }
        }
        Ok(Self { lambda, mu, nu })
    }

    /// `max(λ + μ/√A, ν) < 1`.
    pub fn admissible_for(&self, a: f64) -> bool {
        a > 0.0 && (self.lambda + self.mu / a.sqrt()).max(self.nu) < 1.0
    }
}

/// `A(1 − (λ+ν+μ/√A)/(1+ν))²` and `B(1 + (λ+ν+μ/√B)/(1−ν))²`.
pub fn guaranteed_bounds(a: f64, b: f64, p: &PerturbationParams) -> Result<(f64, f64)> {
    if !(a > 0.0 && b >= a) {
        return Err(FrameError::ParamValidation(format!("need 0 < A <= B, got A = {a}, B = {b}")));
    }
    if !p.admissible_for(a) {
        return Err(FrameError::Inadmissible(format!(
            "max(lambda + mu/sqrt(A), nu) = {} is not below 1",
            (p.lambda + p.mu / a.sqrt()).max(p.nu)
        )));
    }
    let lower = a * (1.0 - (p.lambda + p.nu + p.mu / a.sqrt()) / (1.0 + p.nu)).powi(2);
    let upper = b * (1.0 + (p.lambda + p.nu + p.mu / b.sqrt()) / (1.0 - p.nu)).powi(2);
    Ok((lower, upper))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateStatus {
    HoldsExact,
    HoldsSufficient,
    FalsifiedByWitness,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityMode {
    Zero,
    MuOnly,
    LambdaOnly,
    NuOnly,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationCertificate {
    pub status: CertificateStatus,
    pub mode: InequalityMode,
    pub witness: Option<ComplexVector>,
    /// Exact modes: the smallest admissible constant (σ_max(D) for μ, the
    /// generalized-pencil ratio for λ or ν). Sampled modes: the largest
    /// observed `lhs / rhs`.
    pub achieved_ratio: f64,
    /// Only coefficient vectors of the given finite length are quantified.
    pub coefficients: usize,
}

impl PerturbationCertificate {
    pub fn holds(&self) -> bool {
        matches!(self.status, CertificateStatus::HoldsExact | CertificateStatus::HoldsSufficient)
    }
}

pub const FALSIFICATION_SAMPLES: usize = 10_000;
const EXACT_SLACK: f64 = 1e-12;
const WITNESS_MARGIN: f64 = 1e-10;

fn difference_matrix(x: &VectorSequence, y: &VectorSequence) -> Result<DMatrix<C64>> {
    if x.len() != y.len() {
        return Err(FrameError::LengthMismatch { expected: x.len(), found: y.len() });
    }
    if x.ambient_dim() != y.ambient_dim() {
        return Err(FrameError::DimensionMismatch { expected: x.ambient_dim(), found: y.ambient_dim() });
    }
    Ok(x.synthesis_matrix() - y.synthesis_matrix())
}

fn rank_of(s: &SvdData) -> usize {
    let top = s.singular_values.first().copied().unwrap_or(0.0);
    s.singular_values.iter().filter(|&&v| v > 0.0 && v * v > tol::RANK_REL * top * top).count()
}

/// Largest `‖D c‖ / ‖M c‖` over all `c`, with a witness. Infinite when `D`
/// is nonzero somewhere on the kernel of `M`.
fn pencil_ratio(d: &DMatrix<C64>, m: &DMatrix<C64>) -> Result<(f64, DVector<C64>)> {
    let n = m.ncols();
    let s = svd(m)?;
    let r = rank_of(&s);
    let d_scale = d.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    // right singular vectors r.. span ker M (the thin SVD may stop at min(d, N))
    let v = s.v_t.adjoint();
    let kernel_basis = kernel_complement(&v, r, n);
    for col in kernel_basis.column_iter() {
        let dc = d * col;
        if dc.norm() > EXACT_SLACK * d_scale {
            return Ok((f64::INFINITY, col.into_owned()));
        }
    }
    // on the complement c = V_r Σ_r^{-1} z, so ‖M c‖ = ‖z‖
    let mut w = DMatrix::<C64>::zeros(n, r);
    for j in 0..r {
        let f = re(1.0 / s.singular_values[j]);
        w.set_column(j, &(v.column(j) * f));
    }
    let reduced = d * &w;
    let rs = svd(&reduced)?;
    let ratio = rs.singular_values.first().copied().unwrap_or(0.0);
    let z = if r > 0 { rs.v_t.row(0).adjoint() } else { DVector::zeros(0) };
    let c = if r > 0 { &w * z } else { DVector::zeros(n) };
    Ok((ratio, c))
}

/// Orthonormal basis of the orthogonal complement of the first `r` columns
/// of `v` inside `C^n`.
fn kernel_complement(v: &DMatrix<C64>, r: usize, n: usize) -> DMatrix<C64> {
    if r >= n {
        return DMatrix::zeros(n, 0);
    }
    // P = I − V_r V_r^H; its range is the kernel
    let vr = v.columns(0, r);
    let p = DMatrix::<C64>::identity(n, n) - vr * vr.adjoint();
    let s = nalgebra::SVD::new(p, true, false);
    let u = s.u.expect("requested");
    let mut idx: Vec<usize> = (0..s.singular_values.len()).collect();
    idx.sort_by(|&a, &b| s.singular_values[b].total_cmp(&s.singular_values[a]));
    let cols: Vec<_> = idx.into_iter().take(n - r).map(|k| u.column(k).into_owned()).collect();
    DMatrix::from_columns(&cols)
}

/// Decide `‖Σ c_n(x_n − y_n)‖ ≤ λ‖Σ c_n x_n‖ + μ‖c‖ + ν‖Σ c_n y_n‖` for all
/// coefficient vectors of length `N`.
pub fn check_inequality_41(
    x: &VectorSequence,
    y: &VectorSequence,
    p: &PerturbationParams,
    seed: u64,
) -> Result<PerturbationCertificate> {
    let d = difference_matrix(x, y)?;
    let n = x.len();
    let ds = svd(&d)?;
    let d_max = ds.singular_values.first().copied().unwrap_or(0.0);
    let cert = |status, mode, witness: Option<DVector<C64>>, achieved_ratio| PerturbationCertificate {
        status,
        mode,
        witness: witness.map(ComplexVector::from_dvector),
        achieved_ratio,
        coefficients: n,
    };
    let zero = |v: f64| v == 0.0;
    let mode = match (zero(p.lambda), zero(p.mu), zero(p.nu)) {
        (true, true, true) => InequalityMode::Zero,
        (true, false, true) => InequalityMode::MuOnly,
        (false, true, true) => InequalityMode::LambdaOnly,
        (true, true, false) => InequalityMode::NuOnly,
        _ => InequalityMode::Mixed,
    };
    if d_max == 0.0 {
        return Ok(cert(CertificateStatus::HoldsExact, mode, None, 0.0));
    }
    let top_c = ds.right_vector(0).into_dvector();
    match mode {
        InequalityMode::Zero => Ok(cert(CertificateStatus::FalsifiedByWitness, mode, Some(top_c), f64::INFINITY)),
        InequalityMode::MuOnly => {
            if d_max <= p.mu + EXACT_SLACK {
                Ok(cert(CertificateStatus::HoldsExact, mode, None, d_max))
            } else {
                Ok(cert(CertificateStatus::FalsifiedByWitness, mode, Some(top_c), d_max))
            }
        }
        InequalityMode::LambdaOnly | InequalityMode::NuOnly => {
            let (m, bound) = if mode == InequalityMode::LambdaOnly {
                (x.synthesis_matrix(), p.lambda)
            } else {
                (y.synthesis_matrix(), p.nu)
            };
            let (ratio, c) = pencil_ratio(&d, &m)?;
            if ratio <= bound + EXACT_SLACK {
                Ok(cert(CertificateStatus::HoldsExact, mode, None, ratio))
            } else {
                Ok(cert(CertificateStatus::FalsifiedByWitness, mode, Some(c), ratio))
            }
        }
        InequalityMode::Mixed => mixed_certificate(x, y, &d, &ds, p, seed),
    }
}

fn smallest_singular_over_coefficients(m: &DMatrix<C64>) -> Result<f64> {
    // over all of C^N: zero when M has a kernel
    if m.ncols() > m.nrows() {
        return Ok(0.0);
    }
    Ok(svd(m)?.singular_values.last().copied().unwrap_or(0.0))
}

fn mixed_certificate(
    x: &VectorSequence,
    y: &VectorSequence,
    d: &DMatrix<C64>,
    ds: &SvdData,
    p: &PerturbationParams,
    seed: u64,
) -> Result<PerturbationCertificate> {
    let n = x.len();
    let xm = x.synthesis_matrix();
    let ym = y.synthesis_matrix();
    let d_max = ds.singular_values[0];
    let floor =
        p.lambda * smallest_singular_over_coefficients(&xm)? + p.mu + p.nu * smallest_singular_over_coefficients(&ym)?;
    if d_max <= floor + EXACT_SLACK {
        return Ok(PerturbationCertificate {
            status: CertificateStatus::HoldsSufficient,
            mode: InequalityMode::Mixed,
            witness: None,
            achieved_ratio: if floor > 0.0 { d_max / floor } else { 0.0 },
            coefficients: n,
        });
    }
    let evaluate = |c: &DVector<C64>| -> (f64, f64) {
        let lhs = (d * c).norm();
        let rhs = p.lambda * (&xm * c).norm() + p.mu * c.norm() + p.nu * (&ym * c).norm();
        (lhs, rhs)
    };
    let mut candidates: Vec<DVector<C64>> = Vec::new();
    for m in [d, &xm, &ym] {
        let s = svd(m)?;
        candidates.push(s.right_vector(0).into_dvector());
        let last = s.singular_values.len() - 1;
        candidates.push(s.right_vector(last).into_dvector());
    }
    const BATCH: usize = 1_000;
    let batches = FALSIFICATION_SAMPLES / BATCH;
    let sampled: Vec<DVector<C64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = random::rng(random::derive_seed(seed, b as u64));
            (0..BATCH).map(|_| random::unit_vector(&mut rng, n).into_dvector()).collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    candidates.extend(sampled);
    let mut worst_ratio: f64 = 0.0;
    let mut witness = None;
    let mut worst_gap = WITNESS_MARGIN;
    for c in &candidates {
        let (lhs, rhs) = evaluate(c);
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst_ratio = worst_ratio.max(ratio);
        if lhs - rhs > worst_gap {
            worst_gap = lhs - rhs;
            witness = Some(c.clone());
        }
    }
    let status = if witness.is_some() { CertificateStatus::FalsifiedByWitness } else { CertificateStatus::Undecided };
    Ok(PerturbationCertificate {
        status,
        mode: InequalityMode::Mixed,
        witness: witness.map(ComplexVector::from_dvector),
        achieved_ratio: worst_ratio,
        coefficients: n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub certificate: PerturbationCertificate,
    pub x_bounds: FrameBounds,
    pub guaranteed: (f64, f64),
    pub actual: (f64, f64),
    /// `actual lower − guaranteed lower`
    pub lower_slack: f64,
    /// `guaranteed upper − actual upper`
    pub upper_slack: f64,
    pub contained: bool,
}

/// Check the hypotheses, then compare the guaranteed interval with the
/// ambient bounds of `Y`.
pub fn verify_perturbation(
    x: &VectorSequence,
    y: &VectorSequence,
    p: &PerturbationParams,
    seed: u64,
) -> Result<PerturbationReport> {
    let x_bounds = frame_bounds(x)?;
    if !x_bounds.is_frame_for_ambient {
        return Err(FrameError::HypothesisFailed("X is not a frame for the ambient space".into()));
    }
    if !p.admissible_for(x_bounds.ambient_lower) {
        return Err(FrameError::HypothesisFailed(format!(
            "parameters are not admissible for A = {}",
            x_bounds.ambient_lower
        )));
    }
    let certificate = check_inequality_41(x, y, p, seed)?;
    if !certificate.holds() {
        return Err(FrameError::HypothesisFailed(format!("inequality (λ, μ, ν) is {:?}", certificate.status)));
    }
    let guaranteed = guaranteed_bounds(x_bounds.ambient_lower, x_bounds.upper_opt, p)?;
    let yb = frame_bounds(y)?;
    let actual = (yb.ambient_lower, yb.upper_opt);
    let lower_slack = actual.0 - guaranteed.0;
    let upper_slack = guaranteed.1 - actual.1;
    Ok(PerturbationReport {
        certificate,
        x_bounds,
        guaranteed,
        actual,
        lower_slack,
        upper_slack,
        contained: lower_slack >= -1e-8 && upper_slack >= -1e-8,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum NormalizableVariant {
    /// `‖Σc(x−y)‖ ≤ λ‖Σcx‖ + ν‖Σcy‖`
    A { lambda: f64, nu: f64 },
    /// `‖Σ c_n/‖x_n‖ (x_n − y_n)‖ ≤ K‖c‖`
    B { k: f64 },
    /// `‖Σ c_n/‖y_n‖ (x_n − y_n)‖ ≤ K‖c‖`
    C { k: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizablePerturbReport {
    pub variant: NormalizableVariant,
    /// Lower bound of the normalized `X` (span bound when `X` is not complete).
    pub normalized_x_lower: f64,
    pub threshold: f64,
    pub threshold_ok: bool,
    pub certificate: PerturbationCertificate,
    /// Range of `‖y_n‖ / ‖x_n‖`.
    pub ratio_range: (f64, f64),
    pub sandwich_holds: bool,
    pub normalized_y: FrameBounds,
    /// Hypotheses and inequality hold, and the normalized `Y` is a frame
    /// for its span with a positive lower bound.
    pub conclusion_holds: bool,
}

fn span_or_ambient_lower(b: &FrameBounds) -> f64 {
    if b.is_complete {
        b.ambient_lower
    } else {
        b.lower_opt
    }
}

pub fn check_normalizable_perturb(
    x: &VectorSequence,
    y: &VectorSequence,
    variant: NormalizableVariant,
    seed: u64,
) -> Result<NormalizablePerturbReport> {
    difference_matrix(x, y)?;
    let nx = frame_bounds(&normalize(x))?;
    let a = span_or_ambient_lower(&nx);
    if !(a > 0.0) {
        return Err(FrameError::HypothesisFailed("normalized X has no positive lower bound".into()));
    }
    let xn = x.norms();
    let yn = y.norms();
    let ratios: Vec<f64> = xn.iter().zip(&yn).map(|(a, b)| b / a).collect();
    let ratio_range =
        (ratios.iter().copied().fold(f64::INFINITY, f64::min), ratios.iter().copied().fold(0.0, f64::max));
    let slack = 1e-12;
    let (threshold, threshold_ok, certificate, sandwich_holds) = match variant {
        NormalizableVariant::A { lambda, nu } => {
            let p = PerturbationParams::new(lambda, 0.0, nu)?;
            let cert = check_inequality_41(x, y, &p, seed)?;
            let sandwich = xn.iter().zip(&yn).all(|(x, y)| {
                (1.0 - nu) * y <= (1.0 + lambda) * x * (1.0 + slack)
                    && (1.0 - lambda) * x <= (1.0 + nu) * y * (1.0 + slack)
            });
            (1.0, lambda < 1.0 && nu < 1.0, cert, sandwich)
        }
        NormalizableVariant::B { k } | NormalizableVariant::C { k } => {
            let by_x = matches!(variant, NormalizableVariant::B { .. });
            let weights: Vec<C64> = (if by_x { &xn } else { &yn }).iter().map(|n| re(1.0 / n)).collect();
            let xw = diag_rescale(x, &weights)?;
            let yw = diag_rescale(y, &weights)?;
            let cert = check_inequality_41(&xw, &yw, &PerturbationParams::new(0.0, k, 0.0)?, seed)?;
            let threshold = if by_x { a.sqrt().min(1.0) } else { a.sqrt() / (1.0 + a.sqrt()) };
            let sandwich = xn.iter().zip(&yn).all(|(x, y)| {
                let (base, other) = if by_x { (x, y) } else { (y, x) };
                (1.0 - k) * base <= other * (1.0 + slack) && *other <= (1.0 + k) * base * (1.0 + slack)
            });
            (threshold, k < threshold, cert, sandwich)
        }
    };
    let normalized_y = frame_bounds(&normalize(y))?;
    let conclusion_holds =
        threshold_ok && certificate.holds() && sandwich_holds && span_or_ambient_lower(&normalized_y) > 0.0;
    Ok(NormalizablePerturbReport {
        variant,
        normalized_x_lower: a,
        threshold,
        threshold_ok,
        certificate,
        ratio_range,
        sandwich_holds,
        normalized_y,
        conclusion_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRatioReport {
    /// `inf ‖x_n‖/|c_n|`
    pub m: f64,
    /// `sup ‖x_n‖/|c_n|`
    pub l: f64,
    pub normalized: FrameBounds,
    pub rescaled: FrameBounds,
    /// Both are frames for the span, or neither.
    pub equivalence: bool,
    /// `M² A_norm ≤ A_resc` and `B_resc ≤ L² B_norm`, within 1e-8 relative.
    pub transfer_ok: bool,
}

/// Compare `normalize(X)` with `{x_n / c_n}`.
pub fn norm_ratio_check(x: &VectorSequence, c: &[C64]) -> Result<NormRatioReport> {
    if c.len() != x.len() {
        return Err(FrameError::LengthMismatch { expected: x.len(), found: c.len() });
    }
    if let Some(index) = c.iter().position(|z| z.norm() == 0.0) {
        return Err(FrameError::ZeroScalar { index });
    }
    let ratios: Vec<f64> = x.norms().iter().zip(c).map(|(n, z)| n / z.norm()).collect();
    let m = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let l = ratios.iter().copied().fold(0.0, f64::max);
    let inv: Vec<C64> = c.iter().map(|z| z.inv()).collect();
    let normalized = frame_bounds(&normalize(x))?;
    let rescaled = frame_bounds(&diag_rescale(x, &inv)?)?;
    let is_frame = |b: &FrameBounds| span_or_ambient_lower(b) > 0.0;
    let rel = 1e-8;
    let transfer_ok = m * m * normalized.lower_opt <= rescaled.lower_opt * (1.0 + rel)
        && rescaled.lower_opt <= l * l * normalized.lower_opt * (1.0 + rel)
        && m * m * normalized.upper_opt <= rescaled.upper_opt * (1.0 + rel)
        && rescaled.upper_opt <= l * l * normalized.upper_opt * (1.0 + rel);
    Ok(NormRatioReport {
        m,
        l,
        equivalence: is_frame(&normalized) == is_frame(&rescaled),
        normalized,
        rescaled,
        transfer_ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RescaleAgreement {
    pub factor: f64,
    pub normalized_upper: DivergenceVerdict,
    pub rescaled_upper: DivergenceVerdict,
    pub normalized_lower: DivergenceVerdict,
    pub rescaled_lower: DivergenceVerdict,
    pub agree: bool,
}

/// Probe `normalize(X)` and `{x_n / c_n}` with `c_n = factor·‖x_n‖` over the
/// schedule and compare verdicts.
pub fn rescale_verdict_agreement(
    g: &GeneratorSequence,
    sched: &TruncationSchedule,
    factor: f64,
) -> Result<RescaleAgreement> {
    let ambient = g.complete_for_ambient();
    let rescale = |x: &VectorSequence| -> Result<VectorSequence> {
        let inv: Vec<C64> = x.norms().iter().map(|n| re(1.0 / (factor * n))).collect();
        diag_rescale(x, &inv)
    };
    let lower_of = |b: FrameBounds| if ambient { b.ambient_lower } else { b.lower_opt };
    let pair = |f: &(dyn Fn(&VectorSequence) -> Result<VectorSequence> + Sync)| -> Result<(DivergenceVerdict, DivergenceVerdict)> {
        let trace = probe_trace(g, sched, |x| {
            let b = frame_bounds(&f(x)?)?;
            Ok(b.upper_opt)
        })?;
        let lower = probe_trace(g, sched, |x| Ok(lower_of(frame_bounds(&f(x)?)?)))?;
        Ok((DivergenceVerdict::classify(trace, false), DivergenceVerdict::classify(lower, true)))
    };
    let (normalized_upper, normalized_lower) = pair(&|x| Ok(normalize(x)))?;
    let (rescaled_upper, rescaled_lower) = pair(&rescale)?;
    let agree = normalized_upper.classification == rescaled_upper.classification
        && normalized_lower.classification == rescaled_lower.classification;
    Ok(RescaleAgreement { factor, normalized_upper, rescaled_upper, normalized_lower, rescaled_lower, agree })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaled_basis(n: usize, s: f64) -> VectorSequence {
        VectorSequence::new(n, (0..n).map(|k| ComplexVector::basis(n, k).scaled_real(s)).collect(), "scaled").unwrap()
    }

    #[test]
    fn guaranteed_bounds_examples() {
        let zero = PerturbationParams::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(guaranteed_bounds(1.0, 1.0, &zero).unwrap(), (1.0, 1.0));
        let (a, b) = guaranteed_bounds(1.0, 1.0, &PerturbationParams::new(0.0, 0.1, 0.0).unwrap()).unwrap();
        assert!((a - 0.81).abs() < 1e-15 && (b - 1.21).abs() < 1e-15);
        let (a, b) = guaranteed_bounds(1.0, 4.0, &PerturbationParams::new(0.1, 0.0, 0.1).unwrap()).unwrap();
        assert!((a - (9.0f64 / 11.0).powi(2)).abs() < 1e-14);
        assert!((b - 4.0 * (11.0f64 / 9.0).powi(2)).abs() < 1e-14);
        let bad = PerturbationParams::new(1.0, 0.0, 0.0).unwrap();
        assert!(matches!(guaranteed_bounds(1.0, 1.0, &bad), Err(FrameError::Inadmissible(_))));
    }

    #[test]
    fn identical_sequences_hold_exactly() {
        let mut rng = random::rng(11);
        let x = random::sequence(&mut rng, 3, 6);
        for p in [(0.0, 0.2, 0.0), (0.3, 0.0, 0.0), (0.1, 0.1, 0.1)] {
            let p = PerturbationParams::new(p.0, p.1, p.2).unwrap();
            let c = check_inequality_41(&x, &x, &p, 1).unwrap();
            assert_eq!(c.status, CertificateStatus::HoldsExact);
        }
    }

    #[test]
    fn scaled_basis_mu_exact() {
        let x = VectorSequence::orthonormal_basis(5);
        let y = scaled_basis(5, 0.9);
        let c = check_inequality_41(&x, &y, &PerturbationParams::new(0.0, 0.1, 0.0).unwrap(), 1).unwrap();
        assert_eq!(c.status, CertificateStatus::HoldsExact);
        assert!((c.achieved_ratio - 0.1).abs() < 1e-12);
        let c = check_inequality_41(&x, &y, &PerturbationParams::new(0.0, 0.09, 0.0).unwrap(), 1).unwrap();
        assert_eq!(c.status, CertificateStatus::FalsifiedByWitness);

        let r = verify_perturbation(&x, &y, &PerturbationParams::new(0.0, 0.1, 0.0).unwrap(), 1).unwrap();
        assert!(r.contained);
        assert!((r.actual.0 - 0.81).abs() < 1e-12 && (r.actual.1 - 0.81).abs() < 1e-12);
    }

    #[test]
    fn shifted_pair_lambda_equality() {
        let n = 10;
        let x = GeneratorSequence::ShiftedBasis.materialize(n).unwrap();
        let y = GeneratorSequence::ShiftedSum.materialize(n).unwrap();
        let p = PerturbationParams::new(1.0, 0.0, 0.0).unwrap();
        let c = check_inequality_41(&x, &y, &p, 1).unwrap();
        assert_eq!(c.status, CertificateStatus::HoldsExact);
        assert!((c.achieved_ratio - 1.0).abs() < 1e-12);
        assert!(!p.admissible_for(1.0));
        let tighter = check_inequality_41(&x, &y, &PerturbationParams::new(0.99, 0.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(tighter.status, CertificateStatus::FalsifiedByWitness);
    }

    #[test]
    fn lambda_mode_detects_kernel() {
        // x_1 = x_2 but y_1 != y_2: D is nonzero on ker X
        let x = VectorSequence::from_real_rows(2, &[&[1.0, 0.0], &[1.0, 0.0]], "x").unwrap();
        let y = VectorSequence::from_real_rows(2, &[&[1.0, 0.0], &[1.0, 0.1]], "y").unwrap();
        let c = check_inequality_41(&x, &y, &PerturbationParams::new(0.5, 0.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(c.status, CertificateStatus::FalsifiedByWitness);
        assert!(c.achieved_ratio.is_infinite());
    }

    #[test]
    fn mixed_mode_outcomes() {
        let x = VectorSequence::orthonormal_basis(4);
        let y = scaled_basis(4, 0.95);
        // σ_max(D) = 0.05 ≤ 0.02·1 + 0.02 + 0.02·0.95
        let ok = check_inequality_41(&x, &y, &PerturbationParams::new(0.02, 0.02, 0.02).unwrap(), 3).unwrap();
        assert_eq!(ok.status, CertificateStatus::HoldsSufficient);
        let bad = check_inequality_41(&x, &y, &PerturbationParams::new(0.01, 0.01, 0.01).unwrap(), 3).unwrap();
        assert_eq!(bad.status, CertificateStatus::FalsifiedByWitness);
        assert!(bad.witness.is_some());
    }

    #[test]
    fn normalizable_variants() {
        let x = VectorSequence::orthonormal_basis(6);
        let y = scaled_basis(6, 1.1);
        let r = check_normalizable_perturb(&x, &y, NormalizableVariant::B { k: 0.1 }, 1).unwrap();
        assert!(r.threshold_ok && r.certificate.holds() && r.sandwich_holds && r.conclusion_holds);
        assert!((r.certificate.achieved_ratio - 0.1).abs() < 1e-12);
        assert!((r.ratio_range.0 - 1.1).abs() < 1e-12);

        let same = check_normalizable_perturb(&x, &x, NormalizableVariant::A { lambda: 0.5, nu: 0.5 }, 1).unwrap();
        assert!(same.conclusion_holds);
        assert_eq!(same.ratio_range, (1.0, 1.0));
        let same_c = check_normalizable_perturb(&x, &x, NormalizableVariant::C { k: 0.2 }, 1).unwrap();
        assert!(same_c.conclusion_holds);

        let xs = GeneratorSequence::ShiftedBasis.materialize(8).unwrap();
        let ys = GeneratorSequence::ShiftedSum.materialize(8).unwrap();
        let r = check_normalizable_perturb(&xs, &ys, NormalizableVariant::B { k: 1.0 }, 1).unwrap();
        assert!(!r.threshold_ok);
        assert!(!r.conclusion_holds);
    }

    #[test]
    fn norm_ratio_examples() {
        let x = GeneratorSequence::BasisWithScaledCopies.materialize(10).unwrap();
        let exact: Vec<C64> = x.norms().iter().map(|&n| re(n)).collect();
        let r = norm_ratio_check(&x, &exact).unwrap();
        assert_eq!((r.m, r.l), (1.0, 1.0));
        assert!((r.normalized.lower_opt - r.rescaled.lower_opt).abs() < 1e-14);
        assert!((r.normalized.upper_opt - r.rescaled.upper_opt).abs() < 1e-14);
        let onb = VectorSequence::orthonormal_basis(4);
        let r = norm_ratio_check(&onb, &[re(2.0); 4]).unwrap();
        assert_eq!((r.m, r.l), (0.5, 0.5));
        assert!((r.rescaled.upper_opt - 0.25 * r.normalized.upper_opt).abs() < 1e-15);
        assert!(r.equivalence && r.transfer_ok);
    }
}
