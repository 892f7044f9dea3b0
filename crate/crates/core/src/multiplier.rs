//! Multipliers `M(x) = Σ m_n ⟨x, y_n⟩ x_n`, unconditional-convergence
//! probes and the factorization `m_n = c_n conj(d_n)`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frame::{bounds_from_spectrum, frame_operator_matrix};
use crate::generator::GeneratorSequence;
use crate::hilbert::{eig_hermitian_matrix, inner, re, ComplexVector, VectorSequence, C64};
use crate::normalization::{DivergenceVerdict, TruncationSchedule};
use crate::random;

/// Rule for the symbols `m_n`, indexed from `n = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SymbolRule {
    Constant {
        value: f64,
    },
    /// `n^{-p}`
    Power {
        p: f64,
    },
    /// `r^n`
    Geometric {
        r: f64,
    },
    /// `(-1)^n`
    Alternating,
    /// `r^n / ‖x_n‖`
    InverseNormGeometric {
        r: f64,
    },
    Explicit {
        values: Vec<C64>,
    },
}

impl SymbolRule {
    fn symbol(&self, n: usize, x_norm: f64) -> Result<C64> {
        let k = n as f64;
        Ok(match self {
            Self::Constant { value } => re(*value),
            Self::Power { p } => re(k.powf(-p)),
            Self::Geometric { r } => re(r.powi(n as i32)),
            Self::Alternating => re(if n.is_multiple_of(2) { 1.0 } else { -1.0 }),
            Self::InverseNormGeometric { r } => re(r.powi(n as i32) / x_norm),
            Self::Explicit { values } => {
                *values.get(n - 1).ok_or(FrameError::LengthMismatch { expected: n, found: values.len() })?
            }
        })
    }
}

/// The vector the multiplier series is evaluated at, in the truncation's
/// ambient dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "probe", rename_all = "snake_case")]
pub enum ProbeVector {
    /// `e_{k+1}` (zero-based `k`).
    Basis {
        k: usize,
    },
    /// `⟨x, e_j⟩ = j^{-p}`
    PowerCoefficients {
        p: f64,
    },
    Ones,
}

impl ProbeVector {
    pub fn at(&self, dim: usize) -> ComplexVector {
        match self {
            Self::Basis { k } => ComplexVector::basis(dim, (*k).min(dim - 1)),
            Self::PowerCoefficients { p } => {
                ComplexVector::from_real(&(1..=dim).map(|j| (j as f64).powf(-p)).collect::<Vec<_>>())
            }
            Self::Ones => ComplexVector::from_real(&vec![1.0; dim]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplierSpec {
    pub symbols: SymbolRule,
    pub x: GeneratorSequence,
    pub y: GeneratorSequence,
}

/// The first `n` terms of `X`, `Y` and the symbols, padded to a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierTruncation {
    pub x: VectorSequence,
    pub y: VectorSequence,
    pub m: Vec<C64>,
}

impl MultiplierTruncation {
    pub fn dim(&self) -> usize {
        self.x.ambient_dim()
    }

    /// `t_n = m_n ⟨v, y_n⟩ x_n` as columns of a `d × N` matrix.
    pub fn term_matrix(&self, v: &ComplexVector) -> Result<DMatrix<C64>> {
        if v.dim() != self.dim() {
            return Err(FrameError::LengthMismatch { expected: self.dim(), found: v.dim() });
        }
        let mut t = DMatrix::<C64>::zeros(self.dim(), self.x.len());
        for (n, ((xn, yn), m)) in self.x.iter().zip(self.y.iter()).zip(&self.m).enumerate() {
            let coeff = m * inner(v, yn)?;
            t.set_column(n, &(xn.as_dvector() * coeff));
        }
        Ok(t)
    }

    /// `Σ_{n ≤ N} m_n ⟨v, y_n⟩ x_n`.
    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        let t = self.term_matrix(v)?;
        Ok(ComplexVector::from_dvector(t.column_sum()))
    }
}

impl MultiplierSpec {
    pub fn new(symbols: SymbolRule, x: GeneratorSequence, y: GeneratorSequence) -> Self {
        Self { symbols, x, y }
    }

    pub fn truncate(&self, n: usize) -> Result<MultiplierTruncation> {
        let x = self.x.materialize(n)?;
        let y = self.y.materialize(n)?;
        let d = x.ambient_dim().max(y.ambient_dim());
        let (x, y) = (x.padded(d), y.padded(d));
        let m = x.norms().iter().enumerate().map(|(i, &nx)| self.symbols.symbol(i + 1, nx)).collect::<Result<_>>()?;
        Ok(MultiplierTruncation { x, y, m })
    }
}

pub fn apply_multiplier(spec: &MultiplierSpec, n: usize, v: &ComplexVector) -> Result<ComplexVector> {
    spec.truncate(n)?.apply(v)
}

/// `Σ_{n ≤ N} ‖m_n ⟨x, y_n⟩ x_n‖²` over the schedule.
pub fn orlicz_tail(spec: &MultiplierSpec, probe: ProbeVector, sched: &TruncationSchedule) -> Result<DivergenceVerdict> {
    let trace = sched
        .sizes()
        .par_iter()
        .map(|&n| {
            let tr = spec.truncate(n)?;
            let t = tr.term_matrix(&probe.at(tr.dim()))?;
            Ok((n, t.column_iter().map(|c| c.norm_squared()).sum()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DivergenceVerdict::classify(trace, false))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnconditionalReport {
    /// Largest `‖Σ ε_n t_n‖` per level over the sampled sign patterns.
    pub sign_trace: DivergenceVerdict,
    /// Largest `max_j ‖S_N − s_j^π‖` per level over sampled permutations,
    /// where `s_j^π` are partial sums in permuted order.
    pub perm_trace: DivergenceVerdict,
    pub max_sign_deviation: f64,
    pub max_perm_deviation: f64,
    pub trials: usize,
    pub verdict: Stability,
}

pub const DEFAULT_TRIALS: usize = 400;

/// Sign patterns that line the terms up with a direction `u`:
/// `ε_n = sign Re⟨t_n, u⟩`, for the top left singular vectors of the terms
/// and the coordinate axes carrying the most mass.
fn aligned_signs(t: &DMatrix<C64>) -> Vec<Vec<f64>> {
    let mut dirs: Vec<DVector<C64>> = Vec::new();
    if t.ncols() > 0 && t.iter().any(|z| z.norm() > 0.0) {
        let s = nalgebra::SVD::new(t.clone(), true, false);
        if let Some(u) = s.u {
            let mut order: Vec<usize> = (0..s.singular_values.len()).collect();
            order.sort_by(|&a, &b| s.singular_values[b].total_cmp(&s.singular_values[a]));
            dirs.extend(order.into_iter().take(3).map(|k| u.column(k).into_owned()));
        }
        let mut rows: Vec<(usize, f64)> = (0..t.nrows()).map(|i| (i, t.row(i).norm_squared())).collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1));
        for &(i, _) in rows.iter().take(3) {
            let mut e = DVector::<C64>::zeros(t.nrows());
            e[i] = re(1.0);
            dirs.push(e);
        }
    }
    dirs.iter().map(|u| t.column_iter().map(|c| if c.dotc(u).re >= 0.0 { 1.0 } else { -1.0 }).collect()).collect()
}

pub fn unconditional_probe(
    spec: &MultiplierSpec,
    probe: ProbeVector,
    trials: usize,
    sched: &TruncationSchedule,
    seed: u64,
) -> Result<UnconditionalReport> {
    if trials < 100 {
        return Err(FrameError::ParamValidation(format!("at least 100 trials are required, got {trials}")));
    }
    let n_max = sched.max();
    // one set of random signs and permutations, drawn at the largest size
    let signs: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            use rand::Rng;
            let mut rng = random::rng(random::derive_seed(seed, 2 * t as u64));
            (0..n_max).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
        })
        .collect();
    let perms: Vec<Vec<usize>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = random::rng(random::derive_seed(seed, 2 * t as u64 + 1));
            let mut p: Vec<usize> = (0..n_max).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    let per_level: Vec<(usize, f64, f64)> = sched
        .sizes()
        .par_iter()
        .map(|&n| {
            let tr = spec.truncate(n)?;
            let t = tr.term_matrix(&probe.at(tr.dim()))?;
            let mut patterns: Vec<Vec<f64>> = signs.iter().map(|s| s[..n].to_vec()).collect();
            patterns.extend(aligned_signs(&t));
            let sign_dev = patterns
                .iter()
                .map(|eps| (&t * DVector::from_iterator(n, eps.iter().map(|&e| re(e)))).norm())
                .fold(0.0, f64::max);
            let total = t.column_sum();
            let perm_dev = perms
                .iter()
                .map(|p| {
                    let mut partial = DVector::<C64>::zeros(t.nrows());
                    let mut worst: f64 = (&total - &partial).norm();
                    for &i in p.iter().filter(|&&i| i < n) {
                        partial += t.column(i);
                        worst = worst.max((&total - &partial).norm());
                    }
                    worst
                })
                .fold(0.0, f64::max);
            Ok((n, sign_dev, perm_dev))
        })
        .collect::<Result<_>>()?;
    let sign_trace = DivergenceVerdict::classify(per_level.iter().map(|r| (r.0, r.1)).collect(), false);
    let perm_trace = DivergenceVerdict::classify(per_level.iter().map(|r| (r.0, r.2)).collect(), false);
    let verdict =
        if sign_trace.is_bounded() && perm_trace.is_bounded() { Stability::Stable } else { Stability::Unstable };
    Ok(UnconditionalReport {
        max_sign_deviation: per_level.iter().map(|r| r.1).fold(0.0, f64::max),
        max_perm_deviation: per_level.iter().map(|r| r.2).fold(0.0, f64::max),
        sign_trace,
        perm_trace,
        trials,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationResult {
    pub p: f64,
    /// `c_n = ‖x_n‖^{-p}` at the largest truncation.
    pub c: Vec<C64>,
    /// `d_n = conj(m_n) ‖x_n‖^p` at the largest truncation.
    pub d: Vec<C64>,
    /// `max |c_n conj(d_n) − m_n|` over every truncation.
    pub product_check: f64,
    pub cx_bessel: DivergenceVerdict,
    pub dy_bessel: DivergenceVerdict,
}

/// Upper frame bound of a finite family that may contain zero vectors.
fn upper_bound_allowing_zeros(vectors: &[ComplexVector], dim: usize) -> Result<f64> {
    let s = frame_operator_matrix(vectors, dim);
    Ok(bounds_from_spectrum(&eig_hermitian_matrix(&s)?).upper_opt)
}

struct FactorLevel {
    n: usize,
    cx_upper: f64,
    dy_upper: f64,
    product: f64,
    c: Vec<C64>,
    d: Vec<C64>,
    sup_norm: f64,
}

/// Split `m_n = c_n conj(d_n)` with `c_n = ‖x_n‖^{-p}` and probe `{c_n x_n}`,
/// `{d_n y_n}` for the Bessel property.
pub fn bs_factorization(spec: &MultiplierSpec, p: f64, sched: &TruncationSchedule) -> Result<FactorizationResult> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(FrameError::ParamValidation(format!("p must be in [1, ∞), got {p}")));
    }
    let levels: Vec<FactorLevel> = sched
        .sizes()
        .par_iter()
        .map(|&n| {
            let tr = spec.truncate(n)?;
            let norms = tr.x.norms();
            let c: Vec<C64> = norms.iter().map(|nx| re(nx.powf(-p))).collect();
            let d: Vec<C64> = tr.m.iter().zip(&norms).map(|(m, nx)| m.conj() * nx.powf(p)).collect();
            let product = c.iter().zip(&d).zip(&tr.m).map(|((c, d), m)| (c * d.conj() - m).norm()).fold(0.0, f64::max);
            let cx: Vec<ComplexVector> = tr.x.iter().zip(&c).map(|(v, s)| v.scaled(*s)).collect();
            let dy: Vec<ComplexVector> = tr.y.iter().zip(&d).map(|(v, s)| v.scaled(*s)).collect();
            let sup_norm = norms.iter().copied().fold(0.0, f64::max);
            Ok(FactorLevel {
                n,
                cx_upper: upper_bound_allowing_zeros(&cx, tr.dim())?,
                dy_upper: upper_bound_allowing_zeros(&dy, tr.dim())?,
                product,
                c,
                d,
                sup_norm,
            })
        })
        .collect::<Result<_>>()?;
    let cx_bessel = DivergenceVerdict::classify(levels.iter().map(|l| (l.n, l.cx_upper)).collect(), false);
    if !cx_bessel.is_bounded() {
        return Err(FrameError::PreconditionFailed(format!(
            "{{x_n / ||x_n||^{p}}} Bessel probe is {:?}, not Bounded",
            cx_bessel.classification
        )));
    }
    if p != 1.0 {
        let sup = DivergenceVerdict::classify(levels.iter().map(|l| (l.n, l.sup_norm)).collect(), false);
        if !sup.is_bounded() {
            return Err(FrameError::PreconditionFailed("X is not norm-bounded above at the tested scale".into()));
        }
    }
    let dy_bessel = DivergenceVerdict::classify(levels.iter().map(|l| (l.n, l.dy_upper)).collect(), false);
    let product_check = levels.iter().map(|l| l.product).fold(0.0, f64::max);
    let last = levels.into_iter().last().expect("schedule is nonempty");
    Ok(FactorizationResult { p, c: last.c, d: last.d, product_check, cx_bessel, dy_bessel })
}
