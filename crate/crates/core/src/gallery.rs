//! Named examples and counterexamples with frozen golden values.
//!
//! Each golden carries an [`Origin`]: `published` values are stated outright
//! in the source article, `derived` values were computed by hand or by an
//! independent brute-force summation before being frozen, and `exact` values
//! follow from the construction itself.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frame::{biorthogonality_error, frame_bounds, frame_operator, parseval_residual};
use crate::generator::GeneratorSequence;
use crate::hilbert::{re, ComplexVector, VectorSequence, C64};
use crate::iterative::{
    build_thm313_system, compact_iteration_probe, thm313_report, IterativeSystemSpec, OperatorSpec,
    THM313_NORMALIZED_SCHEDULE, THM313_PROXY_SCHEDULE,
};
use crate::multiplier::{MultiplierSpec, ProbeVector, Stability, SymbolRule};
use crate::normalization::{
    bessel_normalizable_probe, lower_normalizable_probe, normalize, normalized_e1_mass, Classification,
    TruncationSchedule,
};
use crate::perturbation::{check_inequality_41, PerturbationParams};

pub const IDS: [&str; 8] = ["ex3.2", "ex3.11", "ex3.12", "rem4.4b", "rem4.4c", "orthoblock", "thm3.13", "compactfp"];

/// `inf_n Π_{k≠n} |λ_n − λ_k| / |1 − λ_n λ_k|` for `λ_k = 1 − 2^{-k}`,
/// `k ≤ 12`, by direct summation in extended form.
pub const CARLESON_K12: f64 = 0.016_886_832_666_488_14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Published,
    Derived,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Expected {
    Value { value: f64, tol: f64 },
    AtMost { value: f64 },
    AtLeast { value: f64 },
    Within { lo: f64, hi: f64 },
    Verdict { verdict: Classification },
    Flag { value: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Observed {
    Value(f64),
    Verdict(Classification),
    Flag(bool),
}

impl Expected {
    pub fn accepts(&self, o: &Observed) -> bool {
        match (self, o) {
            (Self::Value { value, tol }, Observed::Value(v)) => (v - value).abs() <= *tol,
            (Self::AtMost { value }, Observed::Value(v)) => v <= value,
            (Self::AtLeast { value }, Observed::Value(v)) => v >= value,
            (Self::Within { lo, hi }, Observed::Value(v)) => lo <= v && v <= hi,
            (Self::Verdict { verdict }, Observed::Verdict(v)) => verdict == v,
            (Self::Flag { value }, Observed::Flag(v)) => value == v,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Golden {
    pub quantity: String,
    pub expected: Expected,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoldenCheck {
    #[serde(flatten)]
    pub golden: Golden,
    pub observed: Observed,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum GalleryObject {
    Sequence { generator: GeneratorSequence },
    Pair { x: GeneratorSequence, y: GeneratorSequence },
    System { system: IterativeSystemSpec },
    Orbit { op: OperatorSpec, seed: ComplexVector },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GalleryEntry {
    pub id: String,
    pub anchor: String,
    pub object: GalleryObject,
}

pub fn ex_3_2() -> GeneratorSequence {
    GeneratorSequence::BasisWithScaledCopies
}

pub fn ex_3_11() -> GeneratorSequence {
    GeneratorSequence::ScaledRepeatedBlocks { whole_blocks: true }
}

pub fn ex_3_12() -> GeneratorSequence {
    GeneratorSequence::ExactBessel
}

/// `x_n = e_n`, `y_n = e_n + e_{n+1}`.
pub fn remark_4_4_b() -> (GeneratorSequence, GeneratorSequence) {
    (GeneratorSequence::ShiftedBasis, GeneratorSequence::ShiftedSum)
}

/// `x_{2n-1} = e_n`, `x_{2n} = d_n e_n` against `y_{2n} = d_n e_1`.
pub fn remark_4_4_c(mu: f64) -> Result<(GeneratorSequence, GeneratorSequence)> {
    let x = GeneratorSequence::SparseDuplicates { mu, collapse: false };
    let y = GeneratorSequence::SparseDuplicates { mu, collapse: true };
    x.validate()?;
    Ok((x, y))
}

/// `per_block` random vectors in each window of `width` coordinates.
pub fn orthoblock(per_block: usize, width: usize, seed: u64) -> Result<GeneratorSequence> {
    let g = GeneratorSequence::Orthoblock { per_block, width, norm_lo: 0.5, norm_hi: 2.0, seed };
    g.validate()?;
    Ok(g)
}

pub fn thm_313_system(k: usize) -> Result<IterativeSystemSpec> {
    build_thm313_system(k)
}

pub use crate::iterative::compact_fixed_point;

pub fn entry(id: &str) -> Result<GalleryEntry> {
    let (anchor, object) = match id {
        "ex3.2" => ("orthonormal basis together with e_n / n", GalleryObject::Sequence { generator: ex_3_2() }),
        "ex3.11" => ("k copies of e_k / sqrt(k) in block k", GalleryObject::Sequence { generator: ex_3_11() }),
        "ex3.12" => ("x_n = (e_1 + e_{n+1}) / n", GalleryObject::Sequence { generator: ex_3_12() }),
        "rem4.4b" => {
            let (x, y) = remark_4_4_b();
            ("x_n = e_n against y_n = e_n + e_{n+1}", GalleryObject::Pair { x, y })
        }
        "rem4.4c" => {
            let (x, y) = remark_4_4_c(0.1)?;
            ("sparse duplicates d_n e_n against d_n e_1, mu = 0.1", GalleryObject::Pair { x, y })
        }
        "orthoblock" => (
            "three random vectors per window of two coordinates",
            GalleryObject::Sequence { generator: orthoblock(3, 2, crate::tol::DEFAULT_SEED)? },
        ),
        "thm3.13" => (
            "diagonal operator 1 - 2^{-k} with seed sqrt(1 - lambda_k^2)",
            GalleryObject::System { system: thm_313_system(12)? },
        ),
        "compactfp" => {
            let (op, seed) = compact_fixed_point(32);
            ("diag(1, 1/2, ..., 1/d) with seed sum e_k / k", GalleryObject::Orbit { op, seed })
        }
        other => return Err(FrameError::UnknownGalleryId(other.to_string())),
    };
    Ok(GalleryEntry { id: id.to_string(), anchor: anchor.to_string(), object })
}

/// Every single-sequence generator the gallery exposes, including both
/// halves of the pairs.
pub fn generators() -> Vec<(String, GeneratorSequence)> {
    let mut out = Vec::new();
    for id in IDS {
        match entry(id).expect("static id").object {
            GalleryObject::Sequence { generator } => out.push((id.to_string(), generator)),
            GalleryObject::Pair { x, y } => {
                out.push((format!("{id}/x"), x));
                out.push((format!("{id}/y"), y));
            }
            _ => {}
        }
    }
    out
}

struct Checks(Vec<GoldenCheck>);

impl GoldenCheck {
    pub fn new(quantity: impl Into<String>, expected: Expected, origin: Origin, observed: Observed) -> Self {
        let pass = expected.accepts(&observed);
        GoldenCheck { golden: Golden { quantity: quantity.into(), expected, origin }, observed, pass }
    }
}

impl Checks {
    fn push(&mut self, quantity: impl Into<String>, expected: Expected, origin: Origin, observed: Observed) {
        self.0.push(GoldenCheck::new(quantity, expected, origin, observed));
    }

    fn value(&mut self, q: impl Into<String>, value: f64, tol: f64, origin: Origin, observed: f64) {
        self.push(q, Expected::Value { value, tol }, origin, Observed::Value(observed));
    }

    fn verdict(&mut self, q: impl Into<String>, verdict: Classification, origin: Origin, observed: Classification) {
        self.push(q, Expected::Verdict { verdict }, origin, Observed::Verdict(observed));
    }
}

fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Rerun the analyses behind an entry's golden values.
pub fn verify_entry(id: &str) -> Result<Vec<GoldenCheck>> {
    use Origin::*;
    let entry = entry(id)?;
    let mut c = Checks(Vec::new());
    let sched = TruncationSchedule::default();
    match (id, entry.object) {
        ("ex3.2", GalleryObject::Sequence { generator: g }) => {
            for d in [8usize, 16, 32] {
                let x = g.materialize(2 * d)?;
                let b = frame_bounds(&x)?;
                c.value(format!("upper_opt[d={d}]"), 2.0, 1e-10, Published, b.upper_opt);
                c.value(format!("lower_opt[d={d}]"), 1.0 + 1.0 / (d * d) as f64, 1e-10, Derived, b.lower_opt);
                let s = frame_operator(&normalize(&x))?;
                let two = DMatrix::<C64>::identity(d, d) * re(2.0);
                c.value(
                    format!("normalized_frame_operator_minus_2I[d={d}]"),
                    0.0,
                    1e-10,
                    Published,
                    max_abs_diff(s.matrix(), &two),
                );
            }
            c.verdict(
                "normalized_bessel",
                Classification::Bounded,
                Published,
                bessel_normalizable_probe(&g, &g.default_schedule())?.classification,
            );
        }
        ("ex3.11", GalleryObject::Sequence { generator: g }) => {
            for k in [4usize, 8, 16] {
                let x = g.materialize_level(k)?;
                c.value(format!("parseval_residual[k={k}]"), 0.0, 1e-12, Published, parseval_residual(&x)?);
                c.value(
                    format!("normalized_upper[k={k}]"),
                    k as f64,
                    1e-10,
                    Derived,
                    frame_bounds(&normalize(&x))?.upper_opt,
                );
            }
            let v = bessel_normalizable_probe(&g, &g.default_schedule())?;
            c.verdict("normalized_bessel", Classification::Divergent, Published, v.classification);
            c.push(
                "normalized_bessel_growth_exponent",
                Expected::Within { lo: 0.9, hi: 1.1 },
                Derived,
                Observed::Value(v.growth_exponent.unwrap_or(f64::NAN)),
            );
        }
        ("ex3.12", GalleryObject::Sequence { generator: g }) => {
            let mut prev = 0.0;
            let mut monotone = true;
            for n in [8usize, 16, 32, 64] {
                let u = frame_bounds(&g.materialize(n)?)?.upper_opt;
                monotone &= u >= prev;
                prev = u;
            }
            c.push(
                "upper_opt[N=64]",
                Expected::AtMost { value: PI * PI / 3.0 + 1e-6 },
                Published,
                Observed::Value(prev),
            );
            c.push("upper_opt_monotone", Expected::Flag { value: true }, Derived, Observed::Flag(monotone));
            let x = g.materialize(64)?;
            let a = VectorSequence::new(
                x.ambient_dim(),
                (0..64).map(|n| ComplexVector::basis(65, n + 1).scaled_real((n + 1) as f64)).collect(),
                "a_n = n e_{n+1}",
            )?;
            c.value("biorthogonality_error", 0.0, 1e-10, Published, biorthogonality_error(&x, &a)?);
            for n in [16usize, 64] {
                let s = frame_operator(&normalize(&g.materialize(n)?))?;
                c.value(format!("normalized_s11[N={n}]"), n as f64 / 2.0, 1e-10, Derived, s.matrix()[(0, 0)].re);
            }
            c.verdict(
                "normalized_bessel",
                Classification::Divergent,
                Published,
                bessel_normalizable_probe(&g, &g.default_schedule())?.classification,
            );
        }
        ("rem4.4b", GalleryObject::Pair { x: gx, y: gy }) => {
            let n = 32;
            let cert = check_inequality_41(
                &gx.materialize(n)?.padded(n + 1),
                &gy.materialize(n)?,
                &PerturbationParams::new(1.0, 0.0, 0.0)?,
                crate::tol::DEFAULT_SEED,
            )?;
            c.push(
                "inequality_holds_at_lambda_1",
                Expected::Flag { value: true },
                Published,
                Observed::Flag(cert.holds()),
            );
            c.value("achieved_lambda", 1.0, 1e-10, Published, cert.achieved_ratio);
            let admissible = PerturbationParams::new(1.0, 0.0, 0.0)?.admissible_for(1.0);
            c.push("admissible", Expected::Flag { value: false }, Published, Observed::Flag(admissible));
            c.verdict(
                "normalized_y_lower",
                Classification::Divergent,
                Published,
                lower_normalizable_probe(&gy, &gy.default_schedule())?.classification,
            );
        }
        ("rem4.4c", GalleryObject::Pair { x: gx, y: gy }) => {
            let n = 64;
            let (x, y) = (gx.materialize(n)?, gy.materialize(n)?);
            let dn_sq: f64 = (1..=n / 2).map(|k| (0.05 * 0.5f64.powf(k as f64 / 2.0)).powi(2)).sum();
            c.push(
                "sum_2_dn_sq_below_mu_sq",
                Expected::Flag { value: true },
                Derived,
                Observed::Flag(2.0 * dn_sq < 0.01),
            );
            c.push(
                "x_frame",
                Expected::Flag { value: true },
                Published,
                Observed::Flag(frame_bounds(&x)?.is_frame_for_ambient),
            );
            c.push(
                "y_frame",
                Expected::Flag { value: true },
                Published,
                Observed::Flag(frame_bounds(&y)?.is_frame_for_ambient),
            );
            c.value("normalized_x_upper", 2.0, 1e-10, Derived, frame_bounds(&normalize(&x))?.upper_opt);
            c.value("normalized_y_e1_mass[N=64]", 33.0, 1e-10, Derived, normalized_e1_mass(&y));
            let hs: f64 =
                x.iter().zip(y.iter()).map(|(a, b)| a.sub(b).map(|d| d.norm_sq())).sum::<Result<f64>>()?.sqrt();
            c.push("difference_hilbert_schmidt", Expected::AtMost { value: 0.1 }, Published, Observed::Value(hs));
            c.verdict(
                "normalized_x_bessel",
                Classification::Bounded,
                Derived,
                bessel_normalizable_probe(&gx, &gx.default_schedule())?.classification,
            );
            c.verdict(
                "normalized_y_bessel",
                Classification::Divergent,
                Published,
                bessel_normalizable_probe(&gy, &gy.default_schedule())?.classification,
            );
        }
        ("orthoblock", GalleryObject::Sequence { generator: g }) => {
            let x = g.materialize(30)?;
            c.push(
                "normalized_upper[10 blocks]",
                Expected::AtMost { value: 3.0 + 1e-8 },
                Derived,
                Observed::Value(frame_bounds(&normalize(&x))?.upper_opt),
            );
            let inter = (0..30)
                .flat_map(|i| (0..30).map(move |j| (i, j)))
                .filter(|(i, j)| i / 3 != j / 3)
                .map(|(i, j)| crate::hilbert::inner(x.get(i), x.get(j)).map(|z| z.norm()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            c.value("inter_block_inner", 0.0, 0.0, Exact, inter);
            c.verdict(
                "normalized_bessel",
                Classification::Bounded,
                Published,
                bessel_normalizable_probe(&g, &g.default_schedule())?.classification,
            );
        }
        ("thm3.13", GalleryObject::System { .. }) => {
            let r = thm313_report(12, &THM313_PROXY_SCHEDULE, &THM313_NORMALIZED_SCHEDULE)?;
            c.value("carleson_inf[K=12]", CARLESON_K12, 1e-10, Derived, r.carleson.inf_value);
            c.push(
                "frame_proxy_stable",
                Expected::Flag { value: true },
                Published,
                Observed::Flag(r.frame_proxy_stable),
            );
            c.verdict("normalized_bessel", Classification::Divergent, Published, r.normalized.classification);
        }
        ("compactfp", GalleryObject::Orbit { op, seed }) => {
            let r = compact_iteration_probe(&op, &[seed], &sched)?;
            let v = r.normalized.as_ref().map_or(Classification::Inconclusive, |v| v.classification);
            c.push("fixed_point_pairs", Expected::Flag { value: true }, Derived, Observed::Flag(r.fixed_point_pairs));
            c.verdict("normalized_bessel", Classification::Divergent, Derived, v);
            c.push(
                "normalized_bessel_growth_exponent",
                Expected::Within { lo: 0.9, hi: 1.1 },
                Derived,
                Observed::Value(r.normalized.and_then(|v| v.growth_exponent).unwrap_or(f64::NAN)),
            );
        }
        _ => unreachable!("entry shapes are fixed per id"),
    }
    Ok(c.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplierInstance {
    pub name: String,
    pub spec: MultiplierSpec,
    pub probe: ProbeVector,
    pub expected: Stability,
}

/// Twenty multiplier instances mixing stable and unstable series, all
/// evaluated at `x = Σ e_k / k`.
pub fn multiplier_suite() -> Vec<MultiplierInstance> {
    use GeneratorSequence::*;
    use Stability::*;
    use SymbolRule::*;
    let one = Constant { value: 1.0 };
    let cases: Vec<(&str, SymbolRule, GeneratorSequence, GeneratorSequence, Stability)> = vec![
        ("identity", one.clone(), OrthonormalBasis, OrthonormalBasis, Stable),
        ("harmonic_diagonal", Power { p: 1.0 }, OrthonormalBasis, OrthonormalBasis, Stable),
        ("growing_diagonal", Power { p: -1.0 }, OrthonormalBasis, OrthonormalBasis, Unstable),
        ("pile_onto_e1", one.clone(), OrthonormalBasis, RepeatedFirst, Unstable),
        ("pile_onto_e1_harmonic", Power { p: 1.0 }, OrthonormalBasis, RepeatedFirst, Stable),
        ("pile_onto_e1_geometric", Geometric { r: 0.5 }, OrthonormalBasis, RepeatedFirst, Stable),
        ("ex3.2_against_basis", one.clone(), BasisWithScaledCopies, OrthonormalBasis, Stable),
        (
            "ex3.2_inverse_norm_geometric",
            InverseNormGeometric { r: 0.5 },
            BasisWithScaledCopies,
            OrthonormalBasis,
            Stable,
        ),
        ("ex3.2_against_e1", one.clone(), BasisWithScaledCopies, RepeatedFirst, Unstable),
        ("doubled_basis", one.clone(), RepeatedBasis { copies: 2 }, OrthonormalBasis, Stable),
        ("doubled_against_e1_harmonic", Power { p: 1.0 }, RepeatedBasis { copies: 2 }, RepeatedFirst, Stable),
        ("tripled_both", one.clone(), RepeatedBasis { copies: 3 }, RepeatedBasis { copies: 3 }, Stable),
        ("zero_symbols", Constant { value: 0.0 }, OrthonormalBasis, OrthonormalBasis, Stable),
        ("orthoblock_against_basis", one.clone(), orthoblock(3, 2, 11).expect("valid"), OrthonormalBasis, Stable),
        ("alternating_diagonal", Alternating, OrthonormalBasis, OrthonormalBasis, Stable),
        ("pile_onto_e1_sqrt", Power { p: 0.5 }, OrthonormalBasis, RepeatedFirst, Unstable),
        ("ex3.2_both", one.clone(), BasisWithScaledCopies, BasisWithScaledCopies, Stable),
        ("doubled_against_e1", one.clone(), RepeatedBasis { copies: 2 }, RepeatedFirst, Unstable),
        ("weighted_basis_decaying", Power { p: 2.0 }, PowerScaledBasis { power: 1.0 }, OrthonormalBasis, Stable),
        ("weighted_basis", one, PowerScaledBasis { power: 1.0 }, OrthonormalBasis, Unstable),
    ];
    cases
        .into_iter()
        .map(|(name, symbols, x, y, expected)| MultiplierInstance {
            name: name.to_string(),
            spec: MultiplierSpec::new(symbols, x, y),
            probe: ProbeVector::PowerCoefficients { p: 1.0 },
            expected,
        })
        .collect()
}

/// Orthoblock family against itself with constant symbols: the normalized
/// family is Bessel by the block bound, so the factorization applies.
pub fn orthoblock_multiplier(per_block: usize, width: usize, seed: u64) -> Result<MultiplierSpec> {
    let g = orthoblock(per_block, width, seed)?;
    Ok(MultiplierSpec::new(SymbolRule::Constant { value: 1.0 }, g.clone(), g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_resolve_and_unknown_fails() {
        for id in IDS {
            assert_eq!(entry(id).unwrap().id, id);
        }
        assert!(matches!(entry("ex9.9"), Err(FrameError::UnknownGalleryId(_))));
    }

    #[test]
    fn ex_3_2_prefix() {
        let x = ex_3_2().materialize(4).unwrap();
        assert_eq!(x.norms(), vec![1.0, 1.0, 1.0, 0.5]);
    }

    #[test]
    fn ex_3_11_block_three() {
        let x = ex_3_11().materialize_level(3).unwrap();
        let e3 = ComplexVector::basis(3, 2).scaled_real(1.0 / 3f64.sqrt());
        assert!(x.vectors()[3..].iter().all(|v| v.max_abs_diff(&e3) < 1e-15));
    }

    #[test]
    fn remark_4_4_c_sum_bound() {
        let mu: f64 = 0.1;
        let s: f64 = (1..200).map(|n| 2.0 * (0.05 * 0.5f64.powf(n as f64 / 2.0)).powi(2)).sum();
        assert!(s < mu * mu);
        assert!(remark_4_4_c(-1.0).is_err());
    }

    #[test]
    fn every_gallery_golden_holds() {
        for id in IDS {
            for check in verify_entry(id).unwrap() {
                assert!(check.pass, "{id}: {:?}", check);
            }
        }
    }

    #[test]
    fn suite_has_both_outcomes() {
        let s = multiplier_suite();
        assert_eq!(s.len(), 20);
        assert!(s.iter().any(|i| i.expected == Stability::Stable));
        assert!(s.iter().any(|i| i.expected == Stability::Unstable));
    }
}
