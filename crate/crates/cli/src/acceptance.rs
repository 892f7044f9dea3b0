//! The acceptance suite behind `framelab verify`.

use std::f64::consts::FRAC_1_SQRT_2;

use framelab::gallery::{self, Expected, GoldenCheck, Observed, Origin, CARLESON_K12};
use framelab::hilbert::svd;
use framelab::iterative::{
    carleson_product, compact_fixed_point, compact_iteration_probe, fixed_point_probe, lemma57_check,
    nonnormalizability_witness, thm313_report, SubspaceRule, WitnessKind, WitnessStatus, THM313_NORMALIZED_SCHEDULE,
    THM313_PROXY_SCHEDULE,
};
use framelab::multiplier::DEFAULT_TRIALS;
use framelab::perturbation::{
    guaranteed_bounds, norm_ratio_check, rescale_verdict_agreement, verify_perturbation, CertificateStatus,
};
use framelab::{
    balan_check, canonical_parseval, frame_bounds, parseval_residual, random, verify_projection_model, Classification,
    ComplexVector, GeneratorSequence, LinearOperator, OperatorSpec, PerturbationParams, TruncationSchedule,
    VectorSequence, C64,
};
use rand::seq::IteratorRandom;
use rand::Rng;
use serde::Serialize;
use serde_json::Value;

use crate::commands::multiplier_record;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::report::{Record, Report};

pub const CRITERIA: [&str; 14] = [
    "basis with scaled copies: bounds 1 and 2, normalized tight",
    "scaled repeated blocks: Parseval, normalized bound grows with k",
    "exact Bessel sequence: bounded, biorthogonal, normalized divergent",
    "Balan three-quarter inequality",
    "canonical Parseval frames",
    "projection model reconstruction",
    "perturbation guarantees",
    "norm ratios and rescaling",
    "Carleson products and the diagonal system",
    "growth envelope for normal operators",
    "fixed vectors and the compact orbit",
    "non-normalizability witnesses",
    "multiplier stability suite",
    "deterministic reports",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub checks: Vec<GoldenCheck>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CriterionResult {
    pub fn label(&self) -> String {
        format!("criterion {:2}: {}", self.id, self.name)
    }

    pub fn line(&self) -> String {
        format!("{} {}", if self.pass { "PASS" } else { "FAIL" }, self.label())
    }
}

#[derive(Default)]
struct Checks {
    list: Vec<GoldenCheck>,
    detail: Value,
}

impl Checks {
    fn push(&mut self, q: impl Into<String>, e: Expected, origin: Origin, o: Observed) {
        self.list.push(GoldenCheck::new(q, e, origin, o));
    }
    fn value(&mut self, q: impl Into<String>, value: f64, tol: f64, origin: Origin, observed: f64) {
        self.push(q, Expected::Value { value, tol }, origin, Observed::Value(observed));
    }
    fn at_most(&mut self, q: impl Into<String>, value: f64, origin: Origin, observed: f64) {
        self.push(q, Expected::AtMost { value }, origin, Observed::Value(observed));
    }
    fn at_least(&mut self, q: impl Into<String>, value: f64, origin: Origin, observed: f64) {
        self.push(q, Expected::AtLeast { value }, origin, Observed::Value(observed));
    }
    fn within(&mut self, q: impl Into<String>, lo: f64, hi: f64, origin: Origin, observed: Option<f64>) {
        self.push(q, Expected::Within { lo, hi }, origin, Observed::Value(observed.unwrap_or(f64::NAN)));
    }
    fn flag(&mut self, q: impl Into<String>, origin: Origin, observed: bool) {
        self.push(q, Expected::Flag { value: true }, origin, Observed::Flag(observed));
    }
    fn verdict(&mut self, q: impl Into<String>, verdict: Classification, origin: Origin, observed: Classification) {
        self.push(q, Expected::Verdict { verdict }, origin, Observed::Verdict(observed));
    }
    fn gallery(&mut self, id: &str, keep: impl Fn(&str) -> bool) -> CliResult<()> {
        for mut g in gallery::verify_entry(id)? {
            if keep(&g.golden.quantity) {
                g.golden.quantity = format!("{id}: {}", g.golden.quantity);
                self.list.push(g);
            }
        }
        Ok(())
    }
}

fn random_frame(rng: &mut impl Rng, max_dim: usize, max_len: usize) -> VectorSequence {
    let d = rng.random_range(1..=max_dim);
    let n = rng.random_range(d..=max_len.max(d));
    random::sequence(rng, d, n)
}

fn fold_max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn scaled_copies(c: &mut Checks) -> CliResult<()> {
    c.gallery("ex3.2", |_| true)?;
    let g = gallery::ex_3_2();
    let lowers: Vec<f64> = [8usize, 16, 32]
        .iter()
        .map(|&d| Ok(frame_bounds(&g.materialize(2 * d)?)?.lower_opt))
        .collect::<CliResult<_>>()?;
    c.flag(
        "ex3.2: lower_opt decreasing towards 1",
        Origin::Derived,
        lowers.windows(2).all(|w| w[1] < w[0]) && lowers[2] > 1.0,
    );
    Ok(())
}

fn balan(c: &mut Checks, seed: u64) -> CliResult<()> {
    let mut rng = random::rng(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let p = canonical_parseval(&random_frame(&mut rng, 8, 24))?;
        let k = rng.random_range(0..=p.len());
        let subset: Vec<usize> = (0..p.len()).choose_multiple(&mut rng, k);
        let x = random::vector(&mut rng, p.ambient_dim());
        worst = worst.min(balan_check(&p, &subset, &x)?.slack / x.norm_sq());
    }
    c.at_least("min slack / |x|^2 over 1000 triples", -1e-9, Origin::Published, worst);
    let p = VectorSequence::from_real_rows(1, &[&[FRAC_1_SQRT_2], &[FRAC_1_SQRT_2]], "halves")?;
    let x = ComplexVector::from_real(&[1.7]);
    let r = balan_check(&p, &[0], &x)?;
    c.value("equality instance total / |x|^2", 0.75, 1e-12, Origin::Exact, r.total / x.norm_sq());
    Ok(())
}

fn canonical(c: &mut Checks, seed: u64) -> CliResult<()> {
    let mut rng = random::rng(seed);
    let (mut res, mut norm) = (0f64, 0f64);
    for _ in 0..200 {
        let p = canonical_parseval(&random_frame(&mut rng, 8, 20))?;
        res = res.max(parseval_residual(&p)?);
        norm = norm.max(fold_max(p.norms()));
    }
    c.at_most("max Parseval residual over 200 frames", 1e-9, Origin::Published, res);
    c.at_most("max norm over 200 frames", 1.0 + 1e-10, Origin::Published, norm);
    Ok(())
}

fn projection(c: &mut Checks, seed: u64) -> CliResult<()> {
    let mut rng = random::rng(seed);
    let mut res = 0f64;
    for _ in 0..200 {
        res = res.max(verify_projection_model(&random_frame(&mut rng, 8, 20))?.residual);
    }
    c.at_most("max reconstruction residual over 200 frames", 1e-9, Origin::Published, res);
    Ok(())
}

fn perturbation(c: &mut Checks, seed: u64) -> CliResult<()> {
    let (lo, hi) = guaranteed_bounds(1.0, 1.0, &PerturbationParams::new(0.0, 0.1, 0.0)?)?;
    // 1.1² is not representable; the tolerance is a few ulps
    c.value("guaranteed lower at A = B = 1, mu = 0.1", 0.81, 1e-15, Origin::Exact, lo);
    c.value("guaranteed upper at A = B = 1, mu = 0.1", 1.21, 1e-15, Origin::Exact, hi);
    let mut rng = random::rng(seed);
    let (mut lower_slack, mut upper_slack) = (f64::INFINITY, f64::INFINITY);
    let mut exact = true;
    for _ in 0..500 {
        let d = rng.random_range(1..=6);
        let n = rng.random_range(d..=2 * d + 2);
        let x = random::sequence(&mut rng, d, n);
        let a = frame_bounds(&x)?.ambient_lower;
        let mu = rng.random_range(0.05..0.95) * a.sqrt();
        let e = random::matrix(&mut rng, d, n);
        let top = svd(&e)?.singular_values[0];
        let e = e * C64::new(rng.random_range(0.1..1.0) * mu / top, 0.0);
        let y = x.try_map(|k, v| ComplexVector::from_dvector(v.as_dvector() + e.column(k)))?;
        let r = verify_perturbation(&x, &y, &PerturbationParams::new(0.0, mu, 0.0)?, rng.random())?;
        exact &= r.certificate.status == CertificateStatus::HoldsExact;
        lower_slack = lower_slack.min(r.lower_slack);
        upper_slack = upper_slack.min(r.upper_slack);
    }
    c.flag("every mu-perturbation certified exactly", Origin::Derived, exact);
    c.at_least("min lower slack over 500 perturbations", -1e-8, Origin::Published, lower_slack);
    c.at_least("min upper slack over 500 perturbations", -1e-8, Origin::Published, upper_slack);
    c.gallery("rem4.4b", |q| q == "achieved_lambda" || q == "normalized_y_lower")
}

fn rescaling(c: &mut Checks) -> CliResult<()> {
    for (id, g) in gallery::generators() {
        let sched = g.default_schedule();
        let x = g.materialize_level(sched.max())?;
        for factor in [1.0, 2.0] {
            let agree = rescale_verdict_agreement(&g, &sched, factor)?.agree;
            c.flag(format!("{id}: verdicts agree at c = {factor}|x|"), Origin::Published, agree);
            let scalars: Vec<C64> = x.norms().iter().map(|n| C64::new(factor * n, 0.0)).collect();
            let r = norm_ratio_check(&x, &scalars)?;
            let ratio_ok = (r.m - 1.0 / factor).abs() <= 1e-12 && (r.l - 1.0 / factor).abs() <= 1e-12;
            c.flag(
                format!("{id}: norm-ratio transfer at c = {factor}|x|"),
                Origin::Published,
                ratio_ok && r.transfer_ok && r.equivalence,
            );
        }
    }
    Ok(())
}

fn carleson(c: &mut Checks) -> CliResult<()> {
    let pair = carleson_product(&[C64::new(0.5, 0.0), C64::new(0.75, 0.0)], 2)?;
    c.value("inf for lambda = (1/2, 3/4)", 0.4, 1e-12, Origin::Exact, pair.inf_value);
    let r = thm313_report(12, &THM313_PROXY_SCHEDULE, &THM313_NORMALIZED_SCHEDULE)?;
    c.value("inf for 1 - 2^-k, K = 12", CARLESON_K12, 1e-10, Origin::Derived, r.carleson.inf_value);
    c.flag("unnormalized frame proxy stabilizes", Origin::Published, r.frame_proxy_stable);
    c.verdict("normalized probe", Classification::Divergent, Origin::Published, r.normalized.classification);
    Ok(())
}

fn polar(rng: &mut impl Rng, r: std::ops::Range<f64>) -> C64 {
    let m = rng.random_range(r);
    C64::from_polar(m, rng.random_range(0.0..std::f64::consts::TAU))
}

fn envelope(c: &mut Checks, seed: u64) -> CliResult<()> {
    let mut rng = random::rng(seed);
    let mut worst = 0f64;
    for _ in 0..1000 {
        let d = rng.random_range(1..=6);
        let eig: Vec<C64> = (0..d).map(|_| polar(&mut rng, 0.2..1.8)).collect();
        let op = OperatorSpec::dense(random::normal_with_spectrum(&mut rng, &eig))?;
        let x = random::vector(&mut rng, d);
        let k0 = rng.random_range(0..=3);
        let n = rng.random_range(2..=8);
        worst = worst.max(lemma57_check(&op, &x, k0, n)?);
    }
    c.at_most("max violation over 1000 normal matrices", 1e-9, Origin::Published, worst);
    let op = OperatorSpec::DiagonalNormal { eigenvalues: vec![C64::new(2.0, 0.0)] };
    let v = lemma57_check(&op, &ComplexVector::from_real(&[1.0]), 0, 8)?;
    c.value("violation for diag(2)", 0.0, 0.0, Origin::Exact, v);
    Ok(())
}

fn fixed_vectors(c: &mut Checks, seed: u64) -> CliResult<()> {
    let mut rng = random::rng(seed);
    let (mut worst, mut counts_ok) = (0f64, true);
    for _ in 0..200 {
        let d = rng.random_range(1..=8);
        let ones = rng.random_range(1..=d);
        let eig: Vec<C64> = (0..d)
            .map(|k| {
                if k < ones {
                    C64::new(1.0, 0.0)
                } else if rng.random_bool(0.3) {
                    C64::from_polar(1.0, rng.random_range(0.5..5.5))
                } else {
                    polar(&mut rng, 0.0..0.95)
                }
            })
            .collect();
        let op = LinearOperator::new(random::normal_with_spectrum(&mut rng, &eig))?;
        let r = fixed_point_probe(&op, &[random::vector(&mut rng, d)])?;
        counts_ok &= r.w0.len() == ones;
        worst = worst.max(r.adjoint_residual);
    }
    c.at_most("max adjoint-fixed residual over 200 operators", 1e-9, Origin::Published, worst);
    c.flag("fixed space dimension equals the multiplicity of 1", Origin::Derived, counts_ok);
    let (op, x) = compact_fixed_point(32);
    let r = compact_iteration_probe(&op, &[x], &TruncationSchedule::default())?;
    let v = r.normalized.as_ref();
    c.verdict(
        "compact orbit normalized probe",
        Classification::Divergent,
        Origin::Published,
        v.map_or(Classification::Inconclusive, |v| v.classification),
    );
    c.within("compact orbit growth exponent", 0.9, 1.1, Origin::Derived, v.and_then(|v| v.growth_exponent));
    Ok(())
}

fn witnesses(c: &mut Checks) -> CliResult<()> {
    let cases = [
        ("ex3.11", gallery::ex_3_11(), WitnessKind::VanishingNorms { subspace: SubspaceRule::Ambient }),
        (
            "n e1 + e_{n+1}",
            GeneratorSequence::GrowingPair,
            WitnessKind::GrowingNorms { subspace: SubspaceRule::CoordinatesFrom { first: 1 } },
        ),
    ];
    for (name, g, kind) in cases {
        let sched = match &g {
            GeneratorSequence::GrowingPair => TruncationSchedule::default(),
            _ => g.default_schedule(),
        };
        let r = nonnormalizability_witness(&g, kind, &sched)?;
        c.flag(
            format!("{name}: hypothesis verified"),
            Origin::Published,
            r.status == WitnessStatus::HypothesisVerified,
        );
        c.verdict(
            format!("{name}: normalized probe"),
            Classification::Divergent,
            Origin::Published,
            r.normalized.classification,
        );
    }
    Ok(())
}

fn multipliers(c: &mut Checks, seed: u64) -> CliResult<()> {
    let sched = TruncationSchedule::default();
    let (mut orlicz, mut equiv, mut mismatch, mut product) = (0usize, 0usize, 0usize, 0f64);
    let mut detail = serde_json::Map::new();
    for (i, inst) in gallery::multiplier_suite().iter().enumerate() {
        let r = multiplier_record(inst, DEFAULT_TRIALS, &sched, random::derive_seed(seed, i as u64))?;
        orlicz += usize::from(!r.orlicz_contrapositive());
        equiv += usize::from(!r.stable_iff_bounded());
        mismatch += usize::from(r.expected != Some(r.unconditional.verdict));
        product = product.max(r.product_check().unwrap_or(f64::INFINITY));
        detail.insert(
            inst.name.clone(),
            serde_json::json!({
                "verdict": r.unconditional.verdict,
                "orlicz_tail": r.orlicz_tail.classification,
            }),
        );
    }
    c.value("Orlicz contrapositive violations", 0.0, 0.0, Origin::Published, orlicz as f64);
    c.value("Stable vs bounded probe disagreements", 0.0, 0.0, Origin::Published, equiv as f64);
    c.value("verdicts differing from the suite labels", 0.0, 0.0, Origin::Derived, mismatch as f64);
    c.at_most("max factorization product error", 1e-12, Origin::Exact, product);
    c.detail = Value::Object(detail);
    Ok(())
}

/// Criterion `id` (1 to 13) with random streams derived from `seed`.
pub fn run_criterion(id: usize, seed: u64) -> CriterionResult {
    let mut c = Checks::default();
    let stream = random::derive_seed(seed, id as u64);
    let outcome = match id {
        1 => scaled_copies(&mut c),
        2 => c.gallery("ex3.11", |_| true),
        3 => c.gallery("ex3.12", |_| true),
        4 => balan(&mut c, stream),
        5 => canonical(&mut c, stream),
        6 => projection(&mut c, stream),
        7 => perturbation(&mut c, stream),
        8 => rescaling(&mut c),
        9 => carleson(&mut c),
        10 => envelope(&mut c, stream),
        11 => fixed_vectors(&mut c, stream),
        12 => witnesses(&mut c),
        13 => multipliers(&mut c, stream),
        _ => panic!("criterion {id} is not a numerical criterion"),
    };
    let error = outcome.err().map(|e| e.to_string());
    CriterionResult {
        id,
        name: CRITERIA[id - 1],
        pass: error.is_none() && !c.list.is_empty() && c.list.iter().all(|g| g.pass),
        checks: c.list,
        detail: c.detail,
        error,
    }
}

fn numerical_report(cfg: &RunConfig) -> (Report, Vec<CriterionResult>) {
    let mut report = Report::new(cfg, None);
    let results: Vec<CriterionResult> = (1..=13).map(|id| run_criterion(id, cfg.seed)).collect();
    for r in &results {
        report.verdict(r.label(), r.pass);
        report.push(Record::new("criterion", &format!("{:02}", r.id), r));
    }
    (report, results)
}

/// The full suite. The last criterion rebuilds the report of the first
/// thirteen and compares the serialized bytes.
pub fn cmd_verify(cfg: &RunConfig) -> (Report, Vec<CriterionResult>) {
    let (mut report, mut results) = numerical_report(cfg);
    if cfg.schedule.is_some() || cfg.size.is_some() || !cfg.tolerances.is_default() {
        report.warn("schedule, size and tolerance overrides do not apply to the acceptance suite");
    }
    let first = report.to_json();
    let second = numerical_report(cfg).0.to_json();
    let mut c = Checks::default();
    c.flag("two runs serialize to identical bytes", Origin::Exact, first == second);
    c.value("report length in bytes", first.len() as f64, 0.0, Origin::Exact, second.len() as f64);
    let det = CriterionResult {
        id: 14,
        name: CRITERIA[13],
        pass: c.list.iter().all(|g| g.pass),
        checks: c.list,
        detail: Value::Null,
        error: None,
    };
    report.verdict(det.label(), det.pass);
    report.push(Record::new("criterion", "14", &det));
    results.push(det);
    (report, results)
}
