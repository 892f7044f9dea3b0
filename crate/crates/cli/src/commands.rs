use framelab::gallery::{self, GalleryEntry, GalleryObject, MultiplierInstance};
use framelab::iterative::{
    carleson_product, compact_iteration_probe, fixed_point_probe, iterate, nonnormalizability_witness, norm_trajectory,
    thm313_report, SubspaceRule, WitnessKind, THM313_NORMALIZED_SCHEDULE, THM313_PROXY_SCHEDULE,
};
use framelab::multiplier::{bs_factorization, orlicz_tail, unconditional_probe, ProbeVector, Stability};
use framelab::normalization::{classify_category, normalizability_report};
use framelab::perturbation::{
    check_inequality_41, check_normalizable_perturb, guaranteed_bounds, verify_perturbation, NormalizableVariant,
};
use framelab::{
    biorthogonal_dual, canonical_parseval, frame_bounds, normalize, parseval_residual, random, verify_projection_model,
    Classification, ComplexVector, DivergenceVerdict, FrameBounds, FrameError, GeneratorSequence, IterativeSystemSpec,
    LinearOperator, Minimality, OperatorSpec, PerturbationParams, TruncationSchedule, VectorSequence, VerdictRule, C64,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::input::{read_input, InputData};
use crate::report::{Record, Report};

/// What a command runs on: a gallery entry or an input file.
enum Subject {
    Gallery(GalleryEntry),
    Input(InputData),
}

fn load(cfg: &RunConfig) -> CliResult<(Option<Subject>, Option<Vec<u8>>)> {
    match (&cfg.gallery, &cfg.input) {
        (Some(_), Some(_)) => Err(CliError::ConfigParse("--gallery and --input are mutually exclusive".into())),
        (Some(id), None) => Ok((Some(Subject::Gallery(gallery::entry(id)?)), None)),
        (None, Some(path)) => {
            let (data, bytes) = read_input(path)?;
            Ok((Some(Subject::Input(data)), Some(bytes)))
        }
        (None, None) => Ok((None, None)),
    }
}

fn require(subject: Option<Subject>, command: &str) -> CliResult<Subject> {
    subject.ok_or_else(|| CliError::ConfigParse(format!("{command} needs --gallery <id> or --input <path>")))
}

/// Probe schedule. `--size` picks one level, which a trend cannot be read from.
fn schedule(cfg: &RunConfig, default: TruncationSchedule) -> CliResult<TruncationSchedule> {
    if cfg.size.is_some() && cfg.command != crate::Command::Analyze {
        return Err(CliError::ConfigParse(format!(
            "{} reads trends; use --schedule instead of --size",
            cfg.command.name()
        )));
    }
    Ok(cfg.schedule.map_or(default, |s| s.schedule()))
}

fn levels(cfg: &RunConfig, default: TruncationSchedule) -> CliResult<Vec<usize>> {
    match cfg.size {
        Some(n) => Ok(vec![n]),
        None => Ok(schedule(cfg, default)?.sizes().to_vec()),
    }
}

/// Halving prefixes of a finite sequence, ending at its full length.
fn prefix_schedule(len: usize) -> CliResult<TruncationSchedule> {
    let mut sizes: Vec<usize> = (0..4).rev().map(|k| len >> k).filter(|&n| n > 0).collect();
    sizes.dedup();
    Ok(TruncationSchedule::new(sizes)?)
}

fn reclassify(v: DivergenceVerdict, rule: &VerdictRule) -> DivergenceVerdict {
    DivergenceVerdict::classify_with(v.trace, v.inverted, rule)
}

fn goldens(report: &mut Report, entry: &GalleryEntry) -> CliResult<()> {
    let checks = gallery::verify_entry(&entry.id)?;
    let pass = checks.iter().all(|c| c.pass);
    report.push(
        Record::new("gallery_goldens", &entry.id, serde_json::json!({ "anchor": entry.anchor })).with_goldens(checks),
    );
    report.verdict(format!("gallery goldens {}", entry.id), pass);
    Ok(())
}

/// Single-sequence views of a subject, each with its default schedule.
fn generators(_cfg: &RunConfig, subject: &Subject) -> CliResult<Vec<(String, GeneratorSequence, TruncationSchedule)>> {
    let mut out = Vec::new();
    match subject {
        Subject::Gallery(e) => match &e.object {
            GalleryObject::Sequence { generator } => out.push((e.id.clone(), generator.clone())),
            GalleryObject::Pair { x, y } => {
                out.push((format!("{}/x", e.id), x.clone()));
                out.push((format!("{}/y", e.id), y.clone()));
            }
            GalleryObject::System { system } => out.push((e.id.clone(), system.generator())),
            GalleryObject::Orbit { op, seed } => {
                out.push((e.id.clone(), GeneratorSequence::OperatorOrbit { op: op.clone(), seeds: vec![seed.clone()] }))
            }
        },
        Subject::Input(InputData::Sequence(x)) => {
            out.push(("input".into(), GeneratorSequence::Explicit { sequence: x.clone() }));
        }
        Subject::Input(InputData::Pair(x, y)) => {
            out.push(("input/x".into(), GeneratorSequence::Explicit { sequence: x.clone() }));
            out.push(("input/y".into(), GeneratorSequence::Explicit { sequence: y.clone() }));
        }
        Subject::Input(InputData::System { operator, seeds, .. }) => {
            let op = dense_operator(operator.clone())?;
            out.push(("input".into(), GeneratorSequence::OperatorOrbit { op, seeds: seeds.clone() }));
        }
    }
    out.into_iter()
        .map(|(name, g)| {
            let default = match &g {
                GeneratorSequence::Explicit { sequence } => prefix_schedule(sequence.len())?,
                _ => g.default_schedule(),
            };
            Ok((name, g, default))
        })
        .collect()
}

fn dense_operator(m: nalgebra::DMatrix<C64>) -> CliResult<OperatorSpec> {
    OperatorSpec::dense(m).map_err(|e| match e {
        FrameError::NotNormal { deviation } => {
            CliError::ConfigParse(format!("input operator is not normal (deviation {deviation:e})"))
        }
        other => other.into(),
    })
}

#[derive(Serialize)]
struct CanonicalSummary {
    parseval_residual: f64,
    min_norm: f64,
    max_norm: f64,
}

#[derive(Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
enum MinimalitySummary {
    Minimal { max_error: f64 },
    NotMinimal { rank: usize },
}

#[derive(Serialize)]
struct FiniteAnalysis {
    len: usize,
    ambient_dim: usize,
    bounds: FrameBounds,
    parseval_residual: f64,
    is_parseval: bool,
    canonical_parseval: Option<CanonicalSummary>,
    minimality: MinimalitySummary,
    projection_residual: f64,
}

fn analyze_finite(x: &VectorSequence, cfg: &RunConfig, report: &mut Report, name: &str) -> CliResult<FiniteAnalysis> {
    let bounds = frame_bounds(x)?;
    let residual = parseval_residual(x)?;
    let canonical = match canonical_parseval(x) {
        Ok(p) => {
            let norms = p.norms();
            Some(CanonicalSummary {
                parseval_residual: parseval_residual(&p)?,
                min_norm: norms.iter().copied().fold(f64::INFINITY, f64::min),
                max_norm: norms.iter().copied().fold(0.0, f64::max),
            })
        }
        Err(e) => {
            report.warn(format!("{name}: canonical Parseval frame unavailable: {e}"));
            None
        }
    };
    let minimality = match biorthogonal_dual(x)? {
        Minimality::Minimal { max_error, .. } => MinimalitySummary::Minimal { max_error },
        Minimality::NotMinimal { rank } => MinimalitySummary::NotMinimal { rank },
    };
    Ok(FiniteAnalysis {
        len: x.len(),
        ambient_dim: x.ambient_dim(),
        bounds,
        parseval_residual: residual,
        is_parseval: residual <= cfg.tolerances.parseval,
        canonical_parseval: canonical,
        minimality,
        projection_residual: verify_projection_model(x)?.residual,
    })
}

pub fn cmd_analyze(cfg: &RunConfig) -> CliResult<Report> {
    let (subject, bytes) = load(cfg)?;
    let subject = require(subject, "analyze")?;
    let mut report = Report::new(cfg, bytes.as_deref());
    let finite: Vec<(String, VectorSequence)> = match &subject {
        Subject::Gallery(GalleryEntry { object: GalleryObject::System { system }, id, .. }) => {
            let spec =
                IterativeSystemSpec::new(system.op.clone(), system.seeds.clone(), cfg.size.unwrap_or(system.n_max))?;
            vec![(id.clone(), orbit(&spec, &mut report)?)]
        }
        Subject::Gallery(GalleryEntry { object: GalleryObject::Orbit { op, seed }, id, .. }) => {
            let spec = IterativeSystemSpec::new(op.clone(), vec![seed.clone()], cfg.size.unwrap_or(64))?;
            vec![(id.clone(), orbit(&spec, &mut report)?)]
        }
        Subject::Input(InputData::System { operator, seeds, depth }) => {
            let spec = IterativeSystemSpec::new(dense_operator(operator.clone())?, seeds.clone(), *depth)?;
            vec![("input".into(), orbit(&spec, &mut report)?)]
        }
        Subject::Input(InputData::Sequence(x)) => vec![("input".into(), x.clone())],
        Subject::Input(InputData::Pair(x, y)) => vec![("input/x".into(), x.clone()), ("input/y".into(), y.clone())],
        Subject::Gallery(_) => {
            let mut out = Vec::new();
            for (name, g, default) in generators(cfg, &subject)? {
                for level in levels(cfg, default)? {
                    out.push((format!("{name}[level={level}]"), g.materialize_level(level)?));
                }
            }
            out
        }
    };
    for (name, x) in &finite {
        let a = analyze_finite(x, cfg, &mut report, name)?;
        report.push(Record::new("analyze", name, a));
    }
    if let Subject::Gallery(e) = &subject {
        goldens(&mut report, e)?;
    }
    Ok(report)
}

fn orbit(spec: &IterativeSystemSpec, report: &mut Report) -> CliResult<VectorSequence> {
    let it = iterate(spec)?;
    if let Some(w) = &it.truncated {
        report.warn(format!("orbit cut at power {} of seed {} (norm {:e})", w.power, w.seed, w.norm));
    }
    Ok(it.sequence)
}

pub fn cmd_normalize(cfg: &RunConfig) -> CliResult<Report> {
    let (subject, bytes) = load(cfg)?;
    let subject = require(subject, "normalize")?;
    let mut report = Report::new(cfg, bytes.as_deref());
    let rule = cfg.tolerances.rule();
    for (name, g, default) in generators(cfg, &subject)? {
        let sched = schedule(cfg, default)?;
        let mut r = normalizability_report(&g, &sched)?;
        r.bessel = reclassify(r.bessel, &rule);
        r.lower = reclassify(r.lower, &rule);
        r.frame_normalizable = r.bessel.is_bounded() && r.lower.is_bounded();
        report.push(Record::new("normalizability", &name, &r));
        match classify_category(&g, &sched, None) {
            Ok(c) => report.push(Record::new("category", &name, c)),
            Err(FrameError::PreconditionFailed(msg)) => report.warn(format!("{name}: no category: {msg}")),
            Err(e) => return Err(e.into()),
        }
    }
    if let Subject::Gallery(e) = &subject {
        goldens(&mut report, e)?;
    }
    Ok(report)
}

const PERTURB_LEVEL: usize = 32;

#[derive(Serialize)]
struct PerturbSetup {
    level: usize,
    params: PerturbationParams,
    x_bounds: FrameBounds,
    y_bounds: FrameBounds,
    guaranteed: Option<(f64, f64)>,
}

pub fn cmd_perturb(cfg: &RunConfig) -> CliResult<Report> {
    let (subject, bytes) = load(cfg)?;
    let subject = require(subject, "perturb")?;
    let mut report = Report::new(cfg, bytes.as_deref());
    let level = cfg.size.unwrap_or(PERTURB_LEVEL);
    let defaults = match &subject {
        Subject::Gallery(e) if e.id == "rem4.4b" => (1.0, 0.0, 0.0),
        _ => (0.0, 0.1, 0.0),
    };
    let params = PerturbationParams::new(
        cfg.lambda.unwrap_or(defaults.0),
        cfg.mu.unwrap_or(defaults.1),
        cfg.nu.unwrap_or(defaults.2),
    )?;
    let (name, x, y) = match &subject {
        Subject::Gallery(GalleryEntry { object: GalleryObject::Pair { x, y }, id, .. }) => {
            (id.clone(), x.materialize(level)?, y.materialize(level)?)
        }
        Subject::Input(InputData::Pair(x, y)) => ("input".to_string(), x.clone(), y.clone()),
        Subject::Gallery(GalleryEntry { object: GalleryObject::Sequence { generator }, id, .. }) => {
            let x = generator.materialize(level)?;
            let y = random_perturbation(&x, params.mu, cfg.seed)?;
            (id.clone(), x, y)
        }
        Subject::Input(InputData::Sequence(x)) => {
            ("input".to_string(), x.clone(), random_perturbation(x, params.mu, cfg.seed)?)
        }
        _ => return Err(CliError::ConfigParse("perturb needs a pair or a single sequence".into())),
    };
    if matches!(
        subject,
        Subject::Gallery(GalleryEntry { object: GalleryObject::Sequence { .. }, .. })
            | Subject::Input(InputData::Sequence(_))
    ) {
        report.warn(format!("{name}: y = x + E with a seeded random E of operator norm mu/2"));
    }
    let d = x.ambient_dim().max(y.ambient_dim());
    let (x, y) = (x.padded(d), y.padded(d));
    let xb = frame_bounds(&x)?;
    let setup = PerturbSetup {
        level,
        params,
        x_bounds: xb,
        y_bounds: frame_bounds(&y)?,
        guaranteed: guaranteed_bounds(xb.ambient_lower, xb.upper_opt, &params).ok(),
    };
    report.push(Record::new("setup", &name, setup));
    report.push(Record::new("inequality", &name, check_inequality_41(&x, &y, &params, cfg.seed)?));
    match verify_perturbation(&x, &y, &params, cfg.seed) {
        Ok(r) => {
            report.verdict(format!("{name}: actual bounds inside the guaranteed interval"), r.contained);
            report.push(Record::new("guaranteed_vs_actual", &name, r));
        }
        Err(FrameError::HypothesisFailed(msg)) => {
            report.warn(format!("{name}: guaranteed interval not applicable: {msg}"))
        }
        Err(e) => return Err(e.into()),
    }
    let variants = [
        NormalizableVariant::A { lambda: params.lambda, nu: params.nu },
        NormalizableVariant::B { k: params.mu },
        NormalizableVariant::C { k: params.mu },
    ];
    for v in variants {
        match check_normalizable_perturb(&x, &y, v, cfg.seed) {
            Ok(r) => report.push(Record::new("normalizable_perturbation", &name, r)),
            Err(
                e @ (FrameError::HypothesisFailed(_) | FrameError::Inadmissible(_) | FrameError::PreconditionFailed(_)),
            ) => report.warn(format!("{name}: variant {v:?}: {e}")),
            Err(e) => return Err(e.into()),
        }
    }
    if let Subject::Gallery(e) = &subject {
        if matches!(e.object, GalleryObject::Pair { .. }) {
            goldens(&mut report, e)?;
        }
    }
    Ok(report)
}

/// `x_n + E e_n` with a seeded Gaussian `E` rescaled to operator norm `mu / 2`.
fn random_perturbation(x: &VectorSequence, mu: f64, seed: u64) -> CliResult<VectorSequence> {
    let mut rng = random::rng(random::derive_seed(seed, 0x9e47));
    let e = random::matrix(&mut rng, x.ambient_dim(), x.len());
    let top = framelab::singular_values(&e)?.first().copied().unwrap_or(0.0);
    let scale = if top > 0.0 { 0.5 * mu / top } else { 0.0 };
    Ok(x.try_map(|k, v| ComplexVector::from_dvector(v.as_dvector() + e.column(k) * C64::new(scale, 0.0)))?
        .with_label("perturbed"))
}

pub fn cmd_iterate(cfg: &RunConfig) -> CliResult<Report> {
    let (subject, bytes) = load(cfg)?;
    let subject = require(subject, "iterate")?;
    let mut report = Report::new(cfg, bytes.as_deref());
    let rule = cfg.tolerances.rule();
    match &subject {
        Subject::Gallery(GalleryEntry { object: GalleryObject::System { system }, id, .. }) => {
            let k = cfg.size.unwrap_or(12);
            let mut r = thm313_report(k, &THM313_PROXY_SCHEDULE, &THM313_NORMALIZED_SCHEDULE)?;
            r.normalized = reclassify(r.normalized, &rule);
            report.push(Record::new("carleson_system", id, r));
            for (s, seed) in system.seeds.iter().enumerate() {
                let t = norm_trajectory(&system.op, seed, system.n_max.min(4096))?;
                report.push(Record::new("trajectory", &format!("{id}/seed{s}"), t));
            }
        }
        Subject::Gallery(GalleryEntry { object: GalleryObject::Orbit { op, seed }, id, .. }) => {
            let sched = schedule(cfg, TruncationSchedule::default())?;
            let mut r = compact_iteration_probe(op, std::slice::from_ref(seed), &sched)?;
            r.normalized = r.normalized.map(|v| reclassify(v, &rule));
            report.push(Record::new("compact_iteration", id, r));
            report.push(Record::new("trajectory", id, norm_trajectory(op, seed, 64)?));
        }
        Subject::Input(InputData::System { operator, seeds, depth }) => {
            let op = dense_operator(operator.clone())?;
            for (s, seed) in seeds.iter().enumerate() {
                report.push(Record::new("trajectory", &format!("input/seed{s}"), norm_trajectory(&op, seed, *depth)?));
            }
            let lin = LinearOperator::new(operator.clone())?;
            if (lin.operator_norm()? - 1.0).abs() <= 1e-9 {
                report.push(Record::new("fixed_points", "input", fixed_point_probe(&lin, seeds)?));
            }
            let eig = diagonal_entries(&lin);
            if let Some(eig) = eig.filter(|e| e.iter().all(|z| z.norm() < 1.0)) {
                match carleson_product(&eig, eig.len()) {
                    Ok(c) => report.push(Record::new("carleson_product", "input", c)),
                    Err(e) => report.warn(format!("carleson product: {e}")),
                }
            }
            let spec = IterativeSystemSpec::new(op, seeds.clone(), *depth)?;
            let x = orbit(&spec, &mut report)?;
            let nb = frame_bounds(&normalize(&x))?;
            report.push(Record::new("normalized_orbit_bounds", "input", nb));
        }
        Subject::Input(InputData::Sequence(_) | InputData::Pair(..)) | Subject::Gallery(_) => {
            for (name, g, default) in generators(cfg, &subject)? {
                let sched = schedule(cfg, default)?;
                for kind in [
                    WitnessKind::VanishingNorms { subspace: SubspaceRule::Ambient },
                    WitnessKind::GrowingNorms { subspace: SubspaceRule::Ambient },
                ] {
                    match nonnormalizability_witness(&g, kind.clone(), &sched) {
                        Ok(mut w) => {
                            w.normalized = reclassify(w.normalized, &rule);
                            report.push(Record::new("witness", &name, w));
                        }
                        Err(e @ FrameError::HypothesisFailed(_)) => report.warn(format!("{name}: {kind:?}: {e}")),
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
    }
    if let Subject::Gallery(e) = &subject {
        goldens(&mut report, e)?;
    }
    Ok(report)
}

/// Diagonal entries when the operator is diagonal.
fn diagonal_entries(op: &LinearOperator) -> Option<Vec<C64>> {
    op.is_diagonal().then(|| op.matrix().diagonal().iter().copied().collect())
}

#[derive(Serialize)]
struct FactorizationSummary {
    product_check: f64,
    cx_bessel: DivergenceVerdict,
    dy_bessel: DivergenceVerdict,
}

#[derive(Serialize)]
pub struct MultiplierRecord {
    pub expected: Option<Stability>,
    pub orlicz_tail: DivergenceVerdict,
    pub unconditional: framelab::multiplier::UnconditionalReport,
    factorization: Option<FactorizationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    factorization_error: Option<String>,
    /// Observed verdict matches the expected one, Orlicz divergence implies
    /// instability, and Stable coincides with a Bounded `{d_n y_n}` probe
    /// unless that probe is Inconclusive.
    pub consistent: bool,
}

impl MultiplierRecord {
    pub fn product_check(&self) -> Option<f64> {
        self.factorization.as_ref().map(|f| f.product_check)
    }

    pub fn orlicz_contrapositive(&self) -> bool {
        !self.orlicz_tail.is_divergent() || self.unconditional.verdict == Stability::Unstable
    }

    pub fn stable_iff_bounded(&self) -> bool {
        self.factorization
            .as_ref()
            .is_some_and(|f| (self.unconditional.verdict == Stability::Stable) == f.dy_bessel.is_bounded())
    }
}

pub fn multiplier_record(
    inst: &MultiplierInstance,
    trials: usize,
    sched: &TruncationSchedule,
    seed: u64,
) -> CliResult<MultiplierRecord> {
    let orlicz = orlicz_tail(&inst.spec, inst.probe, sched)?;
    let unconditional = unconditional_probe(&inst.spec, inst.probe, trials, sched, seed)?;
    let (factorization, factorization_error) = match bs_factorization(&inst.spec, 1.0, sched) {
        Ok(f) => (
            Some(FactorizationSummary {
                product_check: f.product_check,
                cx_bessel: f.cx_bessel,
                dy_bessel: f.dy_bessel,
            }),
            None,
        ),
        Err(e @ FrameError::PreconditionFailed(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let mut r = MultiplierRecord {
        expected: Some(inst.expected),
        orlicz_tail: orlicz,
        unconditional,
        factorization,
        factorization_error,
        consistent: false,
    };
    let undecided =
        r.factorization.as_ref().is_some_and(|f| f.dy_bessel.classification == Classification::Inconclusive);
    r.consistent = r.unconditional.verdict == inst.expected
        && r.orlicz_contrapositive()
        && (r.stable_iff_bounded() || undecided)
        && r.product_check().is_some_and(|p| p <= 1e-12);
    Ok(r)
}

pub fn cmd_multiplier(cfg: &RunConfig) -> CliResult<Report> {
    if cfg.input.is_some() {
        return Err(CliError::ConfigParse("multiplier takes --gallery orthoblock or no subject".into()));
    }
    let mut report = Report::new(cfg, None);
    let instances = match cfg.gallery.as_deref() {
        None => gallery::multiplier_suite(),
        Some("orthoblock") => vec![MultiplierInstance {
            name: "orthoblock".into(),
            spec: gallery::orthoblock_multiplier(3, 2, framelab::tol::DEFAULT_SEED)?,
            probe: ProbeVector::PowerCoefficients { p: 1.0 },
            expected: Stability::Stable,
        }],
        Some(other) => {
            gallery::entry(other)?;
            return Err(CliError::ConfigParse(format!("gallery entry `{other}` has no multiplier")));
        }
    };
    let sched = schedule(cfg, TruncationSchedule::default())?;
    for (i, inst) in instances.iter().enumerate() {
        let r = multiplier_record(inst, cfg.trials, &sched, random::derive_seed(cfg.seed, i as u64))?;
        if !r.stable_iff_bounded() && r.consistent {
            report.warn(format!("{}: the {{d_n y_n}} Bessel probe is Inconclusive at this schedule", inst.name));
        }
        report.verdict(format!("multiplier {}", inst.name), r.consistent);
        report.push(Record::new("multiplier", &inst.name, r));
    }
    Ok(report)
}
