use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use framelab::multiplier::DEFAULT_TRIALS;
use framelab::{tol, TruncationSchedule, VerdictRule};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "framelab", version, about = "Frame bounds, normalizability and iterative-system probes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Gallery entry to analyse (ex3.2, ex3.11, ex3.12, rem4.4b, rem4.4c, orthoblock, thm3.13, compactfp).
    #[arg(long, global = true)]
    pub gallery: Option<String>,

    /// JSON input: a sequence as an array of vectors of [re, im] pairs, an
    /// object {"x": .., "y": ..}, or {"operator": .., "seeds": .., "depth": n}.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Geometric truncation schedule N0,k meaning N0, 2 N0, ..., 2^k N0.
    #[arg(long, global = true, value_name = "N0,k")]
    pub schedule: Option<String>,

    /// One truncation level for analyze and perturb, or the number of
    /// diagonal entries K for iterate on thm3.13.
    #[arg(long, global = true)]
    pub size: Option<usize>,

    /// Root seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true)]
    pub seed: Option<String>,

    /// Perturbation parameter lambda, weight of the synthesis norm of x
    #[arg(long, global = true)]
    pub lambda: Option<f64>,

    /// Perturbation parameter mu, weight of the coefficient norm
    #[arg(long, global = true)]
    pub mu: Option<f64>,

    /// Perturbation parameter nu, weight of the synthesis norm of y
    #[arg(long, global = true)]
    pub nu: Option<f64>,

    /// Sign and permutation trials for the unconditional probe.
    #[arg(long, global = true)]
    pub trials: Option<usize>,

    /// Tolerance override KEY=VALUE (parseval, plateau, divergence_factor).
    #[arg(long = "tol", global = true, value_name = "KEY=VALUE")]
    pub tolerances: Vec<String>,

    /// Flat key = value file, or a JSON object with the same keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Print the JSON report on stdout instead of the text summary.
    #[arg(long, global = true)]
    pub json: bool,

    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Frame bounds, canonical Parseval frame, minimality and projection model.
    Analyze,
    /// Normalization probes and the category classifier.
    Normalize,
    /// Perturbation certificates, guaranteed against actual bounds.
    Perturb,
    /// Orbits, Carleson products and non-normalizability witnesses.
    Iterate,
    /// Orlicz tails, unconditional probes and factorizations.
    Multiplier,
    /// The full acceptance suite.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analyze => "analyze",
            Self::Normalize => "normalize",
            Self::Perturb => "perturb",
            Self::Iterate => "iterate",
            Self::Multiplier => "multiplier",
            Self::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleOverride {
    pub n0: usize,
    pub k: u32,
}

impl ScheduleOverride {
    pub fn parse(s: &str) -> CliResult<Self> {
        let bad = || CliError::ConfigParse(format!("schedule must look like N0,k with N0 >= 1, got `{s}`"));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let n0: usize = a.trim().parse().map_err(|_| bad())?;
        let k: u32 = b.trim().parse().map_err(|_| bad())?;
        if n0 == 0 || k > 20 {
            return Err(bad());
        }
        Ok(Self { n0, k })
    }

    pub fn schedule(&self) -> TruncationSchedule {
        TruncationSchedule::geometric(self.n0, self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// `max|S − I|` accepted as Parseval.
    pub parseval: f64,
    pub plateau: f64,
    pub divergence_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { parseval: tol::PARSEVAL, plateau: tol::PLATEAU_TOL, divergence_factor: tol::DIVERGENCE_FACTOR }
    }
}

impl Tolerances {
    pub fn set(&mut self, key: &str, value: f64) -> CliResult<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::ConfigParse(format!("tolerance `{key}` must be positive, got {value}")));
        }
        match key {
            "parseval" => self.parseval = value,
            "plateau" => self.plateau = value,
            "divergence_factor" if value > 1.0 => self.divergence_factor = value,
            "divergence_factor" => {
                return Err(CliError::ConfigParse(format!("divergence_factor must exceed 1, got {value}")));
            }
            other => return Err(CliError::ConfigParse(format!("unknown tolerance `{other}`"))),
        }
        Ok(())
    }

    pub fn rule(&self) -> VerdictRule {
        VerdictRule { plateau_tol: self.plateau, divergence_factor: self.divergence_factor }
    }

    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub gallery: Option<String>,
    pub input: Option<PathBuf>,
    pub schedule: Option<ScheduleOverride>,
    pub size: Option<usize>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub json: bool,
    #[serde(skip)]
    pub timing: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            gallery: None,
            input: None,
            schedule: None,
            size: None,
            lambda: None,
            mu: None,
            nu: None,
            trials: DEFAULT_TRIALS,
            seed: tol::DEFAULT_SEED,
            tolerances: Tolerances::default(),
            out: None,
            json: false,
            timing: false,
        }
    }

    /// Defaults, then the config file, then explicit flags.
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let mut cfg = Self::new(cli.command);
        if let Some(path) = &cli.config {
            for (k, v) in read_config_file(path)? {
                cfg.apply(&k, &v)?;
            }
        }
        let flags: [(&str, Option<String>); 9] = [
            ("gallery", cli.gallery),
            ("input", cli.input.map(|p| p.display().to_string())),
            ("schedule", cli.schedule),
            ("size", cli.size.map(|v| v.to_string())),
            ("seed", cli.seed),
            ("lambda", cli.lambda.map(|v| v.to_string())),
            ("mu", cli.mu.map(|v| v.to_string())),
            ("nu", cli.nu.map(|v| v.to_string())),
            ("trials", cli.trials.map(|v| v.to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.apply(k, &v)?;
            }
        }
        for t in &cli.tolerances {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| CliError::ConfigParse(format!("--tol expects KEY=VALUE, got `{t}`")))?;
            cfg.apply(&format!("tol.{}", k.trim()), v.trim())?;
        }
        if let Some(out) = cli.out {
            cfg.out = Some(out);
        }
        cfg.json |= cli.json;
        cfg.timing |= cli.timing;
        Ok(cfg)
    }

    pub fn apply(&mut self, key: &str, value: &str) -> CliResult<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
            v.parse().map_err(|_| CliError::ConfigParse(format!("`{key}` has an invalid value `{v}`")))
        }
        fn param(key: &str, v: &str) -> CliResult<f64> {
            let x: f64 = num(key, v)?;
            if x >= 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(CliError::ConfigParse(format!("`{key}` must be finite and non-negative, got {v}")))
            }
        }
        match key {
            "gallery" => self.gallery = Some(value.to_string()),
            "input" => self.input = Some(PathBuf::from(value)),
            "schedule" => self.schedule = Some(ScheduleOverride::parse(value)?),
            "size" => {
                let n: usize = num(key, value)?;
                if n == 0 {
                    return Err(CliError::ConfigParse("size must be at least 1".into()));
                }
                self.size = Some(n);
            }
            "seed" => self.seed = parse_seed(value)?,
            "lambda" => self.lambda = Some(param(key, value)?),
            "mu" => self.mu = Some(param(key, value)?),
            "nu" => self.nu = Some(param(key, value)?),
            "trials" => {
                let n: usize = num(key, value)?;
                if n < 100 {
                    return Err(CliError::ConfigParse(format!("trials must be at least 100, got {n}")));
                }
                self.trials = n;
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "json" => self.json = num(key, value)?,
            "timing" => self.timing = num(key, value)?,
            _ => match key.strip_prefix("tol.") {
                Some(t) => self.tolerances.set(t, num(key, value)?)?,
                None => return Err(CliError::ConfigParse(format!("unknown configuration key `{key}`"))),
            },
        }
        Ok(())
    }
}

pub fn parse_seed(s: &str) -> CliResult<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => s.replace('_', "").parse(),
    };
    parsed.map_err(|_| CliError::ConfigParse(format!("seed must be an unsigned 64-bit integer, got `{s}`")))
}

/// Key/value pairs in file order. A file whose first non-blank character is
/// `{` is read as a JSON object; nested objects flatten to `outer.inner`.
pub fn read_config_file(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::ConfigParse(format!("{}: {e}", path.display())))?;
        let mut out = BTreeMap::new();
        flatten_json("", &value, &mut out)?;
        return Ok(out.into_iter().collect());
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::ConfigParse(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        out.push((k.trim().to_string(), v.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

fn flatten_json(prefix: &str, v: &serde_json::Value, out: &mut BTreeMap<String, String>) -> CliResult<()> {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_json(&key, inner, out)?;
            }
        }
        Value::String(s) => {
            out.insert(prefix.to_string(), s.clone());
        }
        Value::Number(n) => {
            out.insert(prefix.to_string(), n.to_string());
        }
        Value::Bool(b) => {
            out.insert(prefix.to_string(), b.to_string());
        }
        _ => return Err(CliError::ConfigParse(format!("`{prefix}` must be a string, number or boolean"))),
    }
    Ok(())
}
