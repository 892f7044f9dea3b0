use framelab::gallery::GoldenCheck;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: &str = "1";

/// One analysis on one subject.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub operation: String,
    pub subject: String,
    pub data: Value,
    /// Reference values with their origin, compared against this run.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub goldens: Vec<GoldenCheck>,
}

impl Record {
    pub fn new(operation: &str, subject: &str, data: impl Serialize) -> Self {
        Self {
            operation: operation.to_string(),
            subject: subject.to_string(),
            data: serde_json::to_value(data).expect("report data serializes"),
            goldens: Vec::new(),
        }
    }

    pub fn with_goldens(mut self, goldens: Vec<GoldenCheck>) -> Self {
        self.goldens = goldens;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictLine {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandEcho {
    pub name: &'static str,
    pub config: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: CommandEcho,
    /// SHA-256 of the echoed configuration followed by the input file bytes.
    pub inputs_digest: String,
    pub results: Vec<Record>,
    pub verdicts: Vec<VerdictLine>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    pub fn new(config: &RunConfig, input_bytes: Option<&[u8]>) -> Self {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(config).expect("config serializes"));
        if let Some(b) = input_bytes {
            h.update(b);
        }
        Self {
            schema_version: SCHEMA_VERSION,
            command: CommandEcho { name: config.command.name(), config: config.clone() },
            inputs_digest: hex::encode(h.finalize()),
            results: Vec::new(),
            verdicts: Vec::new(),
            warnings: Vec::new(),
            timing: None,
        }
    }

    pub fn push(&mut self, r: Record) {
        self.results.push(r);
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool) {
        self.verdicts.push(VerdictLine { name: name.into(), pass });
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// Every verdict and every golden comparison passed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass) && self.results.iter().flat_map(|r| &r.goldens).all(|g| g.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = format!("framelab {} (schema {})\n", self.command.name, self.schema_version);
        for r in &self.results {
            let failed = r.goldens.iter().filter(|g| !g.pass).count();
            let tag = match (r.goldens.len(), failed) {
                (0, _) => String::new(),
                (n, 0) => format!("  [{n} goldens ok]"),
                (n, f) => format!("  [{f}/{n} goldens FAILED]"),
            };
            s.push_str(&format!("  {} {}{}\n", r.operation, r.subject, tag));
        }
        for v in &self.verdicts {
            s.push_str(&format!("  {} {}\n", if v.pass { "PASS" } else { "FAIL" }, v.name));
        }
        for w in &self.warnings {
            s.push_str(&format!("  warning: {w}\n"));
        }
        s.push_str(if self.passed() { "result: pass\n" } else { "result: FAIL\n" });
        s
    }
}
