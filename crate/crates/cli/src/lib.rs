//! Command-line front end for `framelab`: configuration, JSON reports and
//! the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;

pub use acceptance::{cmd_verify, CriterionResult};
pub use commands::{cmd_analyze, cmd_iterate, cmd_multiplier, cmd_normalize, cmd_perturb};
pub use config::{Cli, Command, RunConfig};
pub use error::{CliError, CliResult};
pub use report::Report;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CRITERION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn run(cfg: &RunConfig) -> CliResult<Report> {
    let start = Instant::now();
    let mut report = match cfg.command {
        Command::Analyze => cmd_analyze(cfg)?,
        Command::Normalize => cmd_normalize(cfg)?,
        Command::Perturb => cmd_perturb(cfg)?,
        Command::Iterate => cmd_iterate(cfg)?,
        Command::Multiplier => cmd_multiplier(cfg)?,
        Command::Verify => cmd_verify(cfg).0,
    };
    if cfg.timing {
        report.timing = Some(report::Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 });
    }
    Ok(report)
}

/// Parse arguments, run, print, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|cfg| run(&cfg).map(|r| (cfg, r)));
    let (cfg, report) = match result {
        Ok(ok) => ok,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let json = report.to_json();
    if let Some(path) = &cfg.out {
        if let Err(source) = std::fs::write(path, format!("{json}\n")) {
            let e = CliError::Io { path: path.clone(), source };
            eprintln!("error: {e}");
            return e.exit_code();
        }
    }
    if cfg.json {
        println!("{json}");
    } else {
        print!("{}", report.summary());
    }
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_CRITERION
    }
}
