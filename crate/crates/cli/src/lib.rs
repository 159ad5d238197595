//! Batch front end for the `cobound-core` pipelines.
//!
//! A run loads a JSON [`RunConfig`], computes every result in memory, prints
//! a short summary and then writes the artifacts atomically. In check mode
//! the acceptance checks attached to the outcome decide the exit status.

pub mod commands;
pub mod config;
pub mod errors;
pub mod output;

use std::path::{Path, PathBuf};

use anyhow::Result;

pub use commands::{orlicz_with, run_command};
pub use config::{CommandName, RunConfig};
pub use errors::{
    exit_code, CheckFailure, ValidationError, EXIT_CHECK, EXIT_OK, EXIT_RESOURCE, EXIT_VALIDATION,
};
pub use output::{write_atomic, Artifact, Check, Outcome};

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub check: bool,
    pub quiet: bool,
    /// Overrides the config's `out`.
    pub out: Option<PathBuf>,
    /// Print the primary JSON artifact when there is no output directory.
    pub stdout_fallback: bool,
}

/// Prints, writes and checks an already computed outcome.
pub fn finish(outcome: &Outcome, out: Option<&Path>, opts: &Options) -> Result<()> {
    if !opts.quiet {
        for line in &outcome.summary {
            println!("{line}");
        }
    }
    match out {
        Some(dir) => write_atomic(dir, outcome)?,
        None if opts.stdout_fallback => {
            if let Some(a) = outcome.artifacts.iter().find(|a| a.name.ends_with(".json")) {
                print!("{}", String::from_utf8_lossy(&a.bytes));
            }
        }
        None => {}
    }
    if opts.check {
        let failed = outcome.failed();
        if !failed.is_empty() {
            return Err(CheckFailure {
                failed: failed
                    .iter()
                    .map(|c| format!("{} ({})", c.name, c.detail))
                    .collect(),
            }
            .into());
        }
    }
    Ok(())
}

/// Runs one config end to end.
pub fn execute(cfg: &RunConfig, opts: &Options) -> Result<Outcome> {
    let outcome = run_command(cfg)?;
    let out = opts.out.as_deref().or(cfg.out.as_deref());
    finish(&outcome, out, opts)?;
    Ok(outcome)
}

#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub config: PathBuf,
    pub status: u8,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    /// Check failures dominate; otherwise the largest error status.
    pub fn status(&self) -> u8 {
        if self.entries.iter().any(|e| e.status == EXIT_CHECK) {
            EXIT_CHECK
        } else {
            self.entries
                .iter()
                .map(|e| e.status)
                .max()
                .unwrap_or(EXIT_OK)
        }
    }
}

/// Runs every `*.json` config in `dir`, in file name order, in check mode.
/// With `opts.out` set, each config writes into a subdirectory named after
/// its file stem.
pub fn check_suite(dir: &Path, opts: &Options) -> Result<SuiteReport> {
    if !dir.is_dir() {
        return Err(ValidationError(format!("{} is not a directory", dir.display())).into());
    }
    let mut configs: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    configs.sort();
    if configs.is_empty() {
        eprintln!("warning: no configs in {}", dir.display());
    }
    let mut report = SuiteReport::default();
    for path in configs {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let sub = Options {
            check: true,
            quiet: true,
            out: opts.out.as_ref().map(|o| o.join(&stem)),
            stdout_fallback: false,
        };
        let result = RunConfig::load(&path).and_then(|cfg| execute(&cfg, &sub));
        let (status, message) = match result {
            Ok(_) => (EXIT_OK, String::new()),
            Err(e) => (exit_code(&e), format!("{e:#}")),
        };
        if !opts.quiet {
            if status == EXIT_OK {
                println!("PASS {stem}");
            } else {
                println!("FAIL {stem}: {message}");
            }
        }
        report.entries.push(SuiteEntry {
            config: path,
            status,
            message,
        });
    }
    Ok(report)
}
