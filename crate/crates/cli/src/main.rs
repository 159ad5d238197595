use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use cobound_cli::config::{CertificateRequest, OrliczParams};
use cobound_cli::{
    check_suite, exit_code, finish, orlicz_with, CommandName, Options, RunConfig, ValidationError,
};

#[derive(Parser)]
#[command(
    name = "cobound",
    version,
    about = "Martingale-coboundary decomposition pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads (COBOUND_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Fail with status 4 when an acceptance check fails.
    #[arg(long, global = true)]
    check: bool,
    /// Output directory; overrides the config's `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run whichever command the config names.
    Run(ConfigArg),
    Decompose(ConfigArg),
    Verify(ConfigArg),
    Deviations(ConfigArg),
    Limits(ConfigArg),
    Tightness(ConfigArg),
    /// Counterexample report, or a single certificate with --n/--lambda/--M.
    Orlicz {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long = "M")]
        m: Option<f64>,
    },
    /// Run every config in a directory in check mode.
    CheckSuite {
        dir: PathBuf,
    },
}

fn threads(flag: Option<usize>) -> Result<()> {
    let env = std::env::var("COBOUND_THREADS").ok();
    let n = match env {
        Some(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| ValidationError(format!("COBOUND_THREADS = {v:?} is not a count")))?,
        ),
        None => flag,
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn load_as(path: &Path, expected: CommandName) -> Result<RunConfig> {
    let cfg = RunConfig::load(path)?;
    if cfg.command != expected {
        return Err(ValidationError(format!(
            "{} is a {} config, not {expected}",
            path.display(),
            cfg.command
        ))
        .into());
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8> {
    threads(cli.threads)?;
    let opts = Options {
        check: cli.check,
        quiet: cli.quiet,
        out: cli.out.clone(),
        stdout_fallback: true,
    };
    let cfg = match cli.command {
        Cmd::CheckSuite { dir } => {
            let report = check_suite(
                &dir,
                &Options {
                    stdout_fallback: false,
                    ..opts
                },
            )?;
            let failed: Vec<_> = report.entries.iter().filter(|e| e.status != 0).collect();
            if !cli.quiet {
                println!("{} configs, {} failed", report.entries.len(), failed.len());
            }
            return Ok(report.status());
        }
        Cmd::Orlicz {
            config,
            n,
            lambda,
            m,
        } => {
            let (mut params, out) = match &config {
                Some(path) => {
                    let cfg = load_as(path, CommandName::Orlicz)?;
                    (cfg.params::<OrliczParams>()?, cfg.out)
                }
                None => (OrliczParams::default(), None),
            };
            match (n, lambda, m) {
                (Some(n), Some(lambda), Some(m)) => {
                    params.certificate = Some(CertificateRequest { n, lambda, m })
                }
                (None, None, None) => {}
                _ => return Err(ValidationError("--n, --lambda and --M go together".into()).into()),
            }
            let outcome = orlicz_with(CommandName::Orlicz, &params)?;
            finish(&outcome, opts.out.as_deref().or(out.as_deref()), &opts)?;
            return Ok(0);
        }
        Cmd::Run(a) => RunConfig::load(&a.config)?,
        Cmd::Decompose(a) => load_as(&a.config, CommandName::Decompose)?,
        Cmd::Verify(a) => load_as(&a.config, CommandName::Verify)?,
        Cmd::Deviations(a) => load_as(&a.config, CommandName::Deviations)?,
        Cmd::Limits(a) => load_as(&a.config, CommandName::Limits)?,
        Cmd::Tightness(a) => load_as(&a.config, CommandName::Tightness)?,
    };
    cobound_cli::execute(&cfg, &opts)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
