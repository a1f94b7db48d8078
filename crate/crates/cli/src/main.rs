//! `sig`: run, validate and map bounds from JSON scenario files.

mod error;
mod model;
mod output;
mod run;
mod scenario;
mod units;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;
use crate::scenario::{Kind, Scenario};

/// Environment variable holding the default output directory.
const OUT_DIR_ENV: &str = "SIG_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "sig", version, about = "Stochastic-gravity decoherence simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its CSV tables and JSON summary.
    Run(Common),
    /// Check a scenario and print its derived quantities without running it.
    Validate(Common),
    /// Compute an exclusion map from a bounds scenario.
    Bounds(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file.
    file: PathBuf,
    /// Base seed; overrides the scenario's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides `numerics.threads`.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides `output.dir` and SIG_OUT_DIR.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn out_dir(common: &Common, scenario: &Scenario) -> PathBuf {
    common
        .out_dir
        .clone()
        .or_else(|| scenario.output.dir.as_ref().map(|d| scenario.base_dir.join(d)))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("sig-out"))
}

fn set_threads(common: &Common, scenario: &Scenario) -> Result<(), CliError> {
    if let Some(n) = common.threads.or(scenario.numerics.threads) {
        if n == 0 {
            return Err(CliError::validation("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn execute(common: &Common, scenario: &Scenario) -> Result<(), CliError> {
    set_threads(common, scenario)?;
    let seed = common.seed.or(scenario.seed).unwrap_or(0);
    let bundle = run::run(scenario, seed)?;
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }
    report(&bundle.write(&out_dir(common, scenario), scenario, seed)?);
    Ok(())
}

fn validate(scenario: &Scenario) -> Result<(), CliError> {
    let audit = model::audit(scenario)?;
    for line in audit.lines() {
        println!("{line}");
    }
    match audit.first_failure() {
        Some(c) => Err(CliError::validation(c.name.clone(), &c.detail)),
        None => Ok(()),
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let load = |p: &Path| Scenario::load(p);
    match &cli.command {
        Command::Run(c) => execute(c, &load(&c.file)?),
        Command::Validate(c) => validate(&load(&c.file)?),
        Command::Bounds(c) => {
            let s = load(&c.file)?;
            if s.kind != Kind::Bounds {
                return Err(CliError::validation("kind", format!("expected bounds, found {}", s.kind.name())));
            }
            execute(c, &s)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
