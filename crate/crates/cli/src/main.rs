//! `bo-nfr`: batch verification, scans and simulations.
//!
//! Exit status is 0 when every check passes, 1 when a check fails or the run
//! breaks down, and 2 for configuration errors.

mod commands;
mod config;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use commands::CmdError;
use config::{Command, ConfigError, Fault, Format, RunConfig, Settings};
use report::{write_outcome, Outcome};

#[derive(Parser)]
#[command(name = "bo-nfr", version, about = "Normal-form reduction checks for periodic Benjamin-Ono")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML file with the same keys as the flags (kebab-case); flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<CmdError> for Failure {
    fn from(e: CmdError) -> Self {
        match e {
            CmdError::Config(m) => Failure::Config(m),
            CmdError::Run(m) => Failure::Run(m),
        }
    }
}

fn io_failure(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Config(format!("cannot write {}: {e}", path.display()))
}

fn emit(cfg: &RunConfig, outcome: &Outcome, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let f = File::create(path).map_err(io_failure(path))?;
            let mut w = BufWriter::new(f);
            write_outcome(cfg, outcome, &mut w).map_err(io_failure(path))?;
            w.flush().map_err(io_failure(path))
        }
        None => {
            let stdout = io::stdout();
            write_outcome(cfg, outcome, stdout.lock()).map_err(|e| Failure::Run(format!("stdout: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let base = match &cli.config {
        Some(path) => Settings::from_toml_file(path)?,
        None => Settings::default(),
    };
    let settings = base.overlay(&cli.settings);
    let cfg = settings.resolve(cli.command)?;

    if let Some(w) = settings.workers {
        if w == 0 {
            return Err(Failure::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure::Config(format!("worker pool: {e}")))?;
    }
    if cfg.inject_fault == Some(Fault::M1Sign) {
        bo_core::nfr::fault::set_m1_sign_fault(true);
    }

    let out = settings.out.as_deref();
    let outcome = match cfg.command {
        Command::VerifyIdentities => commands::verify_identities(&cfg)?,
        Command::VerifyEstimates => commands::verify_estimates(&cfg)?,
        Command::NfrCheck => commands::nfr_check(&cfg)?,
        Command::Uniqueness => commands::uniqueness(&cfg)?,
        Command::Simulate => {
            let sim = commands::simulate(&cfg)?;
            // the JSON report stays small; the states go next to it
            if let (Format::Json, Some(path)) = (cfg.format, out) {
                let mut name = path.as_os_str().to_owned();
                name.push(".trajectory.csv");
                let side = PathBuf::from(name);
                let f = File::create(&side).map_err(io_failure(&side))?;
                let mut w = BufWriter::new(f);
                sim.trajectory.write_csv(&mut w).map_err(io_failure(&side))?;
                w.flush().map_err(io_failure(&side))?;
            }
            sim.outcome
        }
    };
    emit(&cfg, &outcome, out)?;

    let failed: Vec<&str> = outcome.results["failed"]
        .as_array()
        .map(|a| a.iter().filter_map(|x| x.as_str()).collect())
        .unwrap_or_default();
    if outcome.passed {
        eprintln!("{}: pass", cfg.command.name());
    } else {
        eprintln!("{}: FAIL ({})", cfg.command.name(), failed.join(", "));
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("bo-nfr: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("bo-nfr: {m}");
            ExitCode::from(1)
        }
    }
}
