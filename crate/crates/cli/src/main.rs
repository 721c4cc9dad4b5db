//! `bo-birkhoff`: spectra, Birkhoff coordinates, flows and counterexample sweeps from the
//! command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{load_config, Params};

#[derive(Debug, Parser)]
#[command(name = "bo-birkhoff", version, about = "Periodic Benjamin-Ono spectral toolkit")]
struct Cli {
    /// Worker threads for sweeps and dense linear algebra.
    #[arg(long, global = true, env = "BO_BIRKHOFF_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues, gaps and `<1|f_n>` of the truncated Lax operator.
    Spectrum(CommandArgs),
    /// Birkhoff coordinates, actions and norming constants.
    Birkhoff(CommandArgs),
    /// Potential from Birkhoff coordinates.
    Invert(CommandArgs),
    /// Flow in Birkhoff coordinates or by direct integration.
    Evolve(CommandArgs),
    /// Escaping eigenvalue of the geometric family along a q grid.
    Counterexample(CommandArgs),
    /// Runs the invariant checks and prints a PASS/FAIL table.
    Verify(CommandArgs),
    /// Runs the command named in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, clap::Args)]
struct CommandArgs {
    /// JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

/// Exit status 1 for bad input, 2 for numerical breakdown.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<bo_birkhoff::Error> for Failure {
    fn from(e: bo_birkhoff::Error) -> Self {
        match e {
            e if e.is_validation() => Failure::Validation(e.to_string()),
            bo_birkhoff::Error::Io(_) | bo_birkhoff::Error::Json(_) => Failure::Validation(e.to_string()),
            e => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn resolve(name: &str, args: CommandArgs) -> Result<(String, Params), Failure> {
    let Some(path) = args.config else {
        return Ok((name.to_string(), args.params));
    };
    let file = load_config(&path)?;
    if let Some(c) = &file.command {
        if c != name {
            return Err(Failure::Validation(format!("config is for {c:?}, not {name:?}")));
        }
    }
    Ok((name.to_string(), args.params.over(file.params)))
}

fn setup_threads(jobs: Option<usize>) -> Result<usize, Failure> {
    let jobs = match jobs {
        Some(0) => return Err(Failure::Validation("--jobs must be at least 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Failure::Validation(format!("thread pool: {e}")))?;
    faer::set_global_parallelism(if jobs == 1 { faer::Par::Seq } else { faer::Par::rayon(jobs) });
    Ok(jobs)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let outcome = (|| {
        let jobs = setup_threads(cli.jobs)?;
        let (name, params) = match cli.command {
            Command::Spectrum(a) => resolve("spectrum", a)?,
            Command::Birkhoff(a) => resolve("birkhoff", a)?,
            Command::Invert(a) => resolve("invert", a)?,
            Command::Evolve(a) => resolve("evolve", a)?,
            Command::Counterexample(a) => resolve("counterexample", a)?,
            Command::Verify(a) => resolve("verify", a)?,
            Command::Run { config } => {
                let file = load_config(&config)?;
                let name = file.command.ok_or_else(|| Failure::Validation("config has no \"command\"".into()))?;
                (name, file.params)
            }
        };
        commands::run(&name, &params, jobs, start)
    })();
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bo-birkhoff: {f}");
            ExitCode::from(f.code())
        }
    }
}
