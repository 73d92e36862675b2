mod config;
mod experiment;
mod manifest;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use config::Settings;
use manifest::{CheckRecord, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl From<twistmoments::Error> for CliError {
    fn from(e: twistmoments::Error) -> Self {
        use twistmoments::Error as E;
        match e {
            E::InvalidArgument(_) | E::OutOfRange { .. } | E::EvenArgument(_) | E::NotSquarefree(_) | E::FactorZero => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Failure(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "twistmoments", version, about = "Verification suites and experiments for twisted L-value moments")]
struct Cli {
    /// Settings file of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for CSV outputs and JSON manifests.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a module's invariant suite.
    Verify { suite: Suite },
    /// Run an experiment and write its tables.
    Experiment {
        #[command(subcommand)]
        name: experiment::Experiment,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Suite {
    Arith,
    Charsum,
    Hecke,
    Special,
    Random,
    Mollifier,
}

/// State shared by one invocation: resolved settings, output directory and
/// the checks collected for the manifest.
pub struct Run {
    pub settings: Settings,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub checks: Vec<CheckRecord>,
    pub outputs: Vec<String>,
}

impl Run {
    pub fn check(&mut self, c: CheckRecord) {
        let status = if c.passed { "pass" } else { "FAIL" };
        println!("{status:4}  {:<40} residual {:.3e} tol {:.1e}  {}", c.name, c.residual, c.tolerance, c.detail);
        self.checks.push(c);
    }

    pub fn output(&mut self, path: PathBuf) {
        println!("wrote {}", path.display());
        self.outputs.push(path.display().to_string());
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let start = Instant::now();
    let mut settings = Settings::load(cli.config.as_deref())?;
    let threads = settings.get("threads", cli.threads, 0usize)?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Failure(e.to_string()))?;
    }
    let out = PathBuf::from(settings.get("out", cli.out.map(|p| p.display().to_string()), "out".to_string())?);
    let mut run = Run {
        settings,
        out,
        seed: None,
        checks: Vec::new(),
        outputs: Vec::new(),
    };
    let stem = match cli.command {
        Command::Verify { suite } => {
            verify::run(suite, &mut run)?;
            format!("verify-{}", suite.to_possible_value().unwrap().get_name())
        }
        Command::Experiment { name } => experiment::run(name, &mut run)?,
    };
    let passed = run.checks.iter().all(|c| c.passed);
    let manifest_path = run.out.join(format!("{stem}.json"));
    let manifest = RunManifest {
        command_line: std::env::args().collect(),
        config: run.settings.used().clone(),
        seed: run.seed,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        checks: run.checks,
        outputs: run.outputs,
        passed,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    manifest.write(&manifest_path)?;
    println!("manifest {}", manifest_path.display());
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
