//! Command-line driver: run experiments, sweep the bulk modulus, run the
//! built-in acceptance suite and inspect snapshot files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qins::fields::L2Norm;
use qins::harness::verify::verify;
use qins::harness::{read_field, resolve_out_dir, run_experiment, ExperimentConfig, ExperimentKind, FieldData};
use qins::{Error, Result};

const OUT_ENV: &str = "QINS_OUT";

#[derive(Parser, Debug)]
#[command(name = "qins", version, about = "Quasi-incompressible Navier-Stokes laboratory on a periodic grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (alternative to the positional argument).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for parallel sweeps; defaults to all cores.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Output directory; overrides the configuration and QINS_OUT.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run { path: Option<PathBuf> },
    /// Run a K-sweep configuration.
    SweepK { path: Option<PathBuf> },
    /// Run the acceptance suite twice and compare output checksums.
    Verify,
    /// Print the header and norms of a snapshot file.
    Inspect { snapshot: PathBuf },
}

fn config_path(positional: Option<PathBuf>, flag: Option<PathBuf>) -> Result<PathBuf> {
    positional
        .or(flag)
        .ok_or_else(|| Error::Experiment("no configuration given: pass <config.json> or --config".into()))
}

fn out_dir(cli_out: Option<&Path>, configured: Option<&Path>, experiment: &str) -> PathBuf {
    let env = std::env::var_os(OUT_ENV).map(PathBuf::from);
    resolve_out_dir(cli_out, configured, env.as_deref(), experiment)
}

fn run(path: &Path, cli: &Cli, expect: Option<ExperimentKind>) -> Result<bool> {
    let cfg = ExperimentConfig::load(path)?;
    if let Some(kind) = expect {
        if cfg.experiment != kind {
            return Err(Error::Experiment(format!(
                "expected experiment {}, got {}",
                kind.name(),
                cfg.experiment.name()
            )));
        }
    }
    let dir = out_dir(cli.out.as_deref(), cfg.out_dir.as_deref(), cfg.experiment.name());
    let outcome = run_experiment(&cfg, &dir)?;
    if !cli.quiet {
        println!("{}", serde_json::to_string_pretty(&outcome.report)?);
        println!("wrote {} files to {}", outcome.files.len() + 1, dir.display());
    }
    Ok(true)
}

fn run_verify(cli: &Cli) -> Result<bool> {
    let dir = out_dir(cli.out.as_deref(), None, "verify");
    let quiet = cli.quiet;
    let outcome = verify(&dir, |r| {
        if !quiet || !r.passed {
            println!("{}", r.line());
        }
    })?;
    if !quiet {
        let passed = outcome.results.iter().filter(|r| r.passed).count();
        println!("{passed}/{} criteria passed; results in {}", outcome.results.len(), dir.display());
    }
    Ok(outcome.passed())
}

fn inspect(path: &Path) -> Result<bool> {
    let (header, data) = read_field(path)?;
    println!("{}", serde_json::to_string_pretty(&header)?);
    match data {
        FieldData::Scalar(f) => {
            println!("l2_norm  {:.17e}", f.l2_norm());
            println!("max_abs  {:.17e}", f.max_abs());
            println!("mean     {:.17e}", f.mean());
        }
        FieldData::Vector(f) => {
            println!("l2_norm        {:.17e}", f.l2_norm());
            println!("max_magnitude  {:.17e}", f.max_magnitude());
            println!("divergence_l2  {:.17e}", qins::operators::divergence(&f).l2_norm());
        }
    }
    Ok(true)
}

fn execute(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Experiment(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Run { path } => run(&config_path(path.clone(), cli.config.clone())?, cli, None),
        Command::SweepK { path } => {
            run(&config_path(path.clone(), cli.config.clone())?, cli, Some(ExperimentKind::KSweep))
        }
        Command::Verify => run_verify(cli),
        Command::Inspect { snapshot } => inspect(snapshot),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
