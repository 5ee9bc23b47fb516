//! Command line front end for the Monte Carlo experiments.
//!
//! Each subcommand loads a JSON config, runs one experiment, writes the
//! report CSV and a text summary into the output directory, and prints
//! the summary. The exit code is 0 when every row passes, 1 when some
//! row fails, and 2 on errors.

use clap::{Args, Parser, Subcommand};
use occusim::harness::config::ExperimentConfig;
use occusim::harness::report::{emit_report, ConvergenceReport};
use occusim::harness::{self, HarnessError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "occusim", version, about = "Occupation-measure scaling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact identity residuals of the generator algebra.
    Identities(RunArgs),
    /// Decay of the scaled centered occupation supremum.
    Ergodic(RunArgs),
    /// Martingale and fluctuation laws against their Gaussian limits.
    Fclt(RunArgs),
    /// Pathwise integrals against the limit covariances.
    Integral(RunArgs),
    /// Randomized certificates for the variation inequalities.
    Bv(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the report CSV and summary.
    #[arg(long)]
    out: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: &RunArgs, experiment: Experiment) -> Result<ConvergenceReport, HarnessError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    let base_dir = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let report = match experiment {
        Experiment::Identities => harness::run_identity_suite(&config, &base_dir)?,
        Experiment::Ergodic => harness::run_ergodic_experiment(&config, &base_dir)?,
        Experiment::Fclt => harness::run_fclt_experiment(&config, &base_dir)?,
        Experiment::Integral => harness::run_integral_experiment(&config, &base_dir)?,
        Experiment::Bv => harness::run_bv_suite(&config, &base_dir)?,
    };
    let (csv_path, _) = emit_report(&report, &args.out)?;
    println!("{}", report.summary_string());
    println!("report: {}", csv_path.display());
    Ok(report)
}

enum Experiment {
    Identities,
    Ergodic,
    Fclt,
    Integral,
    Bv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, experiment) = match &cli.command {
        Command::Identities(args) => (args, Experiment::Identities),
        Command::Ergodic(args) => (args, Experiment::Ergodic),
        Command::Fclt(args) => (args, Experiment::Fclt),
        Command::Integral(args) => (args, Experiment::Integral),
        Command::Bv(args) => (args, Experiment::Bv),
    };
    match run(args, experiment) {
        Ok(report) if report.all_pass() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
