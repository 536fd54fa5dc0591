//! `critproc` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use critproc::report::{run, Command, PipelineConfig, ReportError, REPORT_FILE};

const THREADS_VAR: &str = "CRITPROC_THREADS";

#[derive(Parser)]
#[command(
    name = "critproc",
    version,
    about = "Identify critical process inputs from production-run data"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset with ground-truth clusters.
    Synth(Args),
    /// Ward-cluster the output measurements and profile the clusters.
    Cluster(Args),
    /// Train a forest classifier on cluster labels.
    Classify(Args),
    /// Train a forest regressor on the mean of the target columns.
    Regress(Args),
    /// Shapley attributions for a trained model.
    Explain(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Pipeline config (JSON).
    #[arg(long, value_name = "JSON")]
    config: PathBuf,
    /// Overrides every seed in the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; overrides `paths.out`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl Cmd {
    fn split(self) -> (Command, Args) {
        match self {
            Cmd::Synth(a) => (Command::Synth, a),
            Cmd::Cluster(a) => (Command::Cluster, a),
            Cmd::Classify(a) => (Command::Classify, a),
            Cmd::Regress(a) => (Command::Regress, a),
            Cmd::Explain(a) => (Command::Explain, a),
        }
    }
}

fn configure_threads() -> Result<(), ReportError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ReportError::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ReportError::Config(format!("cannot start {n} worker threads: {e}")))
}

fn execute(cmd: Cmd) -> Result<PathBuf, ReportError> {
    configure_threads()?;
    let (command, args) = cmd.split();
    let cfg = PipelineConfig::load(&args.config)?.resolved(args.seed, args.out);
    run(command, &cfg)?;
    Ok(cfg.paths.command_dir(command.name()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(dir) => {
            println!("{}", dir.join(REPORT_FILE).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("critproc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
