use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use gbo_core::experiment::report::{report, RunDir};
use gbo_core::experiment::{run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "gbo", version, about = "Bayesian optimization over sets of graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every strategy and seed of an experiment config.
    Run {
        config: PathBuf,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory (defaults to results/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Added to every seed when `seeds` is a count.
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
    },
    /// Summarize one or more output directories.
    Report {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
}

fn run(config_path: &Path, jobs: Option<usize>, out: Option<PathBuf>, seed_base: u64) -> anyhow::Result<()> {
    let config = ExperimentConfig::read(config_path).with_context(|| format!("reading {}", config_path.display()))?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let out = out.unwrap_or_else(|| PathBuf::from("results").join(&config.name));
    let result = run_experiment(&config, base, Some(&out), jobs, seed_base)?;
    for s in &result.summary.strategies {
        println!(
            "{:<10} median evals to optimum {:>6.1} (found {}/{})",
            s.strategy,
            s.median,
            s.found,
            s.seeds.len()
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, jobs, out, seed_base } => run(&config, jobs, out, seed_base),
        Command::Report { dirs } => dirs
            .iter()
            .map(|d| RunDir::load(d).with_context(|| format!("loading {}", d.display())))
            .collect::<anyhow::Result<Vec<_>>>()
            .map(|loaded| print!("{}", report(&loaded))),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
