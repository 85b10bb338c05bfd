use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qganlab::cli::{self, presets, AggregateReport, ExperimentConfig, Overrides};
use qganlab::Result;

#[derive(Parser)]
#[command(name = "qganlab", version, about = "Quantum GAN experiments on a statevector simulator")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seed sweep and aggregate it.
    Run {
        /// JSON experiment config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Preset to run (overrides the config's preset).
        #[arg(long)]
        preset: Option<String>,
        /// Number of seeds.
        #[arg(long)]
        seeds: Option<usize>,
        /// Seeds run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output root.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
    /// (Re)build aggregate.csv and aggregate.json for an experiment directory.
    Aggregate { dir: PathBuf },
}

fn summarize(report: &AggregateReport) -> String {
    match report {
        AggregateReport::Qgan(a) => format!(
            "{} runs, final loss_d {:.4}, loss_g {:.4}",
            a.n_runs, a.final_loss_d_mean, a.final_loss_g_mean
        ),
        AggregateReport::Supervised(a) => format!(
            "{} runs, accuracy {:.4}, balanced {:.4}",
            a.n_runs, a.mean_accuracy.overall, a.mean_accuracy.balanced
        ),
    }
}

fn run(args: Args) -> Result<()> {
    match args.command {
        Command::Run {
            config,
            preset,
            seeds,
            jobs,
            out,
        } => {
            if config.is_none() && preset.is_none() {
                return Err(qganlab::Error::Config("give --config, --preset or both".into()));
            }
            let file = match &config {
                Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
                None => ExperimentConfig::default(),
            };
            let overrides = Overrides {
                preset,
                seeds,
                out,
                seed: None,
            }
            .with_env_seed()?;
            let resolved = file.resolve(&overrides)?;
            let sweep = cli::run_experiment(&resolved, jobs)?;
            println!("{}: {}", sweep.dir.display(), summarize(&sweep.aggregate));
        }
        Command::Presets => {
            for p in presets::all() {
                println!("{:<28} {:>3} seeds  {}", p.name, p.seeds, p.description);
            }
        }
        Command::Aggregate { dir } => {
            let report = cli::aggregate_dir(&dir)?;
            println!("{}: {}", dir.display(), summarize(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qganlab: {e}");
            ExitCode::FAILURE
        }
    }
}
