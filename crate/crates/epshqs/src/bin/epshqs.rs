use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use epshqs::config::ExperimentConfig;
use epshqs::harness::{plot_data, run_experiment};
use epshqs::oracle::{OracleKind, OracleSpec};

#[derive(Parser)]
#[command(name = "epshqs", about = "Active-learning surrogate benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured (strategy, seed) pair and write curve CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads for independent runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Persist per-iteration student/teacher checkpoints here.
        #[arg(long)]
        checkpoint_dir: Option<PathBuf>,
    },
    /// Print an oracle's box and formula reference.
    Describe {
        #[arg(long)]
        oracle: String,
        /// Dimension, for oracles with a configurable one.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Re-emit a curve CSV as two gnuplot-friendly columns.
    PlotData {
        #[arg(long)]
        curve: PathBuf,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> epshqs::Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            jobs,
            checkpoint_dir,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = run_experiment(&cfg, jobs, checkpoint_dir.as_deref())?;
            println!(
                "wrote {} curve file(s) and summary.csv to {}",
                outcome.curves.len(),
                cfg.output_dir.display()
            );
            println!("strategy,final_mean_hit_rate,final_std,savings_vs_random");
            for row in &outcome.summary {
                println!(
                    "{},{:.4},{:.4},{}",
                    row.strategy,
                    row.final_mean_hit_rate,
                    row.final_std,
                    row.savings_vs_random
                        .map(|s| format!("{s:.4}"))
                        .unwrap_or_else(|| "-".into())
                );
            }
            for (strategy, seed, msg) in &outcome.failures {
                eprintln!("run failed: {strategy} seed {seed}: {msg}");
            }
            Ok(())
        }
        Command::Describe { oracle, dim } => {
            let kind = match oracle.as_str() {
                "branin2" => OracleKind::Branin2,
                "hartmann6" => OracleKind::Hartmann6,
                "styblinski_tang" => OracleKind::StyblinskiTang { dim },
                "vessel_stress4" => OracleKind::VesselStress4,
                other => {
                    return Err(epshqs::Error::Config(format!(
                        "unknown oracle {other:?}; expected branin2, hartmann6, styblinski_tang or vessel_stress4"
                    )))
                }
            };
            print!("{}", OracleSpec::new(kind, 0.0)?.describe());
            Ok(())
        }
        Command::PlotData { curve } => {
            let text = std::fs::read_to_string(curve)?;
            print!("{}", plot_data(&text)?);
            Ok(())
        }
    }
}
