use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use parsgd_harness::{bench, report, run_experiment, verify, ExperimentConfig, EXIT_ABORTED, EXIT_CONFIG, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "parsgd", version, about = "Byzantine-resilient SGD experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of a config grid and write one trace per cell.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output_dir: Option<PathBuf>,
    },
    /// Run the oracle suite; exits nonzero if any oracle fails.
    Verify {
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Summarise a trace directory and write plot data.
    Report {
        dir: PathBuf,
        /// Where to write summary.csv and plot-data/ (default: the trace dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time ParSGD and Krum on random vector sets.
    BenchAgg {
        #[arg(long, value_delimiter = ',', default_values_t = [1000, 2000, 4000])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(config_path: &Path, output_dir: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let config = match ExperimentConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_CONFIG as u8));
        }
    };
    for w in config.warnings() {
        eprintln!("warning: {w}");
    }
    let dir = output_dir.unwrap_or_else(|| config.output_dir.clone());
    let summary = run_experiment(&config, &dir)?;
    for (cell, outcome) in &summary.outcomes {
        println!("{cell}: {}", outcome.as_str());
    }
    println!("wrote {} traces to {}", summary.written.len(), dir.display());
    Ok(if summary.any_aborted() { ExitCode::from(EXIT_ABORTED as u8) } else { ExitCode::SUCCESS })
}

fn main() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, output_dir } => run(&config, output_dir),
        Command::Verify { only, seed } => {
            let names: Vec<&str> = match &only {
                Some(name) => vec![name.as_str()],
                None => verify::ORACLES.to_vec(),
            };
            let mut all = true;
            for name in names {
                let result = verify::run_oracle(name, seed)?;
                all &= result.passed;
                println!("{}", serde_json::to_string(&result)?);
            }
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Report { dir, out } => {
            let traces = report::load_traces(&dir)?;
            let out = out.unwrap_or_else(|| dir.clone());
            let summaries = report::write_report(&traces, &out).context("writing report")?;
            print!("{}", report::format_table(&summaries));
            Ok(ExitCode::SUCCESS)
        }
        Command::BenchAgg { n, d, reps, seed } => {
            let rows = bench::bench_aggregators(&n, d, reps, seed)?;
            println!("{:>8} {:>6} {:>12} {:>12} {:>14} {:>14}", "n", "d", "parsgd_us", "krum_us", "parsgd_pairs", "krum_pairs");
            for r in &rows {
                println!(
                    "{:>8} {:>6} {:>12} {:>12} {:>14} {:>14}",
                    r.n, r.d, r.parsgd_us, r.krum_us, r.parsgd_pairwise, r.krum_pairwise
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
