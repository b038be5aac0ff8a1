//! Runs every cell of a config grid and writes one trace per cell.

use std::path::{Path, PathBuf};

use anyhow::Context;
use parsgd::problems::{Problem, ProblemKind};
use parsgd::rng::{stream_rng, Stream};
use parsgd::simnet::{run_training, DelayModel, RunOutcome, SimConfig, TrainingConfig};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::config::{AttackConfig, ExperimentConfig, RuleConfig};
use crate::trace::{Trace, TraceHeader, TraceRecord};

/// One (rule, attack, f) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub rule: RuleConfig,
    pub attack: AttackConfig,
    pub f: usize,
}

impl Cell {
    pub fn id(&self) -> String {
        format!("{}__{}__f{}", self.rule.label(), self.attack.label(), self.f)
    }
}

pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for rule in &config.rules {
        for attack in &config.attacks {
            let fs: Vec<usize> = if attack.is_none() { vec![0] } else { config.f_values.clone() };
            for f in fs {
                out.push(Cell { rule: rule.clone(), attack: attack.clone(), f });
            }
        }
    }
    out
}

/// The first `f` entries of a seeded permutation of the worker ids, so
/// that faulty sets are nested across `f` and shared across rules.
pub fn faulty_workers(n_workers: usize, f: usize, seed: u64) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..n_workers).collect();
    ids.shuffle(&mut stream_rng(seed, Stream::Roles, 0, 0));
    let mut chosen = ids[..f.min(n_workers)].to_vec();
    chosen.sort_unstable();
    chosen
}

pub fn problem_label(kind: ProblemKind) -> String {
    match kind {
        ProblemKind::Quadratic => "quadratic".into(),
        ProblemKind::LogisticRegression => "logistic".into(),
        ProblemKind::TinyMlp { hidden } => format!("mlp-h{hidden}"),
    }
}

pub fn build_problem(config: &ExperimentConfig) -> anyhow::Result<Problem> {
    Problem::generate(config.problem, &config.dataset_spec(), config.lambda).context("building the problem")
}

/// Train one cell and return its trace.
pub fn run_cell(config: &ExperimentConfig, problem: &Problem, cell: &Cell) -> anyhow::Result<Trace> {
    let n = config.n_workers;
    let faulty = faulty_workers(n, cell.f, config.seed);
    let attack = cell.attack.build(n, &faulty, config.seed).with_context(|| format!("cell {}", cell.id()))?;
    let delays = DelayModel::new(config.delay.bases(n), config.delay.jitter, config.seed)?;
    let training = TrainingConfig {
        epochs: config.epochs,
        learning_rate: config.learning_rate,
        batch_size: config.batch_size,
        rule: cell.rule.resolve(cell.f),
        delta_t_init: config.delta_t_init_us,
        sim: SimConfig {
            synchrony: config.synchrony,
            policy: config.delta_t,
            record_timing: config.record_timing,
        },
        max_consecutive_starved: config.max_consecutive_starved,
        seed: config.seed,
    };
    let result = run_training(problem, &training, &attack, &delays).with_context(|| format!("cell {}", cell.id()))?;
    let (byzantine, crashed) = if matches!(cell.attack, AttackConfig::Crash { .. }) {
        (Vec::new(), faulty)
    } else if cell.attack.is_none() {
        (Vec::new(), Vec::new())
    } else {
        (faulty, Vec::new())
    };
    let header = TraceHeader {
        cell: cell.id(),
        config_hash: config.hash(),
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        rule: cell.rule.label(),
        attack: cell.attack.label(),
        f: cell.f,
        n_workers: n,
        epochs: config.epochs,
        problem: problem_label(config.problem),
        byzantine,
        crashed,
        outcome: result.outcome,
        converged_factor: config.converged_factor,
    };
    let records = result.records.iter().map(|r| TraceRecord::from_epoch(&header, r)).collect();
    Ok(Trace { header, records })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub written: Vec<PathBuf>,
    pub outcomes: Vec<(String, RunOutcome)>,
}

impl RunSummary {
    pub fn any_aborted(&self) -> bool {
        self.outcomes.iter().any(|(_, o)| *o != RunOutcome::Completed)
    }
}

/// Run every cell in parallel and write `<output_dir>/<cell>.csv`.
pub fn run_experiment(config: &ExperimentConfig, output_dir: &Path) -> anyhow::Result<RunSummary> {
    std::fs::create_dir_all(output_dir).with_context(|| format!("creating {}", output_dir.display()))?;
    let problem = build_problem(config)?;
    let grid = cells(config);
    let traces: Vec<(Cell, Trace)> = grid
        .par_iter()
        .map(|cell| run_cell(config, &problem, cell).map(|t| (cell.clone(), t)))
        .collect::<anyhow::Result<_>>()?;
    let mut written = Vec::new();
    let mut outcomes = Vec::new();
    for (cell, trace) in traces {
        let path = output_dir.join(format!("{}.csv", cell.id()));
        trace.write_atomic(&path)?;
        outcomes.push((cell.id(), trace.header.outcome));
        written.push(path);
    }
    Ok(RunSummary { output_dir: output_dir.to_path_buf(), written, outcomes })
}
