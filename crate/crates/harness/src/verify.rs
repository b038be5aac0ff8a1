//! The oracle suite behind `parsgd verify`.

use parsgd::aggregators::SelectionMode;
use parsgd::oracles::{
    breakdown_trial_with, byzantine_members_selected, check_weak_resilience, mixed_variance_monte_carlo,
    generate_strong_round, gradient_check, variance_eta, variance_monte_carlo, BoundReport, LabeledRound,
};
use parsgd::problems::{DataGenerator, DatasetSpec, Problem, ProblemKind};
use parsgd::rng::{stream_rng, Stream};
use parsgd::stats::{coordinate_wise_median, GradientVector};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

pub const ORACLES: [&str; 6] = ["breakdown", "variance-bound", "mixed-variance-bound", "containment", "weak-resilience", "gradients"];

pub const BOUND_F: [usize; 5] = [1, 2, 4, 12, 24];
pub const BOUND_SIGMA: [f64; 3] = [0.1, 1.0, 10.0];
pub const BOUND_TRIALS: usize = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub oracle: String,
    pub passed: bool,
    pub detail: Value,
}

pub fn run_oracle(name: &str, seed: u64) -> anyhow::Result<OracleResult> {
    let (passed, detail) = match name {
        "breakdown" => breakdown(10_000, seed, coordinate_wise_median)?,
        "variance-bound" => variance_bound_oracle(seed)?,
        "mixed-variance-bound" => mixed_variance_bound(seed)?,
        "containment" => containment(1_000, seed)?,
        "weak-resilience" => weak_resilience()?,
        "gradients" => gradients(seed)?,
        other => anyhow::bail!("unknown oracle {other:?}; expected one of {ORACLES:?}"),
    };
    Ok(OracleResult { oracle: name.to_string(), passed, detail })
}

/// Breakdown trials cycling through odd `m` in `3..=31`.
pub fn breakdown<E>(trials: usize, seed: u64, estimator: E) -> anyhow::Result<(bool, Value)>
where
    E: Fn(&[GradientVector]) -> parsgd::Result<GradientVector> + Copy,
{
    let mut failures = Vec::new();
    for t in 0..trials {
        let m = 3 + 2 * (t % 15);
        let mut rng = stream_rng(seed, Stream::Oracle, t as u64, 1);
        if !breakdown_trial_with(m, &mut rng, estimator)? {
            failures.push(t);
        }
    }
    let passed = failures.is_empty();
    failures.truncate(10);
    Ok((passed, json!({ "trials": trials, "first_failures": failures })))
}

fn bound_json(r: &BoundReport) -> Value {
    json!({
        "f": r.f,
        "sigma": r.sigma,
        "empirical_mse": r.empirical_mse,
        "bound": r.theoretical_bound,
        "standard_error": r.standard_error,
        "within_bound": r.within_bound(),
    })
}

/// Every `(f, σ)` of the grid, plus the `f = 1` value of η.
pub fn variance_reports(seed: u64, trials: usize) -> anyhow::Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for f in BOUND_F {
        for sigma in BOUND_SIGMA {
            out.push(variance_monte_carlo(f, sigma, 0.0, trials, SelectionMode::PerCoordinate, seed)?);
        }
    }
    Ok(out)
}

fn variance_bound_oracle(seed: u64) -> anyhow::Result<(bool, Value)> {
    let reports = variance_reports(seed, BOUND_TRIALS)?;
    let eta_ok = BOUND_SIGMA.iter().all(|&s| variance_eta(1, s) == s / 2.0);
    let passed = eta_ok && reports.iter().all(BoundReport::within_bound);
    Ok((passed, json!({ "eta_f1_is_half_sigma": eta_ok, "cells": reports.iter().map(bound_json).collect::<Vec<_>>() })))
}

/// `f` of the `2f + 1` submissions are Byzantine but drawn from the same
/// distribution as the correct ones.
fn mixed_variance_bound(seed: u64) -> anyhow::Result<(bool, Value)> {
    let mut cells = Vec::new();
    let mut passed = true;
    for f in BOUND_F {
        let r = mixed_variance_monte_carlo(f, 1.0, 1.0, 0.0, BOUND_TRIALS, SelectionMode::PerCoordinate, seed)?;
        passed &= r.within_bound();
        cells.push(bound_json(&r));
    }
    Ok((passed, json!({ "cells": cells })))
}

/// Rounds satisfying the strong condition never contribute a Byzantine
/// value to the ParSGD selection.
pub fn containment(rounds: usize, seed: u64) -> anyhow::Result<(bool, Value)> {
    let mut selected = [0usize; 2];
    for r in 0..rounds {
        let mut rng = stream_rng(seed, Stream::Oracle, r as u64, 2);
        let m = rng.gen_range(3..=31);
        let byz = rng.gen_range(0..=(m - 1) / 2);
        let d = rng.gen_range(1..=6);
        let round = generate_strong_round(&mut rng, m, byz, d)?;
        for (i, mode) in [SelectionMode::PerCoordinate, SelectionMode::PerVector].into_iter().enumerate() {
            selected[i] += byzantine_members_selected(&round, mode, &mut rng)?;
        }
    }
    Ok((
        selected == [0, 0],
        json!({ "rounds": rounds, "byzantine_selected_per_coordinate": selected[0], "byzantine_selected_per_vector": selected[1] }),
    ))
}

fn weak_resilience() -> anyhow::Result<(bool, Value)> {
    let mu = GradientVector::zeros(1);
    let round = |correct: usize, byz: usize| {
        LabeledRound::new(vec![mu.clone(); correct], vec![mu.clone(); byz], mu.clone(), 1.0)
    };
    let a = check_weak_resilience(&round(26, 24)?, 24, 0, &mu).holds;
    let b = !check_weak_resilience(&round(25, 25)?, 25, 0, &mu).holds;
    let c = check_weak_resilience(&round(5, 0)?, 0, 0, &mu).holds;
    Ok((a && b && c, json!({ "n50_f24_holds": a, "n50_f25_violated": b, "byzantine_free_holds": c })))
}

pub fn gradient_problems(seed: u64) -> parsgd::Result<Vec<Problem>> {
    let blobs = |classes, features| DatasetSpec {
        generator: DataGenerator::GaussianBlobs { classes, features, separation: 2.0, noise: 1.0 },
        n_workers: 2,
        samples_per_worker: 40,
        train_fraction: 0.8,
        seed,
    };
    let quad = DatasetSpec {
        generator: DataGenerator::FixedQuadratic { optimum: vec![1.0, -2.0, 3.0, 0.5, -0.25] },
        n_workers: 2,
        samples_per_worker: 1,
        train_fraction: 0.8,
        seed,
    };
    Ok(vec![
        Problem::generate(ProblemKind::Quadratic, &quad, 0.01)?,
        Problem::generate(ProblemKind::LogisticRegression, &blobs(4, 6), 0.01)?,
        Problem::generate(ProblemKind::TinyMlp { hidden: 8 }, &blobs(3, 5), 0.01)?,
    ])
}

fn gradients(seed: u64) -> anyhow::Result<(bool, Value)> {
    let mut passed = true;
    let mut detail = Vec::new();
    for p in gradient_problems(seed)? {
        let r = gradient_check(&p, 100, 20, seed)?;
        passed &= r.max_relative_error <= 1e-5;
        detail.push(json!({ "problem": format!("{:?}", p.kind()), "dim": r.dim, "max_relative_error": r.max_relative_error }));
    }
    Ok((passed, Value::Array(detail)))
}
