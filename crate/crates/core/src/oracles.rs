//! Executable checks of the resilience claims behind ParSGD.
//!
//! Ground truth (which vectors are Byzantine, the true mean `μ`) lives in
//! [`LabeledRound`] and is only ever read here. Aggregators receive plain
//! unlabeled vector sets.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregators::{aggregate_parsgd, compute_f, parsgd_select, SelectionMode};
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::rng::{stream_rng, Stream};
use crate::stats::{coordinate_wise_median, GradientVector};

/// Smallest trial count accepted by the Monte Carlo oracles.
pub const MIN_TRIALS: usize = 10_000;

/// Honest and Byzantine submissions for one round, with the true mean.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRound {
    correct: Vec<GradientVector>,
    byzantine: Vec<GradientVector>,
    mu: GradientVector,
    epsilon: f64,
}

impl LabeledRound {
    pub fn new(
        correct: Vec<GradientVector>,
        byzantine: Vec<GradientVector>,
        mu: GradientVector,
        epsilon: f64,
    ) -> Result<Self> {
        let d = mu.dim();
        if let Some(v) = correct.iter().chain(&byzantine).find(|v| v.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be finite and > 0, got {epsilon}")));
        }
        Ok(Self { correct, byzantine, mu, epsilon })
    }

    pub fn correct(&self) -> &[GradientVector] {
        &self.correct
    }

    pub fn byzantine(&self) -> &[GradientVector] {
        &self.byzantine
    }

    pub fn mu(&self) -> &GradientVector {
        &self.mu
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.correct.len() + self.byzantine.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All submissions in random order, plus a parallel Byzantine mask.
    pub fn shuffled<R: Rng>(&self, rng: &mut R) -> (Vec<GradientVector>, Vec<bool>) {
        let mut tagged: Vec<(GradientVector, bool)> = self
            .correct
            .iter()
            .map(|v| (v.clone(), false))
            .chain(self.byzantine.iter().map(|v| (v.clone(), true)))
            .collect();
        tagged.shuffle(rng);
        tagged.into_iter().unzip()
    }

    fn all(&self) -> Vec<GradientVector> {
        self.correct.iter().chain(&self.byzantine).cloned().collect()
    }
}

/// One failed condition of weak Byzantine resilience.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum Violation {
    /// `n > 2f + c` fails.
    Majority { n: usize, f: usize, c: usize },
    /// `|g_k − μ_k| > ε`.
    Deviation { coordinate: usize, deviation: f64, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakResilience {
    pub holds: bool,
    pub violated: Vec<Violation>,
}

/// Check both weak-resilience conditions for the aggregate `g` of `round`.
/// `n` counts every submission in the round plus the `c` silent workers.
pub fn check_weak_resilience(round: &LabeledRound, f: usize, c: usize, g: &GradientVector) -> WeakResilience {
    let mut violated = Vec::new();
    let n = round.len() + c;
    if n <= 2 * f + c {
        violated.push(Violation::Majority { n, f, c });
    }
    for (k, (gk, mk)) in g.iter().zip(round.mu.iter()).enumerate() {
        let deviation = (gk - mk).abs();
        if deviation.is_nan() || deviation > round.epsilon {
            violated.push(Violation::Deviation { coordinate: k, deviation, epsilon: round.epsilon });
        }
    }
    if g.dim() != round.mu.dim() {
        violated.push(Violation::Deviation { coordinate: g.dim().min(round.mu.dim()), deviation: f64::INFINITY, epsilon: round.epsilon });
    }
    WeakResilience { holds: violated.is_empty(), violated }
}

/// Tolerance for the deviation condition: `3σ/√(n − f − c)`.
pub fn default_epsilon(sigma: f64, n: usize, f: usize, c: usize) -> f64 {
    3.0 * sigma / (n.saturating_sub(f + c).max(1) as f64).sqrt()
}

/// Per coordinate, every correct value is strictly closer to the median of
/// all submissions than every Byzantine value.
pub fn check_strong_condition(round: &LabeledRound) -> bool {
    if round.byzantine.is_empty() {
        return true;
    }
    if round.correct.is_empty() {
        return false;
    }
    let g = coordinate_wise_median(&round.all()).expect("round dimensions are validated");
    (0..g.dim()).all(|k| {
        let far = round.correct.iter().map(|v| (v[k] - g[k]).abs()).fold(0.0, f64::max);
        let close = round.byzantine.iter().map(|v| (v[k] - g[k]).abs()).fold(f64::INFINITY, f64::min);
        far < close
    })
}

/// Draw a round with `m` submissions, `byz < m/2` of them Byzantine, that
/// satisfies [`check_strong_condition`].
pub fn generate_strong_round<R: Rng>(rng: &mut R, m: usize, byz: usize, d: usize) -> Result<LabeledRound> {
    if m == 0 || d == 0 || 2 * byz >= m {
        return Err(Error::InvalidParameter(format!(
            "strong rounds need m ≥ 1, d ≥ 1 and 2·byz < m (m={m}, byz={byz}, d={d})"
        )));
    }
    loop {
        let mu: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let spread: f64 = rng.gen_range(0.01..2.0);
        let correct: Vec<GradientVector> = (0..m - byz)
            .map(|_| {
                GradientVector::saturating(
                    mu.iter().map(|c| c + spread * rng.sample::<f64, _>(StandardNormal)).collect(),
                )
            })
            .collect();
        let byzantine: Vec<GradientVector> = (0..byz)
            .map(|_| {
                GradientVector::saturating(
                    mu.iter()
                        .map(|c| {
                            let gap = spread * rng.gen_range(8.0..1e6);
                            if rng.gen_bool(0.5) { c + gap } else { c - gap }
                        })
                        .collect(),
                )
            })
            .collect();
        let round = LabeledRound::new(correct, byzantine, GradientVector::saturating(mu), spread)?;
        if check_strong_condition(&round) {
            return Ok(round);
        }
    }
}

/// How many Byzantine values the server's ParSGD selection picks on `round`.
/// The server uses `f = compute_f(m)`, not the true Byzantine count.
pub fn byzantine_members_selected<R: Rng>(round: &LabeledRound, mode: SelectionMode, rng: &mut R) -> Result<usize> {
    let (vectors, is_byz) = round.shuffled(rng);
    let sel = parsgd_select(&vectors, compute_f(vectors.len()), mode)?;
    Ok(match sel.neighbour_vectors() {
        Some(ids) => ids.iter().filter(|&&i| is_byz[i]).count(),
        None => (0..sel.dim())
            .map(|k| sel.neighbour_indices(k).iter().filter(|&&i| is_byz[i]).count())
            .sum(),
    })
}

/// Number of adversarial points placed in a breakdown trial of size `m`.
pub fn breakdown_outliers(m: usize) -> usize {
    (m.saturating_sub(1)) / 2
}

/// One breakdown trial of the coordinate-wise median.
pub fn breakdown_trial<R: Rng>(m: usize, rng: &mut R) -> Result<bool> {
    breakdown_trial_with(m, rng, coordinate_wise_median)
}

/// Draw `m` standard normal points, replace `⌊(m−1)/2⌋` of them with values
/// of magnitude up to `1e12`, and report whether `estimator` stays inside
/// the range of the untouched points.
pub fn breakdown_trial_with<R, E>(m: usize, rng: &mut R, estimator: E) -> Result<bool>
where
    R: Rng,
    E: Fn(&[GradientVector]) -> Result<GradientVector>,
{
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("breakdown trials need odd m ≥ 3, got {m}")));
    }
    let mut points: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let mut slots: Vec<usize> = (0..m).collect();
    slots.shuffle(rng);
    let (bad, good) = slots.split_at(breakdown_outliers(m));
    for &i in bad {
        let magnitude = 1e12 * rng.gen_range(0.0..=1.0f64);
        points[i] = if rng.gen_bool(0.5) { magnitude } else { -magnitude };
    }
    let lo = good.iter().map(|&i| points[i]).fold(f64::INFINITY, f64::min);
    let hi = good.iter().map(|&i| points[i]).fold(f64::NEG_INFINITY, f64::max);
    let vectors: Vec<GradientVector> = points.iter().map(|&p| GradientVector::saturating(vec![p])).collect();
    let est = estimator(&vectors)?[0];
    Ok(lo <= est && est <= hi)
}

/// Monte Carlo estimate of the ParSGD estimator's squared error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub f: usize,
    pub sigma: f64,
    pub empirical_mse: f64,
    /// `f·σ²/(f+1)²`.
    pub theoretical_bound: f64,
    /// `√f·σ/(f+1)`.
    pub eta: f64,
    pub trials: usize,
    /// Standard error of `empirical_mse`; zero when every trial is exact.
    pub standard_error: f64,
}

impl BoundReport {
    /// `empirical ≤ bound + 3·standard_error`.
    pub fn within_bound(&self) -> bool {
        self.empirical_mse <= self.theoretical_bound + 3.0 * self.standard_error
    }
}

pub fn variance_bound(f: usize, sigma: f64) -> f64 {
    f as f64 * sigma * sigma / ((f + 1) as f64).powi(2)
}

pub fn variance_eta(f: usize, sigma: f64) -> f64 {
    (f as f64).sqrt() * sigma / (f + 1) as f64
}

/// `2f + 1` honest `N(μ, σ²)` scalars per trial, aggregated by ParSGD with
/// tolerance `f`.
pub fn variance_monte_carlo(
    f: usize,
    sigma: f64,
    mu: f64,
    trials: usize,
    mode: SelectionMode,
    seed: u64,
) -> Result<BoundReport> {
    squared_error_trials(f, sigma, mu, None, trials, mode, seed)
}

/// Like [`variance_monte_carlo`], but `f` of the `2f + 1` submissions are
/// Byzantine and draw from `N(μ, sigma_byz²)`, pretending to be correct.
pub fn mixed_variance_monte_carlo(
    f: usize,
    sigma: f64,
    sigma_byz: f64,
    mu: f64,
    trials: usize,
    mode: SelectionMode,
    seed: u64,
) -> Result<BoundReport> {
    squared_error_trials(f, sigma, mu, Some(sigma_byz), trials, mode, seed)
}

fn squared_error_trials(
    f: usize,
    sigma: f64,
    mu: f64,
    sigma_byz: Option<f64>,
    trials: usize,
    mode: SelectionMode,
    seed: u64,
) -> Result<BoundReport> {
    if trials < MIN_TRIALS {
        return Err(Error::InsufficientSamples { needed: MIN_TRIALS, got: trials });
    }
    let honest = Normal::new(mu, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let attacker = sigma_byz
        .map(|s| Normal::new(mu, s).map_err(|e| Error::InvalidParameter(e.to_string())))
        .transpose()?;
    let n = 2 * f + 1;
    let errors: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, Stream::Oracle, t as u64, f as u64);
            let vectors: Vec<GradientVector> = (0..n)
                .map(|i| {
                    let x = match &attacker {
                        Some(b) if i > f => b.sample(&mut rng),
                        _ => honest.sample(&mut rng),
                    };
                    GradientVector::saturating(vec![x])
                })
                .collect();
            let u = aggregate_parsgd(&vectors, f, mode)?[0];
            Ok((u - mu).powi(2))
        })
        .collect::<Result<_>>()?;
    let count = trials as f64;
    let mse = errors.iter().sum::<f64>() / count;
    let var = errors.iter().map(|e| (e - mse).powi(2)).sum::<f64>() / (count - 1.0);
    Ok(BoundReport {
        f,
        sigma,
        empirical_mse: mse,
        theoretical_bound: variance_bound(f, sigma),
        eta: variance_eta(f, sigma),
        trials,
        standard_error: (var / count).sqrt(),
    })
}

/// Worst analytic-versus-finite-difference gradient error over random points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientCheckReport {
    pub points: usize,
    pub dim: usize,
    pub max_relative_error: f64,
}

/// Compare the analytic gradient of worker 0's objective on its first
/// `batch_len` samples with central finite differences at `points` random
/// parameter vectors. Relative error is `‖a − b‖ / max(‖a‖, ‖b‖, 1e−8)`.
pub fn gradient_check(problem: &Problem, points: usize, batch_len: usize, seed: u64) -> Result<GradientCheckReport> {
    let batch: Vec<usize> = (0..batch_len.min(problem.shard_len(0)).max(1)).collect();
    let d = problem.dim();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for p in 0..points {
        let mut rng = stream_rng(seed, Stream::Oracle, p as u64, u64::MAX);
        let w: Vec<f64> = (0..d).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
        let (_, analytic) = problem.batch_objective(&GradientVector::saturating(w.clone()), 0, &batch)?;
        let mut numeric = Vec::with_capacity(d);
        for j in 0..d {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus[j] += h;
            minus[j] -= h;
            let fp = problem.batch_objective(&GradientVector::saturating(plus), 0, &batch)?.0;
            let fm = problem.batch_objective(&GradientVector::saturating(minus), 0, &batch)?.0;
            numeric.push((fp - fm) / (2.0 * h));
        }
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let na = analytic.l2_norm();
        let nb = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(diff / na.max(nb).max(1e-8));
    }
    Ok(GradientCheckReport { points, dim: d, max_relative_error: worst })
}
