//! Deterministic discrete-event simulation of a parameter server.
//!
//! Each epoch the server broadcasts `w`, every live worker computes a local
//! gradient, the adversary corrupts or drops it, and the reply arrives after
//! a sampled delay. In partial-synchronous mode the server admits replies
//! that arrive by `epoch_start + 2·δt`, aggregates them, and updates
//! `w ← w − γ·Ū`. Simulated time is integer microseconds.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::AttackSpec;
use crate::aggregators::{compute_f, AggregationRule, OpCounter};
use crate::error::{Error, Result};
use crate::problems::{Evaluation, Problem, Split};
use crate::rng::{stream_rng, Stream};
use crate::stats::GradientVector;

pub const MICROS_PER_SECOND: u64 = 1_000_000;

/// One worker's reply for one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerUpdate {
    pub worker_id: usize,
    pub epoch: u64,
    pub gradient: GradientVector,
    /// Simulated arrival time in µs.
    pub arrival_time: u64,
}

/// Random extra delay added to a worker's base delay.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Jitter {
    #[default]
    None,
    /// Uniform on `[0, max_us]`.
    Uniform { max_us: u64 },
    /// Exponential with the given mean.
    Exponential { mean_us: f64 },
}

/// Per-worker network delay: a fixed base plus keyed jitter.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayModel {
    base_us: Vec<u64>,
    jitter: Jitter,
    seed: u64,
}

impl DelayModel {
    pub fn new(base_us: Vec<u64>, jitter: Jitter, seed: u64) -> Result<Self> {
        let mut problems = Vec::new();
        if base_us.is_empty() {
            problems.push("delay model needs at least one worker".to_string());
        }
        match jitter {
            Jitter::Exponential { mean_us } if !(mean_us.is_finite() && mean_us > 0.0) => {
                problems.push(format!("exponential jitter mean must be finite and > 0, got {mean_us}"))
            }
            _ => {}
        }
        if problems.is_empty() {
            Ok(Self { base_us, jitter, seed })
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    /// The same base delay for every worker.
    pub fn uniform(n_workers: usize, base_us: u64, jitter: Jitter, seed: u64) -> Result<Self> {
        Self::new(vec![base_us; n_workers], jitter, seed)
    }

    pub fn n_workers(&self) -> usize {
        self.base_us.len()
    }

    pub fn base_us(&self) -> &[u64] {
        &self.base_us
    }

    pub fn mean_base_us(&self) -> f64 {
        self.base_us.iter().map(|&b| b as f64).sum::<f64>() / self.base_us.len() as f64
    }

    /// Default initial δt: twice the mean base delay, at least 1 µs.
    pub fn default_delta_t(&self) -> u64 {
        ((2.0 * self.mean_base_us()).round() as u64).max(1)
    }

    /// Largest possible delay, if bounded.
    pub fn max_delay_us(&self) -> Option<u64> {
        let base = self.base_us.iter().copied().max().unwrap_or(0);
        match self.jitter {
            Jitter::None => Some(base.max(1)),
            Jitter::Uniform { max_us } => Some(base.saturating_add(max_us).max(1)),
            Jitter::Exponential { .. } => None,
        }
    }

    /// Delay of `worker`'s reply in `epoch`; always ≥ 1 µs.
    pub fn sample(&self, worker: usize, epoch: u64) -> Result<u64> {
        let base = *self.base_us.get(worker).ok_or(Error::UnknownWorker(worker))?;
        let mut rng = stream_rng(self.seed, Stream::Delay, worker as u64, epoch);
        let extra = match self.jitter {
            Jitter::None => 0,
            Jitter::Uniform { max_us } => rng.gen_range(0..=max_us),
            Jitter::Exponential { mean_us } => {
                let draw: f64 = Exp::new(1.0 / mean_us).expect("validated").sample(&mut rng);
                draw.round().min(u64::MAX as f64 / 2.0) as u64
            }
        };
        Ok(base.saturating_add(extra).max(1))
    }
}

/// δt adaptation constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaTPolicy {
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    #[serde(default = "default_floor")]
    pub floor_us: u64,
}

fn default_smoothing() -> f64 {
    0.5
}

fn default_floor() -> u64 {
    1_000
}

impl Default for DeltaTPolicy {
    fn default() -> Self {
        Self { smoothing: default_smoothing(), floor_us: default_floor() }
    }
}

/// New δt after an epoch. Only a fully collected epoch moves δt:
/// `max(floor, s·max_rtt + (1 − s)·old)`.
pub fn update_delta_t(
    old_delta_t: u64,
    collected: usize,
    n: usize,
    max_observed_rtt: u64,
    policy: &DeltaTPolicy,
) -> u64 {
    if collected != n {
        return old_delta_t;
    }
    let smoothed =
        policy.smoothing * max_observed_rtt as f64 + (1.0 - policy.smoothing) * old_delta_t as f64;
    (smoothed.round() as u64).max(policy.floor_us).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "kebab-case")]
pub enum LearningRate {
    Constant { gamma: f64 },
    /// `γ / √t`.
    InvSqrt { gamma: f64 },
}

impl LearningRate {
    pub fn gamma(&self) -> f64 {
        match *self {
            LearningRate::Constant { gamma } | LearningRate::InvSqrt { gamma } => gamma,
        }
    }

    /// Step size at epoch `t ≥ 1`.
    pub fn at(&self, t: u64) -> f64 {
        match *self {
            LearningRate::Constant { gamma } => gamma,
            LearningRate::InvSqrt { gamma } => gamma / (t.max(1) as f64).sqrt(),
        }
    }
}

/// How the server decides an epoch is over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Synchrony {
    /// Collect until every worker replied or `epoch_start + 2·δt`.
    #[default]
    Partial,
    /// Wait for all `n` replies. Giving up after `watchdog_us` of simulated
    /// time stalls the run.
    Strict { watchdog_us: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerState {
    pub w: GradientVector,
    pub delta_t: u64,
    /// Next epoch to run, starting at 1.
    pub epoch: u64,
    pub clock: u64,
    pub learning_rate: LearningRate,
    pub rule: AggregationRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpochStatus {
    Completed,
    /// Nothing arrived in time: `w` unchanged, δt doubled.
    Starved,
    /// Strict mode gave up waiting.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: u64,
    pub status: EpochStatus,
    pub collected: usize,
    /// `n − collected`.
    pub inferred_c: usize,
    /// `compute_f(collected)`.
    pub f: usize,
    /// δt in force during the epoch.
    pub delta_t: u64,
    /// δt after adaptation.
    pub next_delta_t: u64,
    pub max_rtt: u64,
    pub epoch_start: u64,
    pub epoch_end: u64,
    /// Wall-clock µs spent in the aggregation call; 0 unless timing is on.
    pub aggregation_us: u64,
    pub ops: OpCounter,
    pub collected_ids: Vec<usize>,
}

/// Supplies the honest gradient of a worker.
pub trait GradientSource: Sync {
    fn n_workers(&self) -> usize;
    fn gradient(&self, w: &GradientVector, worker: usize, epoch: u64) -> Result<GradientVector>;
}

/// Mini-batch gradients of a [`Problem`]; batches keyed by `(seed, worker, epoch)`.
pub struct ProblemWorkers<'a> {
    pub problem: &'a Problem,
    pub batch_size: usize,
    pub seed: u64,
}

impl GradientSource for ProblemWorkers<'_> {
    fn n_workers(&self) -> usize {
        self.problem.n_workers()
    }

    fn gradient(&self, w: &GradientVector, worker: usize, epoch: u64) -> Result<GradientVector> {
        let batch = self.batch_size.min(self.problem.shard_len(worker).max(1));
        let mut rng = stream_rng(self.seed, Stream::Batch, worker as u64, epoch);
        self.problem.local_gradient(w, worker, batch, &mut rng)
    }
}

/// Every worker always returns the same vector.
pub struct FixedGradients(pub Vec<GradientVector>);

impl GradientSource for FixedGradients {
    fn n_workers(&self) -> usize {
        self.0.len()
    }

    fn gradient(&self, _: &GradientVector, worker: usize, _: u64) -> Result<GradientVector> {
        self.0.get(worker).cloned().ok_or(Error::UnknownWorker(worker))
    }
}

/// Knobs shared by every epoch of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub synchrony: Synchrony,
    pub policy: DeltaTPolicy,
    pub record_timing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { synchrony: Synchrony::Partial, policy: DeltaTPolicy::default(), record_timing: false }
    }
}

/// The server plus its in-flight messages.
pub struct Simulation<'a, S: GradientSource> {
    pub state: ServerState,
    source: &'a S,
    attack: &'a AttackSpec,
    delays: &'a DelayModel,
    config: SimConfig,
    in_flight: BinaryHeap<Reverse<(u64, usize, u64)>>,
    payloads: Vec<Option<WorkerUpdate>>,
}

impl<'a, S: GradientSource> Simulation<'a, S> {
    pub fn new(
        state: ServerState,
        source: &'a S,
        attack: &'a AttackSpec,
        delays: &'a DelayModel,
        config: SimConfig,
    ) -> Result<Self> {
        let n = source.n_workers();
        let mut problems = Vec::new();
        if n == 0 {
            problems.push("n_workers must be ≥ 1".to_string());
        }
        if attack.n_workers() != n {
            problems.push(format!("attack covers {} workers, expected {n}", attack.n_workers()));
        }
        if delays.n_workers() != n {
            problems.push(format!("delay model covers {} workers, expected {n}", delays.n_workers()));
        }
        if state.delta_t == 0 {
            problems.push("delta_t must be > 0".to_string());
        }
        if state.epoch == 0 {
            problems.push("epochs are numbered from 1".to_string());
        }
        let gamma = state.learning_rate.gamma();
        if !(gamma.is_finite() && gamma > 0.0) {
            problems.push(format!("learning_rate must be finite and > 0, got {gamma}"));
        }
        if !(0.0..=1.0).contains(&config.policy.smoothing) {
            problems.push(format!("smoothing must lie in [0, 1], got {}", config.policy.smoothing));
        }
        if let Err(e) = state.rule.validate() {
            problems.push(format!("rule: {e}"));
        }
        if !problems.is_empty() {
            return Err(Error::InvalidConfig(problems));
        }
        Ok(Self {
            state,
            source,
            attack,
            delays,
            config,
            in_flight: BinaryHeap::new(),
            payloads: Vec::new(),
        })
    }

    /// Run one broadcast, collect, aggregate and update round.
    pub fn run_epoch(&mut self) -> Result<EpochReport> {
        let n = self.source.n_workers();
        let epoch = self.state.epoch;
        let start = self.state.clock;
        let delta_t = self.state.delta_t;

        let active: Vec<usize> = (0..n)
            .filter(|&w| self.attack.is_active(w, epoch).unwrap_or(false))
            .collect();
        let w = &self.state.w;
        let source = self.source;
        let gradients: Vec<Result<GradientVector>> =
            active.par_iter().map(|&worker| source.gradient(w, worker, epoch)).collect();

        for (&worker, gradient) in active.iter().zip(gradients) {
            let sent = WorkerUpdate { worker_id: worker, epoch, gradient: gradient?, arrival_time: 0 };
            if let Some(mut update) = self.attack.corrupt(sent).into_update() {
                update.arrival_time = start.saturating_add(self.delays.sample(worker, epoch)?);
                let slot = self.payloads.len();
                self.in_flight.push(Reverse((update.arrival_time, worker, slot as u64)));
                self.payloads.push(Some(update));
            }
        }

        let deadline = match self.config.synchrony {
            Synchrony::Partial => start.saturating_add(delta_t.saturating_mul(2)),
            Synchrony::Strict { watchdog_us } => start.saturating_add(watchdog_us),
        };
        let mut seen = BTreeSet::new();
        let mut collected: Vec<WorkerUpdate> = Vec::new();
        let mut last_arrival = start;
        while let Some(&Reverse((arrival, _, slot))) = self.in_flight.peek() {
            if arrival > deadline || collected.len() == n {
                break;
            }
            self.in_flight.pop();
            let update = self.payloads[slot as usize].take().expect("each message is read once");
            last_arrival = arrival;
            if update.epoch != epoch || !seen.insert(update.worker_id) {
                continue;
            }
            collected.push(update);
        }
        if self.in_flight.is_empty() {
            self.payloads.clear();
        }
        collected.sort_by_key(|u| u.worker_id);

        let count = collected.len();
        let end = if count == n { last_arrival } else { deadline };
        let max_rtt = collected.iter().map(|u| u.arrival_time - start).max().unwrap_or(0);
        let mut report = EpochReport {
            epoch,
            status: EpochStatus::Completed,
            collected: count,
            inferred_c: n - count,
            f: compute_f(count),
            delta_t,
            next_delta_t: delta_t,
            max_rtt,
            epoch_start: start,
            epoch_end: end,
            aggregation_us: 0,
            ops: OpCounter::default(),
            collected_ids: collected.iter().map(|u| u.worker_id).collect(),
        };
        self.state.clock = end;
        self.state.epoch += 1;

        if matches!(self.config.synchrony, Synchrony::Strict { .. }) && count < n {
            report.status = EpochStatus::Stalled;
            return Ok(report);
        }
        if count == 0 {
            report.status = EpochStatus::Starved;
            report.next_delta_t = delta_t.saturating_mul(2);
            self.state.delta_t = report.next_delta_t;
            return Ok(report);
        }

        let vectors: Vec<GradientVector> = collected.into_iter().map(|u| u.gradient).collect();
        let timer = self.config.record_timing.then(Instant::now);
        let aggregate = self.state.rule.aggregate_counted(&vectors, report.f, &mut report.ops)?;
        if let Some(timer) = timer {
            report.aggregation_us = timer.elapsed().as_micros() as u64;
        }
        self.state.w = self.state.w.add_scaled(-self.state.learning_rate.at(epoch), &aggregate)?;
        if matches!(self.config.synchrony, Synchrony::Partial) {
            report.next_delta_t = update_delta_t(delta_t, count, n, max_rtt, &self.config.policy);
            self.state.delta_t = report.next_delta_t;
        }
        Ok(report)
    }
}

/// Everything needed to train one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub epochs: u64,
    pub learning_rate: LearningRate,
    pub batch_size: usize,
    pub rule: AggregationRule,
    /// `None` uses [`DelayModel::default_delta_t`].
    pub delta_t_init: Option<u64>,
    pub sim: SimConfig,
    pub max_consecutive_starved: u32,
    pub seed: u64,
}

impl TrainingConfig {
    pub fn new(epochs: u64, gamma: f64, batch_size: usize, rule: AggregationRule) -> Self {
        Self {
            epochs,
            learning_rate: LearningRate::Constant { gamma },
            batch_size,
            rule,
            delta_t_init: None,
            sim: SimConfig::default(),
            max_consecutive_starved: 10,
            seed: 0,
        }
    }

    /// Every violated constraint, each prefixed with its field name.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.epochs == 0 {
            problems.push("epochs: must be ≥ 1".to_string());
        }
        let gamma = self.learning_rate.gamma();
        if !(gamma.is_finite() && gamma > 0.0) {
            problems.push(format!("learning_rate: must be finite and > 0, got {gamma}"));
        }
        if self.batch_size == 0 {
            problems.push("batch_size: must be ≥ 1".to_string());
        }
        if self.delta_t_init == Some(0) {
            problems.push("delta_t_init: must be > 0".to_string());
        }
        if self.max_consecutive_starved == 0 {
            problems.push("max_consecutive_starved: must be ≥ 1".to_string());
        }
        if let Err(e) = self.rule.validate() {
            problems.push(format!("rule: {e}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunOutcome {
    Completed,
    /// Too many consecutive starved epochs.
    StarvedAbort,
    Stalled,
}

impl RunOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunOutcome::Completed => "completed",
            RunOutcome::StarvedAbort => "starved-abort",
            RunOutcome::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub report: EpochReport,
    pub train: Evaluation,
    pub test: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub records: Vec<EpochRecord>,
    pub outcome: RunOutcome,
    pub final_w: GradientVector,
}

impl TrainingTrace {
    pub fn final_test_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.test.loss)
    }
}

/// Train `problem` for `config.epochs` epochs under `attack` and `delays`.
pub fn run_training(
    problem: &Problem,
    config: &TrainingConfig,
    attack: &AttackSpec,
    delays: &DelayModel,
) -> Result<TrainingTrace> {
    config.validate()?;
    let workers = ProblemWorkers { problem, batch_size: config.batch_size, seed: config.seed };
    let state = ServerState {
        w: problem.initial_parameters(),
        delta_t: config.delta_t_init.unwrap_or_else(|| delays.default_delta_t()),
        epoch: 1,
        clock: 0,
        learning_rate: config.learning_rate,
        rule: config.rule.clone(),
    };
    let mut sim = Simulation::new(state, &workers, attack, delays, config.sim.clone())?;
    let mut records = Vec::with_capacity(config.epochs as usize);
    let mut starved_run = 0;
    let mut outcome = RunOutcome::Completed;
    for _ in 0..config.epochs {
        let report = sim.run_epoch()?;
        match report.status {
            EpochStatus::Stalled => outcome = RunOutcome::Stalled,
            EpochStatus::Starved => starved_run += 1,
            EpochStatus::Completed => starved_run = 0,
        }
        let train = problem.evaluate(&sim.state.w, Split::Train)?;
        let test = problem.evaluate(&sim.state.w, Split::Test)?;
        records.push(EpochRecord { report, train, test });
        if outcome == RunOutcome::Stalled {
            break;
        }
        if starved_run >= config.max_consecutive_starved {
            outcome = RunOutcome::StarvedAbort;
            break;
        }
    }
    Ok(TrainingTrace { records, outcome, final_w: sim.state.w })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gv(v: &[f64]) -> GradientVector {
        GradientVector::new(v.to_vec()).unwrap()
    }

    fn state(delta_t: u64, rule: AggregationRule) -> ServerState {
        ServerState {
            w: gv(&[0.0]),
            delta_t,
            epoch: 1,
            clock: 0,
            learning_rate: LearningRate::Constant { gamma: 1.0 },
            rule,
        }
    }

    #[test]
    fn deadline_drops_slow_worker() {
        let s = MICROS_PER_SECOND;
        let source = FixedGradients(vec![gv(&[1.0]), gv(&[2.0]), gv(&[3.0])]);
        let attack = AttackSpec::honest(3);
        let delays = DelayModel::new(vec![s, 2 * s, 50 * s], Jitter::None, 0).unwrap();
        let mut sim =
            Simulation::new(state(3 * s, AggregationRule::Mean), &source, &attack, &delays, SimConfig::default())
                .unwrap();
        let r = sim.run_epoch().unwrap();
        assert_eq!((r.collected, r.inferred_c, r.f), (2, 1, 0));
        assert_eq!(r.collected_ids, vec![0, 1]);
        assert_eq!(r.next_delta_t, 3 * s);
        assert_eq!(r.epoch_end, 6 * s);
        assert_eq!(sim.state.w, gv(&[-1.5]));
    }

    #[test]
    fn delta_t_formula() {
        let p = DeltaTPolicy { smoothing: 0.5, floor_us: 0 };
        assert_eq!(update_delta_t(2, 5, 5, 4, &p), 3);
        assert_eq!(update_delta_t(2, 4, 5, 400, &p), 2);
        assert_eq!(update_delta_t(2_000, 5, 5, 0, &DeltaTPolicy::default()), 1_000);
        assert_eq!(update_delta_t(1, 5, 5, 0, &DeltaTPolicy::default()), 1_000);
    }

    #[test]
    fn all_crashed_is_starved() {
        let source = FixedGradients(vec![gv(&[1.0]); 3]);
        let attack = AttackSpec::builder(3).crash(0, 0).crash(1, 0).crash(2, 0).build().unwrap();
        let delays = DelayModel::uniform(3, 10, Jitter::None, 0).unwrap();
        let mut sim =
            Simulation::new(state(100, AggregationRule::parsgd()), &source, &attack, &delays, SimConfig::default())
                .unwrap();
        let r = sim.run_epoch().unwrap();
        assert_eq!(r.status, EpochStatus::Starved);
        assert_eq!(r.collected, 0);
        assert_eq!(sim.state.w, gv(&[0.0]));
        assert_eq!(sim.state.delta_t, 200);
    }

    #[test]
    fn late_replies_are_discarded_next_epoch() {
        let source = FixedGradients(vec![gv(&[1.0]), gv(&[100.0])]);
        let attack = AttackSpec::honest(2);
        let delays = DelayModel::new(vec![5, 30], Jitter::None, 0).unwrap();
        let mut sim =
            Simulation::new(state(10, AggregationRule::Mean), &source, &attack, &delays, SimConfig::default())
                .unwrap();
        let first = sim.run_epoch().unwrap();
        assert_eq!(first.collected_ids, vec![0]);
        let second = sim.run_epoch().unwrap();
        assert_eq!(second.epoch_start, 20);
        assert_eq!(second.collected_ids, vec![0]);
        assert_eq!(sim.state.w, gv(&[-2.0]));
    }

    #[test]
    fn strict_mode_stalls_on_crash() {
        let source = FixedGradients(vec![gv(&[1.0]); 3]);
        let attack = AttackSpec::builder(3).crash(1, 0).build().unwrap();
        let delays = DelayModel::uniform(3, 10, Jitter::None, 0).unwrap();
        let config = SimConfig { synchrony: Synchrony::Strict { watchdog_us: 1_000 }, ..SimConfig::default() };
        let mut sim = Simulation::new(state(100, AggregationRule::Mean), &source, &attack, &delays, config).unwrap();
        let r = sim.run_epoch().unwrap();
        assert_eq!(r.status, EpochStatus::Stalled);
        assert_eq!(sim.state.w, gv(&[0.0]));
    }

    #[test]
    fn delays_are_positive_and_keyed() {
        let d = DelayModel::uniform(4, 0, Jitter::Uniform { max_us: 50 }, 9).unwrap();
        for w in 0..4 {
            for e in 1..50 {
                let x = d.sample(w, e).unwrap();
                assert!((1..=50).contains(&x));
                assert_eq!(x, d.sample(w, e).unwrap());
            }
        }
        assert!(DelayModel::uniform(2, 5, Jitter::Exponential { mean_us: 0.0 }, 0).is_err());
        assert_eq!(d.sample(4, 1), Err(Error::UnknownWorker(4)));
    }

    #[test]
    fn learning_rate_schedules() {
        assert_eq!(LearningRate::Constant { gamma: 0.05 }.at(100), 0.05);
        assert_eq!(LearningRate::InvSqrt { gamma: 1.0 }.at(4), 0.5);
    }
}
