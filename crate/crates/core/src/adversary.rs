//! Seeded corruption of worker updates.
//!
//! Three fault models:
//!
//! * crash-stop: from its crash epoch on, a worker never sends again;
//! * bit-flip: a Byzantine worker sends `−c_i·g` instead of its gradient `g`;
//! * Gaussian: a Byzantine worker sends i.i.d. `N(mean, sigma²)` noise.
//!
//! Every random draw is keyed by `(seed, worker, epoch)`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::simnet::WorkerUpdate;
use crate::stats::GradientVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    #[default]
    None,
    #[serde(rename = "bitflip")]
    BitFlip,
    Gaussian,
}

impl AttackKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::BitFlip => "bitflip",
            AttackKind::Gaussian => "gaussian",
        }
    }
}

/// The constant `c_i` a bit-flipping worker multiplies its gradient by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BitflipScale {
    Constant(f64),
    /// Drawn once per worker from `Uniform[low, high]`.
    RandomPerWorker { low: f64, high: f64 },
}

impl Default for BitflipScale {
    fn default() -> Self {
        BitflipScale::Constant(1.0)
    }
}

impl BitflipScale {
    pub fn random_default() -> Self {
        BitflipScale::RandomPerWorker { low: 0.5, high: 2.0 }
    }
}

/// Result of passing an update through the adversary.
#[derive(Debug, Clone, PartialEq)]
pub enum Delivery {
    Delivered(WorkerUpdate),
    /// The worker has crashed; nothing is sent.
    Dropped,
}

impl Delivery {
    pub fn into_update(self) -> Option<WorkerUpdate> {
        match self {
            Delivery::Delivered(u) => Some(u),
            Delivery::Dropped => None,
        }
    }
}

/// Which workers misbehave, and how.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSpec {
    n_workers: usize,
    byzantine: BTreeSet<usize>,
    crashes: BTreeMap<usize, u64>,
    kind: AttackKind,
    bitflip_scale: BitflipScale,
    gaussian_mean: f64,
    gaussian_sigma: f64,
    seed: u64,
}

impl AttackSpec {
    pub fn builder(n_workers: usize) -> AttackSpecBuilder {
        AttackSpecBuilder {
            spec: AttackSpec {
                n_workers,
                byzantine: BTreeSet::new(),
                crashes: BTreeMap::new(),
                kind: AttackKind::None,
                bitflip_scale: BitflipScale::default(),
                gaussian_mean: 0.0,
                gaussian_sigma: 1.0,
                seed: 0,
            },
        }
    }

    /// No Byzantine and no crashed workers.
    pub fn honest(n_workers: usize) -> Self {
        Self::builder(n_workers).build().expect("honest spec is always valid")
    }

    pub fn n_workers(&self) -> usize {
        self.n_workers
    }

    pub fn kind(&self) -> AttackKind {
        self.kind
    }

    pub fn byzantine_ids(&self) -> &BTreeSet<usize> {
        &self.byzantine
    }

    pub fn crash_schedule(&self) -> &BTreeMap<usize, u64> {
        &self.crashes
    }

    pub fn byzantine_count(&self) -> usize {
        self.byzantine.len()
    }

    pub fn crash_count(&self) -> usize {
        self.crashes.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bitflip_scale(&self) -> BitflipScale {
        self.bitflip_scale
    }

    pub fn gaussian_params(&self) -> (f64, f64) {
        (self.gaussian_mean, self.gaussian_sigma)
    }

    /// Faulty fraction `(f + c) / n`.
    pub fn alpha(&self) -> f64 {
        (self.byzantine.len() + self.crashes.len()) as f64 / self.n_workers as f64
    }

    pub fn is_byzantine(&self, worker: usize) -> bool {
        self.byzantine.contains(&worker)
    }

    /// `false` iff the worker is scheduled to crash at or before `epoch`.
    pub fn is_active(&self, worker: usize, epoch: u64) -> Result<bool> {
        if worker >= self.n_workers {
            return Err(Error::UnknownWorker(worker));
        }
        Ok(match self.crashes.get(&worker) {
            Some(&crash_epoch) => epoch < crash_epoch,
            None => true,
        })
    }

    /// The `c_i` used by `worker` under a bit-flip attack.
    pub fn scale_for(&self, worker: usize) -> f64 {
        match self.bitflip_scale {
            BitflipScale::Constant(c) => c,
            BitflipScale::RandomPerWorker { low, high } => {
                let mut rng = stream_rng(self.seed, Stream::BitflipScale, worker as u64, 0);
                if low == high {
                    low
                } else {
                    rng.gen_range(low..high)
                }
            }
        }
    }

    /// Apply this attack to one worker's submission.
    ///
    /// Updates from workers outside the attack's id range pass through
    /// unchanged.
    pub fn corrupt(&self, update: WorkerUpdate) -> Delivery {
        if !self.is_active(update.worker_id, update.epoch).unwrap_or(true) {
            return Delivery::Dropped;
        }
        if !self.is_byzantine(update.worker_id) {
            return Delivery::Delivered(update);
        }
        let gradient = match self.kind {
            AttackKind::None => return Delivery::Delivered(update),
            AttackKind::BitFlip => update.gradient.scaled(-self.scale_for(update.worker_id)),
            AttackKind::Gaussian => self.gaussian_noise(update.worker_id, update.epoch, update.gradient.dim()),
        };
        Delivery::Delivered(WorkerUpdate { gradient, ..update })
    }

    fn gaussian_noise(&self, worker: usize, epoch: u64, dim: usize) -> GradientVector {
        let normal = Normal::new(self.gaussian_mean, self.gaussian_sigma)
            .expect("sigma validated at construction");
        let mut rng = stream_rng(self.seed, Stream::Attack, worker as u64, epoch);
        GradientVector::saturating((0..dim).map(|_| normal.sample(&mut rng)).collect())
    }
}

pub struct AttackSpecBuilder {
    spec: AttackSpec,
}

impl AttackSpecBuilder {
    pub fn kind(mut self, kind: AttackKind) -> Self {
        self.spec.kind = kind;
        self
    }

    pub fn byzantine(mut self, ids: impl IntoIterator<Item = usize>) -> Self {
        self.spec.byzantine.extend(ids);
        self
    }

    /// Crash `worker` from `epoch` on.
    pub fn crash(mut self, worker: usize, epoch: u64) -> Self {
        self.spec.crashes.insert(worker, epoch);
        self
    }

    pub fn bitflip_scale(mut self, scale: BitflipScale) -> Self {
        self.spec.bitflip_scale = scale;
        self
    }

    pub fn gaussian(mut self, mean: f64, sigma: f64) -> Self {
        self.spec.gaussian_mean = mean;
        self.spec.gaussian_sigma = sigma;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.spec.seed = seed;
        self
    }

    pub fn build(self) -> Result<AttackSpec> {
        let s = self.spec;
        let mut problems = Vec::new();
        if s.n_workers == 0 {
            problems.push("n_workers must be ≥ 1".to_string());
        }
        for &id in s.byzantine.iter().chain(s.crashes.keys()) {
            if id >= s.n_workers {
                problems.push(format!("worker id {id} out of range for {} workers", s.n_workers));
            }
        }
        let overlap: Vec<_> = s.byzantine.iter().filter(|id| s.crashes.contains_key(id)).collect();
        if !overlap.is_empty() {
            problems.push(format!("workers {overlap:?} are both Byzantine and crashed"));
        }
        if s.byzantine.len() + s.crashes.len() > s.n_workers {
            problems.push("more faulty workers than workers".to_string());
        }
        match s.bitflip_scale {
            BitflipScale::Constant(c) if !(c.is_finite() && c >= 0.0) => {
                problems.push(format!("bitflip scale must be finite and ≥ 0, got {c}"))
            }
            BitflipScale::RandomPerWorker { low, high }
                if !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high) =>
            {
                problems.push(format!("bitflip scale range [{low}, {high}] is invalid"))
            }
            _ => {}
        }
        if !s.gaussian_mean.is_finite() {
            problems.push("gaussian mean must be finite".to_string());
        }
        if !(s.gaussian_sigma.is_finite() && s.gaussian_sigma >= 0.0) {
            problems.push(format!("gaussian sigma must be finite and ≥ 0, got {}", s.gaussian_sigma));
        }
        if problems.is_empty() {
            Ok(s)
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn update(worker: usize, epoch: u64, values: &[f64]) -> WorkerUpdate {
        WorkerUpdate {
            worker_id: worker,
            epoch,
            gradient: GradientVector::new(values.to_vec()).unwrap(),
            arrival_time: 0,
        }
    }

    fn delivered(d: Delivery) -> Vec<f64> {
        d.into_update().expect("delivered").gradient.into_vec()
    }

    #[test]
    fn bitflip_negates() {
        let spec = AttackSpec::builder(3).kind(AttackKind::BitFlip).byzantine([1]).build().unwrap();
        assert_eq!(delivered(spec.corrupt(update(1, 4, &[1.0, -2.0]))), vec![-1.0, 2.0]);
        assert_eq!(delivered(spec.corrupt(update(0, 4, &[1.0, -2.0]))), vec![1.0, -2.0]);
    }

    #[test]
    fn bitflip_zero_scale_gives_zero_vector() {
        let spec = AttackSpec::builder(2)
            .kind(AttackKind::BitFlip)
            .byzantine([0])
            .bitflip_scale(BitflipScale::Constant(0.0))
            .build()
            .unwrap();
        assert!(delivered(spec.corrupt(update(0, 1, &[3.0, -4.0]))).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bitflip_twice_restores() {
        let spec = AttackSpec::builder(1).kind(AttackKind::BitFlip).byzantine([0]).build().unwrap();
        let original = update(0, 2, &[0.1, -7.25, 3e9]);
        let once = spec.corrupt(original.clone()).into_update().unwrap();
        let twice = spec.corrupt(once).into_update().unwrap();
        assert_eq!(twice, original);
    }

    #[test]
    fn random_scale_is_fixed_per_worker() {
        let spec = AttackSpec::builder(4)
            .kind(AttackKind::BitFlip)
            .byzantine([0, 1])
            .bitflip_scale(BitflipScale::random_default())
            .seed(11)
            .build()
            .unwrap();
        let c0 = spec.scale_for(0);
        assert!((0.5..2.0).contains(&c0));
        assert_eq!(c0, spec.scale_for(0));
        assert_ne!(c0, spec.scale_for(1));
        assert_eq!(delivered(spec.corrupt(update(0, 9, &[2.0]))), vec![-2.0 * c0]);
    }

    #[test]
    fn gaussian_far_mean_monte_carlo() {
        let sigma = 1.0;
        let spec = AttackSpec::builder(1)
            .kind(AttackKind::Gaussian)
            .byzantine([0])
            .gaussian(-1e8, sigma)
            .seed(3)
            .build()
            .unwrap();
        let d = 10;
        let trials = 10_000;
        let mut sum = 0.0;
        for epoch in 0..trials {
            let out = delivered(spec.corrupt(update(0, epoch, &vec![0.0; d])));
            sum += out.iter().map(|v| v + 1e8).sum::<f64>();
        }
        let samples = (d as u64 * trials) as f64;
        let bound = 3.0 * sigma / samples.sqrt();
        assert!((sum / samples).abs() <= bound, "{} > {bound}", sum / samples);
    }

    #[test]
    fn gaussian_is_keyed_by_worker_and_epoch() {
        let spec = AttackSpec::builder(3)
            .kind(AttackKind::Gaussian)
            .byzantine([0, 1])
            .gaussian(0.0, 200.0)
            .seed(5)
            .build()
            .unwrap();
        let a = delivered(spec.corrupt(update(0, 1, &[0.0; 4])));
        assert_eq!(a, delivered(spec.corrupt(update(0, 1, &[9.0; 4]))));
        assert_ne!(a, delivered(spec.corrupt(update(0, 2, &[0.0; 4]))));
        assert_ne!(a, delivered(spec.corrupt(update(1, 1, &[0.0; 4]))));
    }

    #[test]
    fn gaussian_zero_sigma_is_constant() {
        let spec = AttackSpec::builder(1)
            .kind(AttackKind::Gaussian)
            .byzantine([0])
            .gaussian(2.5, 0.0)
            .build()
            .unwrap();
        assert_eq!(delivered(spec.corrupt(update(0, 1, &[0.0; 3]))), vec![2.5; 3]);
    }

    #[test]
    fn crash_schedule() {
        let spec = AttackSpec::builder(3).crash(2, 10).build().unwrap();
        assert!(spec.is_active(2, 9).unwrap());
        assert!(!spec.is_active(2, 10).unwrap());
        assert!(!spec.is_active(2, 1000).unwrap());
        assert!(spec.is_active(0, 12345).unwrap());
        assert_eq!(spec.is_active(3, 0), Err(Error::UnknownWorker(3)));
        assert_eq!(spec.corrupt(update(2, 10, &[1.0])), Delivery::Dropped);
        assert!(spec.corrupt(update(2, 9, &[1.0])).into_update().is_some());
    }

    #[test]
    fn crash_monotone() {
        let spec = AttackSpec::builder(5).crash(0, 0).crash(1, 3).crash(4, 7).build().unwrap();
        for w in 0..5 {
            let seq: Vec<bool> = (0..20).map(|e| spec.is_active(w, e).unwrap()).collect();
            let first_false = seq.iter().position(|a| !a).unwrap_or(seq.len());
            assert!(seq[first_false..].iter().all(|a| !a));
            assert!(seq[..first_false].iter().all(|&a| a));
        }
    }

    #[test]
    fn validation_enumerates_problems() {
        let err = AttackSpec::builder(3)
            .byzantine([0, 5])
            .crash(0, 1)
            .gaussian(0.0, -1.0)
            .build()
            .unwrap_err();
        match err {
            Error::InvalidConfig(problems) => assert_eq!(problems.len(), 3, "{problems:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alpha_counts_both_fault_kinds() {
        let spec = AttackSpec::builder(10).byzantine([0, 1]).crash(2, 0).build().unwrap();
        assert!((spec.alpha() - 0.3).abs() < 1e-15);
    }
}
