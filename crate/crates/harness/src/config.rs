//! Experiment configuration, read from TOML.
//!
//! A config describes one grid: every rule is run against every attack at
//! every `f` in `f_values`. The Byzantine-free attack (`kind = "none"`)
//! contributes a single `f = 0` cell per rule.

use std::path::{Path, PathBuf};

use parsgd::adversary::{AttackKind, AttackSpec, BitflipScale};
use parsgd::aggregators::{AggregationRule, SelectionMode};
use parsgd::problems::{DataGenerator, DatasetSpec, ProblemKind};
use parsgd::simnet::{DeltaTPolicy, Jitter, LearningRate, Synchrony};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub n_workers: usize,
    pub epochs: u64,
    pub batch_size: usize,
    pub learning_rate: LearningRate,
    /// L2 regularisation strength.
    #[serde(default)]
    pub lambda: f64,
    pub problem: ProblemKind,
    pub data: DataConfig,
    pub rules: Vec<RuleConfig>,
    pub attacks: Vec<AttackConfig>,
    #[serde(default)]
    pub f_values: Vec<usize>,
    #[serde(default)]
    pub delay: DelayConfig,
    /// Initial δt in µs; defaults to twice the mean base delay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_t_init_us: Option<u64>,
    #[serde(default)]
    pub delta_t: DeltaTPolicy,
    #[serde(default)]
    pub synchrony: Synchrony,
    #[serde(default = "default_max_starved")]
    pub max_consecutive_starved: u32,
    /// Measure wall-clock time around each aggregation call. Traces are
    /// then no longer byte-reproducible.
    #[serde(default)]
    pub record_timing: bool,
    /// A cell has converged when its final test loss is at most this
    /// multiple of the Byzantine-free final loss of the same rule.
    #[serde(default = "default_converged_factor")]
    pub converged_factor: f64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("traces")
}

fn default_max_starved() -> u32 {
    10
}

fn default_converged_factor() -> f64 {
    1.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    #[serde(flatten)]
    pub generator: DataGenerator,
    pub samples_per_worker: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RuleConfig {
    Mean,
    Median,
    TrimmedMean { beta: f64 },
    /// Without `f`, Krum assumes the cell's Byzantine count.
    Krum {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<usize>,
    },
    MultiKrum {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<usize>,
        m: usize,
    },
    #[serde(rename = "parsgd")]
    ParSgd {
        #[serde(default)]
        selection: SelectionMode,
    },
}

impl RuleConfig {
    pub fn label(&self) -> String {
        match self {
            RuleConfig::Mean => "mean".into(),
            RuleConfig::Median => "median".into(),
            RuleConfig::TrimmedMean { beta } => format!("trimmed-mean-{beta}"),
            RuleConfig::Krum { f: None } => "krum".into(),
            RuleConfig::Krum { f: Some(f) } => format!("krum-f{f}"),
            RuleConfig::MultiKrum { f: None, m } => format!("multi-krum-m{m}"),
            RuleConfig::MultiKrum { f: Some(f), m } => format!("multi-krum-f{f}-m{m}"),
            RuleConfig::ParSgd { selection: SelectionMode::PerCoordinate } => "parsgd".into(),
            RuleConfig::ParSgd { selection: SelectionMode::PerVector } => "parsgd-per-vector".into(),
        }
    }

    /// The concrete rule for a cell with `cell_f` faulty workers.
    pub fn resolve(&self, cell_f: usize) -> AggregationRule {
        match *self {
            RuleConfig::Mean => AggregationRule::Mean,
            RuleConfig::Median => AggregationRule::Median,
            RuleConfig::TrimmedMean { beta } => AggregationRule::TrimmedMean { beta },
            RuleConfig::Krum { f } => AggregationRule::Krum { f: f.unwrap_or(cell_f) },
            RuleConfig::MultiKrum { f, m } => AggregationRule::MultiKrum { f: f.unwrap_or(cell_f), m },
            RuleConfig::ParSgd { selection } => AggregationRule::ParSgd { selection },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AttackConfig {
    None,
    /// Byzantine workers send `−c·g`. Give either `scale` or `scale_range`.
    #[serde(rename = "bitflip")]
    BitFlip {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale_range: Option<[f64; 2]>,
    },
    Gaussian { mean: f64, sigma: f64 },
    /// Preset: Gaussian noise centred far from any gradient.
    GaussianFar,
    /// Preset: zero-mean Gaussian noise with σ = 200.
    GaussianPretend,
    /// `f` workers crash at `epoch` and never reply again.
    Crash {
        #[serde(default)]
        epoch: u64,
    },
}

pub const GAUSSIAN_FAR_MEAN: f64 = -1e8;
pub const GAUSSIAN_FAR_SIGMA: f64 = 1.0;
pub const GAUSSIAN_PRETEND_SIGMA: f64 = 200.0;

impl AttackConfig {
    pub fn label(&self) -> String {
        match self {
            AttackConfig::None => "none".into(),
            AttackConfig::BitFlip { scale: Some(c), .. } if *c != 1.0 => format!("bitflip-c{c}"),
            AttackConfig::BitFlip { scale_range: Some([lo, hi]), .. } => format!("bitflip-c{lo}-{hi}"),
            AttackConfig::BitFlip { .. } => "bitflip".into(),
            AttackConfig::Gaussian { mean, sigma } => format!("gaussian-m{mean}-s{sigma}"),
            AttackConfig::GaussianFar => "gaussian-far".into(),
            AttackConfig::GaussianPretend => "gaussian-pretend".into(),
            AttackConfig::Crash { epoch: 0 } => "crash".into(),
            AttackConfig::Crash { epoch } => format!("crash-e{epoch}"),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, AttackConfig::None)
    }

    /// Build the attack for a cell, given the ids of its faulty workers.
    pub fn build(&self, n_workers: usize, faulty: &[usize], seed: u64) -> parsgd::Result<AttackSpec> {
        let b = AttackSpec::builder(n_workers).seed(seed);
        match *self {
            AttackConfig::None => b.build(),
            AttackConfig::BitFlip { scale, scale_range } => {
                let scale = match (scale, scale_range) {
                    (_, Some([low, high])) => BitflipScale::RandomPerWorker { low, high },
                    (Some(c), None) => BitflipScale::Constant(c),
                    (None, None) => BitflipScale::default(),
                };
                b.kind(AttackKind::BitFlip).byzantine(faulty.iter().copied()).bitflip_scale(scale).build()
            }
            AttackConfig::Gaussian { mean, sigma } => gaussian(b, faulty, mean, sigma),
            AttackConfig::GaussianFar => gaussian(b, faulty, GAUSSIAN_FAR_MEAN, GAUSSIAN_FAR_SIGMA),
            AttackConfig::GaussianPretend => gaussian(b, faulty, 0.0, GAUSSIAN_PRETEND_SIGMA),
            AttackConfig::Crash { epoch } => {
                faulty.iter().fold(b, |b, &w| b.crash(w, epoch)).build()
            }
        }
    }
}

fn gaussian(
    b: parsgd::adversary::AttackSpecBuilder,
    faulty: &[usize],
    mean: f64,
    sigma: f64,
) -> parsgd::Result<AttackSpec> {
    b.kind(AttackKind::Gaussian).byzantine(faulty.iter().copied()).gaussian(mean, sigma).build()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayConfig {
    /// Base delay of every worker, in µs.
    #[serde(default = "default_base_us")]
    pub base_us: u64,
    /// Per-worker base delays; overrides `base_us` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_worker_us: Option<Vec<u64>>,
    #[serde(default)]
    pub jitter: Jitter,
}

fn default_base_us() -> u64 {
    10_000
}

impl Default for DelayConfig {
    fn default() -> Self {
        Self { base_us: default_base_us(), per_worker_us: None, jitter: Jitter::default() }
    }
}

impl DelayConfig {
    pub fn bases(&self, n_workers: usize) -> Vec<u64> {
        self.per_worker_us.clone().unwrap_or_else(|| vec![self.base_us; n_workers])
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let config = Self::from_toml(&text)
            .map_err(|message| ConfigError::Parse { path: path.to_path_buf(), message })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serialisable")
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        DatasetSpec {
            generator: self.data.generator.clone(),
            n_workers: self.n_workers,
            samples_per_worker: self.data.samples_per_worker,
            train_fraction: self.data.train_fraction,
            seed: self.seed,
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring `output_dir`.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config is always serialisable");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        let digest = Sha256::digest(value.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `f` values with `2f ≥ n`: allowed, but beyond the majority bound.
    pub fn warnings(&self) -> Vec<String> {
        self.f_values
            .iter()
            .filter(|&&f| 2 * f >= self.n_workers)
            .map(|f| format!("f_values: {f} is not below n/2 = {}", self.n_workers as f64 / 2.0))
            .collect()
    }

    /// Every violated constraint, each with its field path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut p = Vec::new();
        if self.n_workers == 0 {
            p.push("n_workers: must be ≥ 1".to_string());
        }
        if self.epochs == 0 {
            p.push("epochs: must be ≥ 1".to_string());
        }
        if self.batch_size == 0 {
            p.push("batch_size: must be ≥ 1".to_string());
        } else if self.batch_size > self.data.samples_per_worker && self.problem != ProblemKind::Quadratic {
            p.push(format!(
                "batch_size: {} exceeds data.samples_per_worker = {}",
                self.batch_size, self.data.samples_per_worker
            ));
        }
        let gamma = self.learning_rate.gamma();
        if !(gamma.is_finite() && gamma > 0.0) {
            p.push(format!("learning_rate.gamma: must be finite and > 0, got {gamma}"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            p.push(format!("lambda: must be finite and ≥ 0, got {}", self.lambda));
        }
        if let ProblemKind::TinyMlp { hidden } = self.problem {
            if hidden == 0 || hidden > parsgd::problems::MAX_HIDDEN {
                p.push(format!("problem.hidden: must lie in 1..={}", parsgd::problems::MAX_HIDDEN));
            }
        }
        match (&self.problem, &self.data.generator) {
            (ProblemKind::Quadratic, DataGenerator::FixedQuadratic { .. }) => {}
            (ProblemKind::Quadratic, _) => p.push("data.generator: quadratic needs fixed-quadratic".into()),
            (_, DataGenerator::FixedQuadratic { .. }) => {
                p.push("data.generator: fixed-quadratic only fits the quadratic problem".into())
            }
            _ => {}
        }
        if self.data.samples_per_worker == 0 {
            p.push("data.samples_per_worker: must be ≥ 1".to_string());
        }
        if !(self.data.train_fraction > 0.0 && self.data.train_fraction < 1.0) {
            p.push(format!("data.train_fraction: must lie in (0, 1), got {}", self.data.train_fraction));
        }
        if let DataGenerator::GaussianBlobs { classes, features, separation, noise } = self.data.generator {
            if classes < 2 {
                p.push("data.classes: must be ≥ 2".to_string());
            }
            if features == 0 {
                p.push("data.features: must be ≥ 1".to_string());
            }
            if !(separation.is_finite() && separation >= 0.0) {
                p.push("data.separation: must be finite and ≥ 0".to_string());
            }
            if !(noise.is_finite() && noise >= 0.0) {
                p.push("data.noise: must be finite and ≥ 0".to_string());
            }
        }
        if self.rules.is_empty() {
            p.push("rules: need at least one rule".to_string());
        }
        for (i, rule) in self.rules.iter().enumerate() {
            match *rule {
                RuleConfig::TrimmedMean { beta } if !(0.0..0.5).contains(&beta) => {
                    p.push(format!("rules[{i}].beta: must lie in [0, 0.5), got {beta}"))
                }
                RuleConfig::MultiKrum { m: 0, .. } => p.push(format!("rules[{i}].m: must be ≥ 1")),
                _ => {}
            }
        }
        if self.attacks.is_empty() {
            p.push("attacks: need at least one attack".to_string());
        }
        let sweeps = self.attacks.iter().any(|a| !a.is_none());
        if sweeps && self.f_values.is_empty() {
            p.push("f_values: needed for attacks other than none".to_string());
        }
        for (i, attack) in self.attacks.iter().enumerate() {
            match *attack {
                AttackConfig::BitFlip { scale: Some(_), scale_range: Some(_) } => {
                    p.push(format!("attacks[{i}]: give scale or scale_range, not both"))
                }
                AttackConfig::BitFlip { scale: Some(c), .. } if !(c.is_finite() && c >= 0.0) => {
                    p.push(format!("attacks[{i}].scale: must be finite and ≥ 0, got {c}"))
                }
                AttackConfig::BitFlip { scale_range: Some([lo, hi]), .. }
                    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) =>
                {
                    p.push(format!("attacks[{i}].scale_range: [{lo}, {hi}] is not a valid range"))
                }
                AttackConfig::Gaussian { mean, sigma } => {
                    if !mean.is_finite() {
                        p.push(format!("attacks[{i}].mean: must be finite"));
                    }
                    if !(sigma.is_finite() && sigma >= 0.0) {
                        p.push(format!("attacks[{i}].sigma: must be finite and ≥ 0, got {sigma}"));
                    }
                }
                _ => {}
            }
        }
        for (i, &f) in self.f_values.iter().enumerate() {
            if f > self.n_workers {
                p.push(format!("f_values[{i}]: {f} exceeds n_workers = {}", self.n_workers));
            }
        }
        if let Some(bases) = &self.delay.per_worker_us {
            if bases.len() != self.n_workers {
                p.push(format!(
                    "delay.per_worker_us: has {} entries, expected n_workers = {}",
                    bases.len(),
                    self.n_workers
                ));
            }
        }
        if let Jitter::Exponential { mean_us } = self.delay.jitter {
            if !(mean_us.is_finite() && mean_us > 0.0) {
                p.push(format!("delay.jitter.mean_us: must be finite and > 0, got {mean_us}"));
            }
        }
        if self.delta_t_init_us == Some(0) {
            p.push("delta_t_init_us: must be > 0".to_string());
        }
        if !(0.0..=1.0).contains(&self.delta_t.smoothing) {
            p.push(format!("delta_t.smoothing: must lie in [0, 1], got {}", self.delta_t.smoothing));
        }
        if let Synchrony::Strict { watchdog_us: 0 } = self.synchrony {
            p.push("synchrony.watchdog_us: must be > 0".to_string());
        }
        if self.max_consecutive_starved == 0 {
            p.push("max_consecutive_starved: must be ≥ 1".to_string());
        }
        if !(self.converged_factor.is_finite() && self.converged_factor >= 1.0) {
            p.push(format!("converged_factor: must be finite and ≥ 1, got {}", self.converged_factor));
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(p))
        }
    }
}
