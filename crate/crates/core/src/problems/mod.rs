//! Desk-scale training objectives with exact gradients.
//!
//! The global objective is `Q(w) = Σ_i (|S_i| / N) · Q_i(w)`, where worker
//! `i` owns shard `S_i`. With equal shard sizes this is the plain average of
//! the per-worker objectives.
//!
//! * [`ProblemKind::Quadratic`]: `Q_i(w) = ½‖w − w*‖² + ½λ‖w‖²` for every
//!   worker. Lipschitz-smooth and strongly convex with `L = L' = μ = 1` at
//!   `λ = 0`.
//! * [`ProblemKind::LogisticRegression`]: multinomial logistic regression
//!   with a bias per class.
//! * [`ProblemKind::TinyMlp`]: one tanh hidden layer and a softmax output.

pub mod idx;

use std::path::PathBuf;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::stats::GradientVector;

/// Largest hidden layer accepted for [`ProblemKind::TinyMlp`].
pub const MAX_HIDDEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemKind {
    Quadratic,
    #[serde(rename = "logistic")]
    LogisticRegression,
    #[serde(rename = "mlp")]
    TinyMlp { hidden: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum DataGenerator {
    GaussianBlobs { classes: usize, features: usize, separation: f64, noise: f64 },
    FixedQuadratic { optimum: Vec<f64> },
    /// MNIST-style IDX files; pixels are scaled to `[0, 1]` before
    /// normalisation.
    Idx { images: PathBuf, labels: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub generator: DataGenerator,
    pub n_workers: usize,
    /// Training samples per worker; every shard has exactly this many.
    pub samples_per_worker: usize,
    /// Fraction of all data used for training. The test set gets the rest.
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_train_fraction() -> f64 {
    0.8
}

impl DatasetSpec {
    pub fn test_size(&self) -> usize {
        let train = (self.n_workers * self.samples_per_worker) as f64;
        ((train * (1.0 - self.train_fraction) / self.train_fraction).round() as usize).max(1)
    }
}

/// A block of labelled samples, features stored row-major.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Samples {
    pub features: usize,
    pub x: Vec<f64>,
    pub y: Vec<usize>,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.features..(i + 1) * self.features]
    }

    fn push(&mut self, row: &[f64], label: usize) {
        self.x.extend_from_slice(row);
        self.y.push(label);
    }
}

/// Per-worker training shards and a held-out test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub classes: usize,
    pub features: usize,
    pub shards: Vec<Samples>,
    pub test: Samples,
}

impl Dataset {
    pub fn train_len(&self) -> usize {
        self.shards.iter().map(Samples::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratedData {
    Labeled(Dataset),
    Quadratic { optimum: GradientVector, n_workers: usize },
}

/// Build the per-worker shards described by `spec`. Deterministic in
/// `spec.seed`; features are standardised to zero mean and unit variance.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<GeneratedData> {
    if spec.n_workers == 0 || spec.samples_per_worker == 0 {
        return Err(Error::InfeasibleDataset("need ≥ 1 worker and ≥ 1 sample per worker".into()));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InfeasibleDataset(format!(
            "train fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let n_train = spec.n_workers * spec.samples_per_worker;
    let n_test = spec.test_size();
    let (classes, features, mut all) = match &spec.generator {
        DataGenerator::FixedQuadratic { optimum } => {
            let optimum = GradientVector::new(optimum.clone())
                .map_err(|e| Error::InfeasibleDataset(format!("optimum: {e}")))?;
            return Ok(GeneratedData::Quadratic { optimum, n_workers: spec.n_workers });
        }
        &DataGenerator::GaussianBlobs { classes, features, separation, noise } => {
            if classes < 2 || features == 0 {
                return Err(Error::InfeasibleDataset(
                    "blobs need ≥ 2 classes and ≥ 1 feature".into(),
                ));
            }
            if n_train < classes || n_test < classes {
                return Err(Error::InfeasibleDataset(format!(
                    "{n_train} training / {n_test} test samples cannot cover {classes} classes"
                )));
            }
            if !(separation.is_finite() && separation >= 0.0 && noise.is_finite() && noise >= 0.0) {
                return Err(Error::InfeasibleDataset(
                    "separation and noise must be finite and ≥ 0".into(),
                ));
            }
            let samples = blobs(spec.seed, classes, features, separation, noise, n_train, n_test);
            (classes, features, samples)
        }
        DataGenerator::Idx { images, labels } => {
            let images = idx::read_images(images)?;
            let labels = idx::read_labels(labels)?;
            if images.len() != labels.len() {
                return Err(Error::Idx(format!(
                    "{} images but {} labels",
                    images.len(),
                    labels.len()
                )));
            }
            if images.len() < n_train + n_test {
                return Err(Error::InfeasibleDataset(format!(
                    "need {} samples, file holds {}",
                    n_train + n_test,
                    images.len()
                )));
            }
            let classes = labels.iter().copied().max().map_or(0, |m| m as usize + 1).max(2);
            let features = images.rows * images.cols;
            let mut all = Samples { features, ..Samples::default() };
            for (i, &label) in labels.iter().enumerate().take(n_train + n_test) {
                let row: Vec<f64> = images.image(i).iter().map(|&p| p as f64 / 255.0).collect();
                all.push(&row, label as usize);
            }
            (classes, features, all)
        }
    };
    standardise(&mut all);

    let mut shards = Vec::with_capacity(spec.n_workers);
    for w in 0..spec.n_workers {
        let mut shard = Samples { features, ..Samples::default() };
        for i in w * spec.samples_per_worker..(w + 1) * spec.samples_per_worker {
            shard.push(all.row(i), all.y[i]);
        }
        shards.push(shard);
    }
    let mut test = Samples { features, ..Samples::default() };
    for i in n_train..n_train + n_test {
        test.push(all.row(i), all.y[i]);
    }
    Ok(GeneratedData::Labeled(Dataset { classes, features, shards, test }))
}

/// Train samples first, then test samples; labels balanced within each.
fn blobs(
    seed: u64,
    classes: usize,
    features: usize,
    separation: f64,
    noise: f64,
    n_train: usize,
    n_test: usize,
) -> Samples {
    let mut rng = stream_rng(seed, Stream::Dataset, 0, 0);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            let dir: Vec<f64> = (0..features).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            dir.into_iter().map(|v| separation * v / norm).collect()
        })
        .collect();
    let mut out = Samples { features, ..Samples::default() };
    for count in [n_train, n_test] {
        let mut labels: Vec<usize> = (0..count).map(|i| i % classes).collect();
        labels.shuffle(&mut rng);
        for label in labels {
            let row: Vec<f64> = centers[label]
                .iter()
                .map(|c| c + noise * rng.sample::<f64, _>(StandardNormal))
                .collect();
            out.push(&row, label);
        }
    }
    out
}

fn standardise(samples: &mut Samples) {
    let n = samples.len() as f64;
    let p = samples.features;
    for j in 0..p {
        let mean = (0..samples.len()).map(|i| samples.x[i * p + j]).sum::<f64>() / n;
        let var = (0..samples.len())
            .map(|i| (samples.x[i * p + j] - mean).powi(2))
            .sum::<f64>()
            / n;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        for i in 0..samples.len() {
            samples.x[i * p + j] = (samples.x[i * p + j] - mean) / sd;
        }
    }
}

/// Which evaluation set to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    /// `None` for the quadratic problem, which has no labels.
    pub top1: Option<f64>,
    pub topk: Option<f64>,
    pub k: usize,
}

/// `k` for Top-k accuracy: 5 when there are more than five classes,
/// otherwise `classes − 1` (at least 1).
pub fn topk_k(classes: usize) -> usize {
    if classes > 5 {
        5
    } else {
        classes.saturating_sub(1).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Quadratic { optimum: GradientVector, n_workers: usize },
    Logistic { data: Dataset },
    Mlp { data: Dataset, hidden: usize, init: GradientVector },
}

/// A training objective split across workers.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    model: Model,
    lambda: f64,
}

impl Problem {
    pub fn new(kind: ProblemKind, data: GeneratedData, lambda: f64, seed: u64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("λ must be finite and ≥ 0, got {lambda}")));
        }
        let model = match (kind, data) {
            (ProblemKind::Quadratic, GeneratedData::Quadratic { optimum, n_workers }) => {
                Model::Quadratic { optimum, n_workers }
            }
            (ProblemKind::LogisticRegression, GeneratedData::Labeled(data)) => {
                check_shards(&data)?;
                Model::Logistic { data }
            }
            (ProblemKind::TinyMlp { hidden }, GeneratedData::Labeled(data)) => {
                check_shards(&data)?;
                if hidden == 0 || hidden > MAX_HIDDEN {
                    return Err(Error::InvalidParameter(format!(
                        "hidden units must lie in 1..={MAX_HIDDEN}, got {hidden}"
                    )));
                }
                let init = mlp_init(seed, data.features, hidden, data.classes);
                Model::Mlp { data, hidden, init }
            }
            (kind, _) => {
                return Err(Error::InvalidParameter(format!(
                    "{kind:?} does not match the generated data"
                )))
            }
        };
        Ok(Self { model, lambda })
    }

    /// Build straight from a dataset spec.
    pub fn generate(kind: ProblemKind, spec: &DatasetSpec, lambda: f64) -> Result<Self> {
        Self::new(kind, generate_dataset(spec)?, lambda, spec.seed)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kind(&self) -> ProblemKind {
        match &self.model {
            Model::Quadratic { .. } => ProblemKind::Quadratic,
            Model::Logistic { .. } => ProblemKind::LogisticRegression,
            Model::Mlp { hidden, .. } => ProblemKind::TinyMlp { hidden: *hidden },
        }
    }

    pub fn dataset(&self) -> Option<&Dataset> {
        match &self.model {
            Model::Quadratic { .. } => None,
            Model::Logistic { data } | Model::Mlp { data, .. } => Some(data),
        }
    }

    /// Parameter dimension `d`.
    pub fn dim(&self) -> usize {
        match &self.model {
            Model::Quadratic { optimum, .. } => optimum.dim(),
            Model::Logistic { data } => data.classes * (data.features + 1),
            Model::Mlp { data, hidden, .. } => {
                hidden * (data.features + 1) + data.classes * (hidden + 1)
            }
        }
    }

    pub fn n_workers(&self) -> usize {
        match &self.model {
            Model::Quadratic { n_workers, .. } => *n_workers,
            Model::Logistic { data } | Model::Mlp { data, .. } => data.shards.len(),
        }
    }

    pub fn shard_len(&self, worker: usize) -> usize {
        match self.dataset() {
            None => 1,
            Some(data) => data.shards.get(worker).map_or(0, Samples::len),
        }
    }

    pub fn initial_parameters(&self) -> GradientVector {
        match &self.model {
            Model::Mlp { init, .. } => init.clone(),
            _ => GradientVector::zeros(self.dim()),
        }
    }

    fn check_w(&self, w: &GradientVector) -> Result<()> {
        if w.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: w.dim() });
        }
        Ok(())
    }

    fn shard(&self, worker: usize) -> Result<Option<&Samples>> {
        match self.dataset() {
            None if worker < self.n_workers() => Ok(None),
            None => Err(Error::UnknownWorker(worker)),
            Some(data) => {
                let shard = data.shards.get(worker).ok_or(Error::UnknownWorker(worker))?;
                if shard.is_empty() {
                    return Err(Error::InfeasibleDataset(format!("worker {worker} has an empty shard")));
                }
                Ok(Some(shard))
            }
        }
    }

    /// Mini-batch gradient of worker `worker`'s objective at `w`.
    ///
    /// A batch as large as the shard uses the whole shard in order and
    /// draws nothing from `rng`. The quadratic problem is always exact.
    pub fn local_gradient<R: Rng>(
        &self,
        w: &GradientVector,
        worker: usize,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<GradientVector> {
        self.check_w(w)?;
        let Some(shard) = self.shard(worker)? else {
            return Ok(self.quadratic_gradient(w));
        };
        if batch_size == 0 || batch_size > shard.len() {
            return Err(Error::InvalidParameter(format!(
                "batch size {batch_size} must lie in 1..={} for worker {worker}",
                shard.len()
            )));
        }
        let batch: Vec<usize> = if batch_size == shard.len() {
            (0..shard.len()).collect()
        } else {
            let mut idx = index::sample(rng, shard.len(), batch_size).into_vec();
            idx.sort_unstable();
            idx
        };
        Ok(self.batch_loss_grad(w, shard, &batch, true).1.expect("gradient requested"))
    }

    /// Full-shard gradient of worker `worker`.
    pub fn shard_gradient(&self, w: &GradientVector, worker: usize) -> Result<GradientVector> {
        self.check_w(w)?;
        match self.shard(worker)? {
            None => Ok(self.quadratic_gradient(w)),
            Some(shard) => {
                let all: Vec<usize> = (0..shard.len()).collect();
                Ok(self.batch_loss_grad(w, shard, &all, true).1.expect("gradient requested"))
            }
        }
    }

    /// Objective (data loss plus ½λ‖w‖²) and gradient on a batch of
    /// worker `worker`'s shard.
    pub fn batch_objective(
        &self,
        w: &GradientVector,
        worker: usize,
        batch: &[usize],
    ) -> Result<(f64, GradientVector)> {
        self.check_w(w)?;
        match self.shard(worker)? {
            None => Ok((self.quadratic_objective(w), self.quadratic_gradient(w))),
            Some(shard) => {
                if batch.is_empty() || batch.iter().any(|&i| i >= shard.len()) {
                    return Err(Error::InvalidParameter("batch indices out of range".into()));
                }
                let (loss, grad) = self.batch_loss_grad(w, shard, batch, true);
                Ok((loss, grad.expect("gradient requested")))
            }
        }
    }

    /// Gradient of the global objective over every training sample.
    pub fn full_gradient(&self, w: &GradientVector) -> Result<GradientVector> {
        self.check_w(w)?;
        match self.dataset() {
            None => Ok(self.quadratic_gradient(w)),
            Some(data) => {
                let mut all = Samples { features: data.features, ..Samples::default() };
                for shard in &data.shards {
                    all.x.extend_from_slice(&shard.x);
                    all.y.extend_from_slice(&shard.y);
                }
                let idx: Vec<usize> = (0..all.len()).collect();
                Ok(self.batch_loss_grad(w, &all, &idx, true).1.expect("gradient requested"))
            }
        }
    }

    /// Mean data loss plus Top-1 and Top-k accuracy on a split.
    ///
    /// For the quadratic problem, the loss is the full objective and
    /// accuracies are `None`.
    pub fn evaluate(&self, w: &GradientVector, split: Split) -> Result<Evaluation> {
        self.check_w(w)?;
        let data = match self.dataset() {
            None => {
                return Ok(Evaluation { loss: self.quadratic_objective(w), top1: None, topk: None, k: 1 })
            }
            Some(data) => data,
        };
        let k = topk_k(data.classes);
        let (mut loss, mut hit1, mut hitk, mut count) = (0.0, 0usize, 0usize, 0usize);
        let mut scores = vec![0.0; data.classes];
        let mut scratch = Vec::new();
        let mut score_block = |samples: &Samples| {
            for i in 0..samples.len() {
                self.scores(w.as_slice(), samples.row(i), &mut scores, &mut scratch);
                let y = samples.y[i];
                loss += cross_entropy(&scores, y);
                let rank = scores
                    .iter()
                    .enumerate()
                    .filter(|&(c, &s)| s > scores[y] || (s == scores[y] && c < y))
                    .count();
                hit1 += (rank == 0) as usize;
                hitk += (rank < k) as usize;
                count += 1;
            }
        };
        match split {
            Split::Test => score_block(&data.test),
            Split::Train => data.shards.iter().for_each(&mut score_block),
        }
        let n = count as f64;
        Ok(Evaluation {
            loss: loss / n,
            top1: Some(hit1 as f64 / n),
            topk: Some(hitk as f64 / n),
            k,
        })
    }

    fn quadratic_objective(&self, w: &GradientVector) -> f64 {
        let Model::Quadratic { optimum, .. } = &self.model else { unreachable!() };
        let dist: f64 = w.iter().zip(optimum.iter()).map(|(a, b)| (a - b).powi(2)).sum();
        0.5 * dist + 0.5 * self.lambda * w.iter().map(|v| v * v).sum::<f64>()
    }

    fn quadratic_gradient(&self, w: &GradientVector) -> GradientVector {
        let Model::Quadratic { optimum, .. } = &self.model else { unreachable!() };
        GradientVector::saturating(
            w.iter().zip(optimum.iter()).map(|(a, b)| a - b + self.lambda * a).collect(),
        )
    }

    /// Class scores (logits) of one sample.
    fn scores(&self, w: &[f64], x: &[f64], out: &mut [f64], hidden_buf: &mut Vec<f64>) {
        match &self.model {
            Model::Quadratic { .. } => unreachable!(),
            Model::Logistic { data } => {
                let p = data.features;
                for (c, o) in out.iter_mut().enumerate() {
                    let row = &w[c * (p + 1)..(c + 1) * (p + 1)];
                    *o = dot(&row[..p], x) + row[p];
                }
            }
            Model::Mlp { data, hidden, .. } => {
                let layout = MlpLayout::new(data.features, *hidden, data.classes);
                layout.forward(w, x, hidden_buf, out);
            }
        }
    }

    /// Mean cross-entropy + ½λ‖w‖² on `batch`, and optionally its gradient.
    fn batch_loss_grad(
        &self,
        w: &GradientVector,
        samples: &Samples,
        batch: &[usize],
        want_grad: bool,
    ) -> (f64, Option<GradientVector>) {
        let ws = w.as_slice();
        let classes = match &self.model {
            Model::Quadratic { .. } => unreachable!(),
            Model::Logistic { data } | Model::Mlp { data, .. } => data.classes,
        };
        let mut grad = vec![0.0; ws.len()];
        let mut probs = vec![0.0; classes];
        let mut hidden = Vec::new();
        let mut loss = 0.0;
        for &i in batch {
            let x = samples.row(i);
            let y = samples.y[i];
            self.scores(ws, x, &mut probs, &mut hidden);
            loss += cross_entropy(&probs, y);
            if !want_grad {
                continue;
            }
            softmax_in_place(&mut probs);
            probs[y] -= 1.0;
            match &self.model {
                Model::Logistic { data } => {
                    let p = data.features;
                    for (c, &dz) in probs.iter().enumerate() {
                        let g = &mut grad[c * (p + 1)..(c + 1) * (p + 1)];
                        for (gj, xj) in g[..p].iter_mut().zip(x) {
                            *gj += dz * xj;
                        }
                        g[p] += dz;
                    }
                }
                Model::Mlp { data, hidden: h, .. } => {
                    MlpLayout::new(data.features, *h, data.classes)
                        .backward(ws, x, &hidden, &probs, &mut grad);
                }
                Model::Quadratic { .. } => unreachable!(),
            }
        }
        let n = batch.len() as f64;
        let reg = 0.5 * self.lambda * ws.iter().map(|v| v * v).sum::<f64>();
        let grad = want_grad.then(|| {
            GradientVector::saturating(
                grad.iter().zip(ws).map(|(g, wv)| g / n + self.lambda * wv).collect(),
            )
        });
        (loss / n + reg, grad)
    }
}

fn check_shards(data: &Dataset) -> Result<()> {
    if data.shards.is_empty() {
        return Err(Error::InfeasibleDataset("no worker shards".into()));
    }
    if let Some(w) = data.shards.iter().position(Samples::is_empty) {
        return Err(Error::InfeasibleDataset(format!("worker {w} has an empty shard")));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn cross_entropy(logits: &[f64], y: usize) -> f64 {
    log_sum_exp(logits) - logits[y]
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in z.iter_mut() {
        *v /= total;
    }
}

/// Parameter layout `[W1 (h×p) | b1 (h) | W2 (k×h) | b2 (k)]`.
struct MlpLayout {
    p: usize,
    h: usize,
    k: usize,
}

impl MlpLayout {
    fn new(p: usize, h: usize, k: usize) -> Self {
        Self { p, h, k }
    }

    fn b1(&self) -> usize {
        self.h * self.p
    }

    fn w2(&self) -> usize {
        self.b1() + self.h
    }

    fn b2(&self) -> usize {
        self.w2() + self.k * self.h
    }

    fn forward(&self, w: &[f64], x: &[f64], hidden: &mut Vec<f64>, out: &mut [f64]) {
        hidden.clear();
        for j in 0..self.h {
            let pre = dot(&w[j * self.p..(j + 1) * self.p], x) + w[self.b1() + j];
            hidden.push(pre.tanh());
        }
        for (c, o) in out.iter_mut().enumerate() {
            let row = &w[self.w2() + c * self.h..self.w2() + (c + 1) * self.h];
            *o = dot(row, hidden) + w[self.b2() + c];
        }
    }

    /// Accumulate the gradient of one sample; `dz` is `softmax − onehot`.
    fn backward(&self, w: &[f64], x: &[f64], hidden: &[f64], dz: &[f64], grad: &mut [f64]) {
        for (c, &dzc) in dz.iter().enumerate() {
            let base = self.w2() + c * self.h;
            for (g, a) in grad[base..base + self.h].iter_mut().zip(hidden) {
                *g += dzc * a;
            }
            grad[self.b2() + c] += dzc;
        }
        for j in 0..self.h {
            let da: f64 = (0..self.k).map(|c| w[self.w2() + c * self.h + j] * dz[c]).sum();
            let dpre = da * (1.0 - hidden[j] * hidden[j]);
            for (g, xi) in grad[j * self.p..(j + 1) * self.p].iter_mut().zip(x) {
                *g += dpre * xi;
            }
            grad[self.b1() + j] += dpre;
        }
    }
}

fn mlp_init(seed: u64, p: usize, h: usize, k: usize) -> GradientVector {
    let layout = MlpLayout::new(p, h, k);
    let mut rng = stream_rng(seed, Stream::Init, 0, 0);
    let mut w = vec![0.0; layout.b2() + k];
    let s1 = (1.0 / p as f64).sqrt();
    let s2 = (1.0 / h as f64).sqrt();
    for v in &mut w[..layout.b1()] {
        *v = rng.gen_range(-s1..s1);
    }
    for v in &mut w[layout.w2()..layout.b2()] {
        *v = rng.gen_range(-s2..s2);
    }
    GradientVector::saturating(w)
}
