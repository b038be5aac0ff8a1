//! Dense gradient vectors and the robust statistics the aggregation rules
//! are built from.
//!
//! All reductions run in `f64` and accumulate in index order, so results
//! are bitwise reproducible for a given input ordering.

use std::cmp::Ordering;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense, finite, non-empty real vector.
///
/// This is the unit of worker → server communication: local gradients,
/// their coordinate-wise median, aggregated updates and model parameters
/// are all `GradientVector`s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GradientVector(Vec<f64>);

impl GradientVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self(values))
    }

    /// Build a vector from values that may have overflowed, clamping
    /// infinities to `±f64::MAX` and NaN to zero. Used where corruption must
    /// not fail but the result must stay finite.
    pub fn saturating(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "gradient vector must have at least one coordinate");
        Self(
            values
                .into_iter()
                .map(|v| {
                    if v.is_nan() {
                        0.0
                    } else {
                        v.clamp(f64::MIN, f64::MAX)
                    }
                })
                .collect(),
        )
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "gradient vector must have at least one coordinate");
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// `self + alpha * other`, saturating.
    pub fn add_scaled(&self, alpha: f64, other: &GradientVector) -> Result<GradientVector> {
        ensure_same_dim(self, other)?;
        Ok(Self::saturating(
            self.0.iter().zip(&other.0).map(|(a, b)| a + alpha * b).collect(),
        ))
    }

    pub fn scaled(&self, alpha: f64) -> GradientVector {
        Self::saturating(self.0.iter().map(|v| alpha * v).collect())
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Index<usize> for GradientVector {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl TryFrom<Vec<f64>> for GradientVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<GradientVector> for Vec<f64> {
    fn from(v: GradientVector) -> Self {
        v.0
    }
}

fn ensure_same_dim(a: &GradientVector, b: &GradientVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// Check that `vectors` is non-empty and of uniform dimension; returns `d`.
pub fn common_dim(vectors: &[GradientVector]) -> Result<usize> {
    let first = vectors.first().ok_or(Error::EmptySet)?;
    let d = first.dim();
    for v in &vectors[1..] {
        if v.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
        }
    }
    Ok(d)
}

/// Midpoint of two finite values without overflow.
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    0.5 * a + 0.5 * b
}

/// One-dimensional median; reorders `values`.
///
/// Even counts return the midpoint of the two middle order statistics.
/// Runs in expected linear time.
pub fn median_in_place(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let m = values.len();
    let mid = m / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if m % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().max_by(f64::total_cmp).expect("m ≥ 2");
        midpoint(lower_max, upper)
    }
}

pub(crate) fn gather_column(vectors: &[GradientVector], k: usize, out: &mut Vec<f64>) {
    out.clear();
    out.extend(vectors.iter().map(|v| v.0[k]));
}

/// Coordinate-wise median: coordinate `k` of the result is the
/// one-dimensional median of the `k`-th coordinates of the inputs.
pub fn coordinate_wise_median(vectors: &[GradientVector]) -> Result<GradientVector> {
    let d = common_dim(vectors)?;
    let mut column = Vec::with_capacity(vectors.len());
    let mut out = Vec::with_capacity(d);
    for k in 0..d {
        gather_column(vectors, k, &mut column);
        out.push(median_in_place(&mut column));
    }
    Ok(GradientVector(out))
}

pub fn coordinate_wise_mean(vectors: &[GradientVector]) -> Result<GradientVector> {
    let d = common_dim(vectors)?;
    let mut sum = vec![0.0; d];
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(&v.0) {
            *s += x;
        }
    }
    let m = vectors.len() as f64;
    Ok(GradientVector::saturating(sum.into_iter().map(|s| s / m).collect()))
}

/// Unbiased (divide by `m − 1`) sample variance of every coordinate.
pub fn coordinate_variance(vectors: &[GradientVector]) -> Result<Vec<f64>> {
    if vectors.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: vectors.len() });
    }
    let mean = coordinate_wise_mean(vectors)?;
    let mut acc = vec![0.0; mean.dim()];
    for v in vectors {
        for ((a, x), mu) in acc.iter_mut().zip(&v.0).zip(&mean.0) {
            let dev = x - mu;
            *a += dev * dev;
        }
    }
    let denom = (vectors.len() - 1) as f64;
    Ok(acc.into_iter().map(|a| a / denom).collect())
}

/// Sample skewness `m3 / m2^{3/2}` with population central moments.
pub fn absolute_skewness(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for x in samples {
        let dev = x - mean;
        m2 += dev * dev;
        m3 += dev * dev * dev;
    }
    m2 /= n;
    m3 /= n;
    if m2 <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(m3 / m2.powf(1.5))
}

pub fn l1_distance(a: &GradientVector, b: &GradientVector) -> Result<f64> {
    ensure_same_dim(a, b)?;
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).sum())
}

pub fn l2_squared(a: &GradientVector, b: &GradientVector) -> Result<f64> {
    ensure_same_dim(a, b)?;
    Ok(l2_squared_unchecked(&a.0, &b.0))
}

pub(crate) fn l2_squared_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Per-coordinate mean, variance and median of a sample of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateStats {
    pub mean: GradientVector,
    pub variance: Vec<f64>,
    pub median: GradientVector,
}

impl CoordinateStats {
    pub fn from_vectors(vectors: &[GradientVector]) -> Result<Self> {
        Ok(Self {
            variance: coordinate_variance(vectors)?,
            mean: coordinate_wise_mean(vectors)?,
            median: coordinate_wise_median(vectors)?,
        })
    }
}

/// Total order on `(distance, value)` pairs used for every nearest-value
/// selection: closer first, then smaller value.
pub(crate) fn cmp_by_distance(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.total_cmp(&b.1))
}
