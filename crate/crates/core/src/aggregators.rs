//! Gradient aggregation rules (GARs).
//!
//! | Rule | Cost |
//! |------|------|
//! | [`aggregate_mean`] | O(n·d) |
//! | [`aggregate_median`] | O(n·d) |
//! | [`aggregate_trimmed_mean`] | O(n·log n·d) |
//! | [`aggregate_krum`] (and Multi-Krum) | O(n²·d) |
//! | [`aggregate_parsgd`] | O(n·d) distance work |
//!
//! ParSGD takes the coordinate-wise median `g`, picks the `f` submitted
//! values (or whole vectors) nearest to it, and returns the mean of those
//! `f` neighbours together with `g` itself.
//!
//! Every rule is a pure function of the unlabeled submitted vectors.
//! Outputs do not depend on the order of the inputs: all selections are
//! made under the total order (distance, value, original index), and all
//! sums over a selection run in that order.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{
    self, cmp_by_distance, common_dim, gather_column, l2_squared_unchecked, GradientVector,
};

/// How ParSGD picks the `f` neighbours of the median.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// Independently in each coordinate, the `f` submitted values closest
    /// to `g_k`.
    #[default]
    PerCoordinate,
    /// The `f` whole submitted vectors with the smallest L1 distance to `g`.
    PerVector,
}

impl SelectionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionMode::PerCoordinate => "per-coordinate",
            SelectionMode::PerVector => "per-vector",
        }
    }
}

/// A named, parameterised aggregation rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AggregationRule {
    Mean,
    Median,
    /// Drop `⌊beta·m⌋` values from each tail per coordinate.
    TrimmedMean { beta: f64 },
    /// `f` is the declared Byzantine count, independent of the inferred one.
    Krum { f: usize },
    MultiKrum { f: usize, m: usize },
    #[serde(rename = "parsgd")]
    ParSgd {
        #[serde(default)]
        selection: SelectionMode,
    },
}

impl AggregationRule {
    pub fn parsgd() -> Self {
        AggregationRule::ParSgd { selection: SelectionMode::PerCoordinate }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AggregationRule::TrimmedMean { beta } if !(0.0..0.5).contains(&beta) => Err(
                Error::InvalidParameter(format!("trim fraction must lie in [0, 0.5), got {beta}")),
            ),
            AggregationRule::MultiKrum { m: 0, .. } => Err(Error::InvalidParameter(
                "Multi-Krum selection count must be ≥ 1".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Short label used in traces and file names.
    pub fn label(&self) -> String {
        match self {
            AggregationRule::Mean => "mean".into(),
            AggregationRule::Median => "median".into(),
            AggregationRule::TrimmedMean { beta } => format!("trimmed-mean-{beta}"),
            AggregationRule::Krum { f } => format!("krum-f{f}"),
            AggregationRule::MultiKrum { f, m } => format!("multi-krum-f{f}-m{m}"),
            AggregationRule::ParSgd { selection: SelectionMode::PerCoordinate } => "parsgd".into(),
            AggregationRule::ParSgd { selection: SelectionMode::PerVector } => {
                "parsgd-per-vector".into()
            }
        }
    }

    /// Aggregate a collected update set. `f` is the server's tolerance
    /// (usually [`compute_f`] of the collected count); only ParSGD uses it.
    pub fn aggregate(&self, vectors: &[GradientVector], f: usize) -> Result<GradientVector> {
        self.aggregate_counted(vectors, f, &mut OpCounter::default())
    }

    pub fn aggregate_counted(
        &self,
        vectors: &[GradientVector],
        f: usize,
        counter: &mut OpCounter,
    ) -> Result<GradientVector> {
        self.validate()?;
        match *self {
            AggregationRule::Mean => aggregate_mean(vectors),
            AggregationRule::Median => aggregate_median(vectors),
            AggregationRule::TrimmedMean { beta } => aggregate_trimmed_mean(vectors, beta),
            AggregationRule::Krum { f: declared } => krum_impl(vectors, declared, 1, counter),
            AggregationRule::MultiKrum { f: declared, m } => krum_impl(vectors, declared, m, counter),
            AggregationRule::ParSgd { selection } => parsgd_impl(vectors, f, selection, counter),
        }
    }
}

/// Distance work performed by a rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    /// Scalar `|x − y|` or `(x − y)²` evaluations.
    pub scalar_distances: u64,
    /// Distances between the median and a submitted vector.
    pub median_distances: u64,
    /// Distances between two submitted vectors.
    pub pairwise_vector_distances: u64,
}

/// Largest `f` with `n_collected > 2f`.
pub fn compute_f(n_collected: usize) -> usize {
    n_collected.saturating_sub(1) / 2
}

pub fn aggregate_mean(vectors: &[GradientVector]) -> Result<GradientVector> {
    stats::coordinate_wise_mean(vectors)
}

pub fn aggregate_median(vectors: &[GradientVector]) -> Result<GradientVector> {
    stats::coordinate_wise_median(vectors)
}

pub fn aggregate_trimmed_mean(vectors: &[GradientVector], beta: f64) -> Result<GradientVector> {
    AggregationRule::TrimmedMean { beta }.validate()?;
    let d = common_dim(vectors)?;
    let m = vectors.len();
    let trim = (beta * m as f64).floor() as usize;
    if m <= 2 * trim {
        return Err(Error::OverTrimmed { trim, m });
    }
    let kept = (m - 2 * trim) as f64;
    let mut column = Vec::with_capacity(m);
    let mut out = Vec::with_capacity(d);
    for k in 0..d {
        gather_column(vectors, k, &mut column);
        column.sort_unstable_by(f64::total_cmp);
        let sum: f64 = column[trim..m - trim].iter().sum();
        out.push(sum / kept);
    }
    Ok(GradientVector::saturating(out))
}

/// Krum (`multi_m = 1`) or Multi-Krum (`multi_m > 1`).
pub fn aggregate_krum(
    vectors: &[GradientVector],
    f_krum: usize,
    multi_m: usize,
) -> Result<GradientVector> {
    if multi_m == 0 {
        return Err(Error::InvalidParameter("Multi-Krum selection count must be ≥ 1".into()));
    }
    krum_impl(vectors, f_krum, multi_m, &mut OpCounter::default())
}

/// Krum score of every vector: the sum of squared distances to its
/// `m − f − 2` nearest other vectors.
pub fn krum_scores(vectors: &[GradientVector], f_krum: usize) -> Result<Vec<f64>> {
    krum_scores_counted(vectors, f_krum, &mut OpCounter::default())
}

fn krum_scores_counted(
    vectors: &[GradientVector],
    f_krum: usize,
    counter: &mut OpCounter,
) -> Result<Vec<f64>> {
    let d = common_dim(vectors)?;
    let m = vectors.len();
    if m < f_krum + 3 {
        return Err(Error::KrumTooFew { n: m, f: f_krum });
    }
    let neighbours = m - f_krum - 2;

    // Upper triangle, row i holds distances to j > i.
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let a = vectors[i].as_slice();
            vectors[i + 1..].iter().map(|b| l2_squared_unchecked(a, b.as_slice())).collect()
        })
        .collect();
    let pairs = (m * (m - 1) / 2) as u64;
    counter.pairwise_vector_distances += pairs;
    counter.scalar_distances += pairs * d as u64;

    let scores = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut dist: Vec<f64> = Vec::with_capacity(m - 1);
            dist.extend((0..i).map(|j| rows[j][i - j - 1]));
            dist.extend_from_slice(&rows[i]);
            if neighbours < dist.len() {
                dist.select_nth_unstable_by(neighbours - 1, f64::total_cmp);
                dist.truncate(neighbours);
            }
            dist.sort_unstable_by(f64::total_cmp);
            dist.iter().sum::<f64>()
        })
        .collect();
    Ok(scores)
}

fn krum_impl(
    vectors: &[GradientVector],
    f_krum: usize,
    multi_m: usize,
    counter: &mut OpCounter,
) -> Result<GradientVector> {
    let scores = krum_scores_counted(vectors, f_krum, counter)?;
    if multi_m > vectors.len() {
        return Err(Error::InvalidParameter(format!(
            "Multi-Krum selection count {multi_m} exceeds {} collected vectors",
            vectors.len()
        )));
    }
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    // Equal scores fall back to the lowest worker index.
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    if multi_m == 1 {
        return Ok(vectors[order[0]].clone());
    }
    let chosen: Vec<GradientVector> = order[..multi_m].iter().map(|&i| vectors[i].clone()).collect();
    stats::coordinate_wise_mean(&chosen)
}

/// The selection `U_{f+1}`: the median `g` plus its `f` nearest neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSelection {
    pub mode: SelectionMode,
    pub median: GradientVector,
    pub f_used: usize,
    /// Source indices of the neighbours, in selection order. Per-vector mode
    /// stores one list; per-coordinate mode stores one list per coordinate.
    neighbours: Vec<Vec<usize>>,
    /// Neighbour values per coordinate, in selection order (excluding `g`).
    values: Vec<Vec<f64>>,
}

impl NeighborSelection {
    /// `|U_{f+1}|`.
    pub fn len(&self) -> usize {
        self.f_used + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.median.dim()
    }

    /// Indices (into the submitted set) of the neighbours used at
    /// coordinate `k`.
    pub fn neighbour_indices(&self, k: usize) -> &[usize] {
        match self.mode {
            SelectionMode::PerVector => &self.neighbours[0],
            SelectionMode::PerCoordinate => &self.neighbours[k],
        }
    }

    /// Whole-vector neighbours; `None` in per-coordinate mode.
    pub fn neighbour_vectors(&self) -> Option<&[usize]> {
        match self.mode {
            SelectionMode::PerVector => Some(&self.neighbours[0]),
            SelectionMode::PerCoordinate => None,
        }
    }

    /// All `f + 1` member values at coordinate `k`, neighbours first and the
    /// median last.
    pub fn members_at(&self, k: usize) -> Vec<f64> {
        let mut out = self.values[k].clone();
        out.push(self.median[k]);
        out
    }

    /// The estimator `Ū`: mean of the `f + 1` members.
    pub fn estimate(&self) -> GradientVector {
        let denom = (self.f_used + 1) as f64;
        GradientVector::saturating(
            (0..self.dim())
                .map(|k| (self.values[k].iter().sum::<f64>() + self.median[k]) / denom)
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist: f64,
    value: f64,
    index: usize,
}

fn cmp_candidates(a: &Candidate, b: &Candidate) -> Ordering {
    cmp_by_distance((a.dist, a.value), (b.dist, b.value)).then(a.index.cmp(&b.index))
}

/// Keep the `f` smallest candidates, sorted.
fn keep_nearest(candidates: &mut Vec<Candidate>, f: usize) {
    if f == 0 {
        candidates.clear();
        return;
    }
    if f < candidates.len() {
        candidates.select_nth_unstable_by(f - 1, cmp_candidates);
        candidates.truncate(f);
    }
    candidates.sort_unstable_by(cmp_candidates);
}

/// Remove one candidate that coincides with the median, so that `g` is
/// counted once. For odd `m` the median is always a submitted value.
fn drop_median_copy(candidates: &mut Vec<Candidate>) {
    if let Some(pos) = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.dist == 0.0)
        .min_by_key(|(_, c)| c.index)
        .map(|(pos, _)| pos)
    {
        candidates.swap_remove(pos);
    }
}

fn check_f(m: usize, f: usize) -> Result<()> {
    if f + 1 > m {
        return Err(Error::FExceedsCollected { f, collected: m });
    }
    Ok(())
}

/// Visit the per-coordinate selection of every coordinate.
fn per_coordinate_selection(
    vectors: &[GradientVector],
    f: usize,
    counter: &mut OpCounter,
    mut visit: impl FnMut(usize, f64, &[Candidate]),
) -> Result<()> {
    let d = common_dim(vectors)?;
    let m = vectors.len();
    check_f(m, f)?;
    let mut column = Vec::with_capacity(m);
    let mut scratch = Vec::with_capacity(m);
    let mut candidates = Vec::with_capacity(m);
    for k in 0..d {
        gather_column(vectors, k, &mut column);
        scratch.clear();
        scratch.extend_from_slice(&column);
        let g = stats::median_in_place(&mut scratch);
        candidates.clear();
        candidates.extend(column.iter().enumerate().map(|(index, &value)| Candidate {
            dist: (value - g).abs(),
            value,
            index,
        }));
        counter.scalar_distances += m as u64;
        drop_median_copy(&mut candidates);
        keep_nearest(&mut candidates, f);
        visit(k, g, &candidates);
    }
    Ok(())
}

fn lexicographic(a: &GradientVector, b: &GradientVector) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Median and the sorted indices of the `f` nearest whole vectors.
fn per_vector_selection(
    vectors: &[GradientVector],
    f: usize,
    counter: &mut OpCounter,
) -> Result<(GradientVector, Vec<usize>)> {
    let d = common_dim(vectors)?;
    check_f(vectors.len(), f)?;
    let g = stats::coordinate_wise_median(vectors)?;
    let mut ranked: Vec<(f64, usize)> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let dist: f64 = v.iter().zip(g.iter()).map(|(x, y)| (x - y).abs()).sum();
            (dist, i)
        })
        .collect();
    counter.median_distances += vectors.len() as u64;
    counter.scalar_distances += (vectors.len() * d) as u64;
    if let Some(pos) = ranked.iter().position(|&(_, i)| vectors[i] == g) {
        ranked.remove(pos);
    }
    let cmp = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.total_cmp(&b.0)
            .then_with(|| lexicographic(&vectors[a.1], &vectors[b.1]))
            .then(a.1.cmp(&b.1))
    };
    if f == 0 {
        ranked.clear();
    } else if f < ranked.len() {
        ranked.select_nth_unstable_by(f - 1, cmp);
        ranked.truncate(f);
    }
    ranked.sort_unstable_by(cmp);
    Ok((g, ranked.into_iter().map(|(_, i)| i).collect()))
}

/// Select `U_{f+1}`: the median plus its `f` nearest neighbours.
pub fn parsgd_select(
    vectors: &[GradientVector],
    f: usize,
    mode: SelectionMode,
) -> Result<NeighborSelection> {
    match mode {
        SelectionMode::PerCoordinate => {
            let d = common_dim(vectors)?;
            let mut median = Vec::with_capacity(d);
            let mut neighbours = Vec::with_capacity(d);
            let mut values = Vec::with_capacity(d);
            per_coordinate_selection(vectors, f, &mut OpCounter::default(), |_, g, chosen| {
                median.push(g);
                neighbours.push(chosen.iter().map(|c| c.index).collect());
                values.push(chosen.iter().map(|c| c.value).collect());
            })?;
            Ok(NeighborSelection {
                mode,
                median: GradientVector::saturating(median),
                f_used: f,
                neighbours,
                values,
            })
        }
        SelectionMode::PerVector => {
            let (median, chosen) = per_vector_selection(vectors, f, &mut OpCounter::default())?;
            let values = (0..median.dim())
                .map(|k| chosen.iter().map(|&i| vectors[i][k]).collect())
                .collect();
            Ok(NeighborSelection { mode, median, f_used: f, neighbours: vec![chosen], values })
        }
    }
}

/// ParSGD estimator `Ū`: the mean of the median and its `f` nearest
/// neighbours.
pub fn aggregate_parsgd(
    vectors: &[GradientVector],
    f: usize,
    mode: SelectionMode,
) -> Result<GradientVector> {
    parsgd_impl(vectors, f, mode, &mut OpCounter::default())
}

pub fn aggregate_parsgd_counted(
    vectors: &[GradientVector],
    f: usize,
    mode: SelectionMode,
    counter: &mut OpCounter,
) -> Result<GradientVector> {
    parsgd_impl(vectors, f, mode, counter)
}

fn parsgd_impl(
    vectors: &[GradientVector],
    f: usize,
    mode: SelectionMode,
    counter: &mut OpCounter,
) -> Result<GradientVector> {
    let denom = (f + 1) as f64;
    match mode {
        SelectionMode::PerCoordinate => {
            let mut out = Vec::with_capacity(common_dim(vectors)?);
            per_coordinate_selection(vectors, f, counter, |_, g, chosen| {
                let sum: f64 = chosen.iter().map(|c| c.value).sum();
                out.push((sum + g) / denom);
            })?;
            Ok(GradientVector::saturating(out))
        }
        SelectionMode::PerVector => {
            let (g, chosen) = per_vector_selection(vectors, f, counter)?;
            Ok(GradientVector::saturating(
                (0..g.dim())
                    .map(|k| {
                        let sum: f64 = chosen.iter().map(|&i| vectors[i][k]).sum();
                        (sum + g[k]) / denom
                    })
                    .collect(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gv(values: &[f64]) -> GradientVector {
        GradientVector::new(values.to_vec()).unwrap()
    }

    fn scalars(values: &[f64]) -> Vec<GradientVector> {
        values.iter().map(|&v| gv(&[v])).collect()
    }

    const BOTH: [SelectionMode; 2] = [SelectionMode::PerCoordinate, SelectionMode::PerVector];

    #[test]
    fn compute_f_examples() {
        assert_eq!(compute_f(50), 24);
        assert_eq!(compute_f(3), 1);
        assert_eq!(compute_f(2), 0);
        assert_eq!(compute_f(1), 0);
        for n in 1..200 {
            let f = compute_f(n);
            assert!(n > 2 * f);
            assert!(n <= 2 * (f + 1));
        }
    }

    #[test]
    fn parsgd_select_five_scalars() {
        let set = scalars(&[0.9, 1.0, 1.1, 10.0, -10.0]);
        for mode in BOTH {
            let sel = parsgd_select(&set, 2, mode).unwrap();
            assert_eq!(sel.len(), 3);
            assert_eq!(sel.median, gv(&[1.0]));
            let mut members = sel.members_at(0);
            members.sort_by(f64::total_cmp);
            assert_eq!(members, vec![0.9, 1.0, 1.1]);
            let mut idx = sel.neighbour_indices(0).to_vec();
            idx.sort();
            assert_eq!(idx, vec![0, 2]);
            assert_eq!(aggregate_parsgd(&set, 2, mode).unwrap(), gv(&[1.0]));
        }
    }

    #[test]
    fn parsgd_f_zero_is_median_only() {
        let set = vec![gv(&[1.0, -3.0]), gv(&[4.0, 2.0]), gv(&[2.0, 8.0]), gv(&[0.5, 0.0])];
        for mode in BOTH {
            let sel = parsgd_select(&set, 0, mode).unwrap();
            assert_eq!(sel.len(), 1);
            assert!(sel.neighbour_indices(0).is_empty());
            assert_eq!(sel.estimate(), stats::coordinate_wise_median(&set).unwrap());
            assert_eq!(
                aggregate_parsgd(&set, 0, mode).unwrap(),
                stats::coordinate_wise_median(&set).unwrap()
            );
        }
    }

    #[test]
    fn parsgd_identical_vectors() {
        let v = gv(&[0.3, -1.7, 5.0]);
        let set = vec![v.clone(); 6];
        for mode in BOTH {
            for f in 0..6 {
                let sel = parsgd_select(&set, f, mode).unwrap();
                for k in 0..3 {
                    assert!(sel.members_at(k).iter().all(|&x| x == v[k]));
                }
                assert_eq!(aggregate_parsgd(&set, f, mode).unwrap(), v);
            }
        }
    }

    #[test]
    fn parsgd_examples() {
        for mode in BOTH {
            assert_eq!(
                aggregate_parsgd(&scalars(&[0.0, 0.0, 0.0, 5.0, 5.0]), 2, mode).unwrap(),
                gv(&[0.0])
            );
            let single = gv(&[2.5, -1.0]);
            assert_eq!(aggregate_parsgd(std::slice::from_ref(&single), 0, mode).unwrap(), single);
        }
    }

    #[test]
    fn parsgd_f_too_large() {
        let set = scalars(&[1.0, 2.0, 3.0]);
        for mode in BOTH {
            assert_eq!(
                parsgd_select(&set, 3, mode).unwrap_err(),
                Error::FExceedsCollected { f: 3, collected: 3 }
            );
            assert!(aggregate_parsgd(&set, 2, mode).is_ok());
        }
        assert_eq!(aggregate_parsgd(&[], 0, SelectionMode::PerCoordinate), Err(Error::EmptySet));
    }

    #[test]
    fn per_vector_members_are_submitted_vectors() {
        let set = vec![
            gv(&[0.0, 10.0]),
            gv(&[1.0, 0.0]),
            gv(&[2.0, 2.0]),
            gv(&[10.0, 1.0]),
            gv(&[3.0, 3.0]),
        ];
        let sel = parsgd_select(&set, 3, SelectionMode::PerVector).unwrap();
        let chosen = sel.neighbour_vectors().unwrap();
        assert_eq!(chosen.len(), 3);
        // g = [2, 2] coincides with vector 2, which is counted once as g.
        assert_eq!(sel.median, gv(&[2.0, 2.0]));
        assert!(!chosen.contains(&2));
        assert_eq!(chosen, &[4, 1, 3]);
        for k in 0..2 {
            let expected: Vec<f64> = chosen.iter().map(|&i| set[i][k]).collect();
            assert_eq!(sel.members_at(k)[..3], expected[..]);
        }
    }

    #[test]
    fn cost_counter_has_no_pairwise_work() {
        let set: Vec<GradientVector> =
            (0..9).map(|i| gv(&[i as f64, (i * i) as f64, -(i as f64)])).collect();
        let mut c = OpCounter::default();
        aggregate_parsgd_counted(&set, 4, SelectionMode::PerCoordinate, &mut c).unwrap();
        assert_eq!(c.pairwise_vector_distances, 0);
        assert_eq!(c.scalar_distances, 9 * 3);
        let mut c = OpCounter::default();
        aggregate_parsgd_counted(&set, 4, SelectionMode::PerVector, &mut c).unwrap();
        assert_eq!(c.pairwise_vector_distances, 0);
        assert_eq!(c.median_distances, 9);
        let mut c = OpCounter::default();
        AggregationRule::Krum { f: 2 }.aggregate_counted(&set, 0, &mut c).unwrap();
        assert_eq!(c.pairwise_vector_distances, 36);
    }

    #[test]
    fn mean_median_examples() {
        let set = scalars(&[1.0, 3.0]);
        assert_eq!(aggregate_mean(&set).unwrap(), gv(&[2.0]));
        assert_eq!(aggregate_median(&set).unwrap(), gv(&[2.0]));
        let set = scalars(&[0.0, 0.0, 9.0]);
        assert_eq!(aggregate_mean(&set).unwrap(), gv(&[3.0]));
        assert_eq!(aggregate_median(&set).unwrap(), gv(&[0.0]));
        let v = gv(&[1.5, 2.5]);
        assert_eq!(aggregate_mean(std::slice::from_ref(&v)).unwrap(), v);
        assert_eq!(aggregate_median(std::slice::from_ref(&v)).unwrap(), v);
    }

    #[test]
    fn trimmed_mean_examples() {
        let set = vec![gv(&[1.0, 7.0]), gv(&[2.0, -1.0]), gv(&[4.0, 0.5])];
        assert_eq!(aggregate_trimmed_mean(&set, 0.0).unwrap(), aggregate_mean(&set).unwrap());
        let set = scalars(&[1.0, 2.0, 3.0, 4.0, 100.0]);
        assert_eq!(aggregate_trimmed_mean(&set, 0.2).unwrap(), gv(&[3.0]));
        let set = scalars(&[1.0, 2.0]);
        assert_eq!(aggregate_trimmed_mean(&set, 0.49).unwrap(), gv(&[1.5]));
    }

    #[test]
    fn trimmed_mean_errors() {
        let set = scalars(&[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(aggregate_trimmed_mean(&set, 0.5), Err(Error::InvalidParameter(_))));
        assert!(matches!(aggregate_trimmed_mean(&set, -0.1), Err(Error::InvalidParameter(_))));
        // ⌊0.499·2⌋ = 0, never over-trims below β = 0.5 with m ≥ 1
        assert!(aggregate_trimmed_mean(&scalars(&[1.0, 2.0]), 0.499).is_ok());
        assert_eq!(aggregate_trimmed_mean(&[], 0.1), Err(Error::EmptySet));
    }

    #[test]
    fn krum_examples() {
        let set = scalars(&[0.0, 0.1, 0.2, 10.0]);
        let scores = krum_scores(&set, 1).unwrap();
        assert_eq!(scores[0], scores[1]);
        assert_eq!(scores[1], scores[2]);
        assert!((scores[0] - 0.01).abs() < 1e-12);
        assert!((scores[3] - 96.04).abs() < 1e-9);
        assert_eq!(aggregate_krum(&set, 1, 1).unwrap(), gv(&[0.0]));

        let v = gv(&[1.0, -2.0]);
        assert_eq!(aggregate_krum(&vec![v.clone(); 5], 1, 1).unwrap(), v);
        assert_eq!(aggregate_krum(&vec![v.clone(); 5], 1, 3).unwrap(), v);

        assert_eq!(
            aggregate_krum(&scalars(&[1.0, 2.0, 3.0]), 1, 1),
            Err(Error::KrumTooFew { n: 3, f: 1 })
        );
    }

    #[test]
    fn multi_krum_averages_best_scores() {
        let set = scalars(&[0.0, 0.1, 0.2, 10.0, 11.0]);
        // m − f − 2 = 2 neighbours: scores 0.05, 0.02, 0.05, …
        let out = aggregate_krum(&set, 1, 3).unwrap();
        assert!((out[0] - 0.1).abs() < 1e-12);
        assert!(aggregate_krum(&set, 1, 6).is_err());
        assert!(aggregate_krum(&set, 1, 0).is_err());
    }

    #[test]
    fn rule_validation_and_labels() {
        assert!(AggregationRule::TrimmedMean { beta: 0.5 }.validate().is_err());
        assert!(AggregationRule::MultiKrum { f: 1, m: 0 }.validate().is_err());
        assert!(AggregationRule::parsgd().validate().is_ok());
        assert_eq!(AggregationRule::parsgd().label(), "parsgd");
        assert_eq!(AggregationRule::Krum { f: 20 }.label(), "krum-f20");
        let set = scalars(&[0.9, 1.0, 1.1, 10.0, -10.0]);
        assert_eq!(AggregationRule::parsgd().aggregate(&set, 2).unwrap(), gv(&[1.0]));
        assert_eq!(AggregationRule::Median.aggregate(&set, 2).unwrap(), gv(&[1.0]));
    }
}
