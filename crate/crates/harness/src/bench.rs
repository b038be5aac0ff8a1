//! Aggregation-cost benchmark: ParSGD against Krum as `n` grows.

use std::time::Instant;

use parsgd::aggregators::{compute_f, AggregationRule, OpCounter};
use parsgd::rng::{stream_rng, Stream};
use parsgd::stats::GradientVector;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub parsgd_us: u64,
    pub krum_us: u64,
    pub parsgd_pairwise: u64,
    pub krum_pairwise: u64,
}

fn random_set(n: usize, d: usize, seed: u64) -> Vec<GradientVector> {
    (0..n)
        .map(|i| {
            let mut rng = stream_rng(seed, Stream::Oracle, i as u64, d as u64);
            GradientVector::saturating((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        })
        .collect()
}

/// Fastest of `reps` timed runs, with the op counts of the last one.
fn time_rule(rule: &AggregationRule, set: &[GradientVector], f: usize, reps: usize) -> anyhow::Result<(u64, OpCounter)> {
    let mut best = u64::MAX;
    let mut ops = OpCounter::default();
    for _ in 0..reps.max(1) {
        ops = OpCounter::default();
        let start = Instant::now();
        let out = rule.aggregate_counted(set, f, &mut ops)?;
        best = best.min(start.elapsed().as_micros() as u64);
        std::hint::black_box(out);
    }
    Ok((best, ops))
}

/// ParSGD uses `f = compute_f(n)`; Krum assumes one fewer Byzantine worker
/// so that `n ≥ f + 3` holds for every `n ≥ 3`.
pub fn bench_aggregators(ns: &[usize], d: usize, reps: usize, seed: u64) -> anyhow::Result<Vec<BenchRow>> {
    ns.iter()
        .map(|&n| {
            let set = random_set(n, d, seed);
            let f = compute_f(n);
            let (parsgd_us, p_ops) = time_rule(&AggregationRule::parsgd(), &set, f, reps)?;
            let krum = AggregationRule::Krum { f: f.saturating_sub(1) };
            let (krum_us, k_ops) = time_rule(&krum, &set, f, reps)?;
            Ok(BenchRow {
                n,
                d,
                parsgd_us,
                krum_us,
                parsgd_pairwise: p_ops.pairwise_vector_distances,
                krum_pairwise: k_ops.pairwise_vector_distances,
            })
        })
        .collect()
}
