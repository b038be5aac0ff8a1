//! Slow reference implementations: full sorts, no selection tricks.

#![allow(dead_code)]

use std::cmp::Ordering;

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * v[m / 2 - 1] + 0.5 * v[m / 2]
    }
}

pub fn column(vectors: &[Vec<f64>], k: usize) -> Vec<f64> {
    vectors.iter().map(|v| v[k]).collect()
}

pub fn coordinate_median(vectors: &[Vec<f64>]) -> Vec<f64> {
    (0..vectors[0].len()).map(|k| median(&column(vectors, k))).collect()
}

pub fn trimmed_mean(vectors: &[Vec<f64>], beta: f64) -> Vec<f64> {
    let m = vectors.len();
    let t = (beta * m as f64).floor() as usize;
    (0..vectors[0].len())
        .map(|k| {
            let mut c = column(vectors, k);
            c.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut sum = 0.0;
            for x in &c[t..m - t] {
                sum += x;
            }
            sum / (m - 2 * t) as f64
        })
        .collect()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s += (a[k] - b[k]) * (a[k] - b[k]);
    }
    s
}

/// Index chosen by Krum.
pub fn krum(vectors: &[Vec<f64>], f: usize) -> usize {
    let m = vectors.len();
    let mut best = (f64::INFINITY, usize::MAX);
    for i in 0..m {
        let mut d: Vec<f64> = (0..m).filter(|&j| j != i).map(|j| sq_dist(&vectors[i], &vectors[j])).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut score = 0.0;
        for x in &d[..m - f - 2] {
            score += x;
        }
        if score < best.0 {
            best = (score, i);
        }
    }
    best.1
}

fn key_cmp(a: (f64, f64, usize), b: (f64, f64, usize)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap()
        .then(a.1.partial_cmp(&b.1).unwrap())
        .then(a.2.cmp(&b.2))
}

/// Per coordinate: the indices of the `f` values nearest the median, with
/// one copy of the median itself left out.
pub fn parsgd_per_coordinate(vectors: &[Vec<f64>], f: usize) -> (Vec<f64>, Vec<Vec<usize>>) {
    let g = coordinate_median(vectors);
    let chosen = (0..g.len())
        .map(|k| {
            let mut keys: Vec<(f64, f64, usize)> =
                vectors.iter().enumerate().map(|(i, v)| ((v[k] - g[k]).abs(), v[k], i)).collect();
            keys.sort_by(|a, b| key_cmp(*a, *b));
            if keys[0].0 == 0.0 {
                keys.remove(0);
            }
            keys.into_iter().take(f).map(|k| k.2).collect()
        })
        .collect();
    (g, chosen)
}

pub fn parsgd_per_vector(vectors: &[Vec<f64>], f: usize) -> (Vec<f64>, Vec<usize>) {
    let g = coordinate_median(vectors);
    let mut ids: Vec<usize> = (0..vectors.len()).collect();
    let l1 = |i: usize| -> f64 {
        let mut s = 0.0;
        for k in 0..g.len() {
            s += (vectors[i][k] - g[k]).abs();
        }
        s
    };
    ids.sort_by(|&a, &b| {
        l1(a).partial_cmp(&l1(b))
            .unwrap()
            .then_with(|| vectors[a].partial_cmp(&vectors[b]).unwrap())
            .then(a.cmp(&b))
    });
    if let Some(pos) = ids.iter().position(|&i| vectors[i] == g) {
        ids.remove(pos);
    }
    ids.truncate(f);
    (g, ids)
}

/// `(Σ neighbours + g) / (f + 1)`, summing neighbours in selection order.
pub fn parsgd_estimate(vectors: &[Vec<f64>], f: usize) -> Vec<f64> {
    let (g, chosen) = parsgd_per_coordinate(vectors, f);
    (0..g.len())
        .map(|k| {
            let mut s = 0.0;
            for &i in &chosen[k] {
                s += vectors[i][k];
            }
            (s + g[k]) / (f + 1) as f64
        })
        .collect()
}
