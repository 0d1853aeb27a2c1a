//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use supergraph::config::SizeConfiguration;

/// Exact mean and variance of the isolated count by summing over all
/// `2^(N(N-1)/2)` super-graphs, with pair probabilities `1 - (1-p)^(ij)`
/// computed by repeated multiplication.
pub fn enumerate_isolated_moments(sizes: &[u64], p: f64) -> (f64, f64) {
    let n = sizes.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let prob: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| {
            let mut q = 1.0;
            for _ in 0..sizes[a] * sizes[b] {
                q *= 1.0 - p;
            }
            1.0 - q
        })
        .collect();
    let (mut m1, mut m2) = (0.0, 0.0);
    for mask in 0u32..(1 << pairs.len()) {
        let mut weight = 1.0;
        let mut touched = vec![false; n];
        for (e, &(a, b)) in pairs.iter().enumerate() {
            if mask >> e & 1 == 1 {
                weight *= prob[e];
                touched[a] = true;
                touched[b] = true;
            } else {
                weight *= 1.0 - prob[e];
            }
        }
        let x = touched.iter().filter(|t| !**t).count() as f64;
        m1 += weight * x;
        m2 += weight * x * x;
    }
    (m1, m2 - m1 * m1)
}

/// All multisets of sizes from `1..=max_size` with at most `max_n` elements.
pub fn small_configurations(max_n: usize, max_size: u64) -> Vec<Vec<u64>> {
    fn extend(prefix: &mut Vec<u64>, min: u64, max: u64, left: usize, out: &mut Vec<Vec<u64>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        if left == 0 {
            return;
        }
        for s in min..=max {
            prefix.push(s);
            extend(prefix, s, max, left - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 1, max_size, max_n, &mut out);
    out
}

pub fn config_of(sizes: &[u64]) -> SizeConfiguration {
    let mut counts = BTreeMap::new();
    for &s in sizes {
        *counts.entry(s).or_insert(0) += 1;
    }
    SizeConfiguration::new(counts).unwrap()
}

/// Root of `r = 1 - exp(-c r)` on `(0, 1]` by bisection.
pub fn er_survival_bisection(c: f64) -> f64 {
    let g = |r: f64| r - 1.0 + (-c * r).exp();
    let (mut lo, mut hi) = (1e-9, 1.0);
    assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
