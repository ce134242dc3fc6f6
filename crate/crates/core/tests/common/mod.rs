#![allow(dead_code)]

use std::collections::BTreeMap;

use chaos_core::{SymmetricKernel, WeightVector};
use proptest::prelude::*;
use proptest::sample::subsequence;
use rand::seq::index::sample;
use rand::Rng;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Random sparse kernel with values in [−1, 1] and λ in `[lo, hi]`.
pub fn random_kernel<R: Rng>(
    rng: &mut R,
    q: usize,
    size: usize,
    max_support: usize,
    (lo, hi): (f64, f64),
) -> (SymmetricKernel, WeightVector) {
    let support = rng.random_range(1..=max_support.min(binomial(size, q)));
    let mut entries = BTreeMap::new();
    while entries.len() < support {
        let mut t: Vec<u32> = sample(rng, size, q)
            .into_iter()
            .map(|i| i as u32 + 1)
            .collect();
        t.sort_unstable();
        entries.insert(t, rng.random_range(-1.0..1.0));
    }
    let f = SymmetricKernel::build(q, size, entries).unwrap();
    let w = WeightVector::new((0..size).map(|_| rng.random_range(lo..=hi)).collect()).unwrap();
    (f, w)
}

/// Proptest strategy for `(f, λ)` with `q ∈ orders`, `q ≤ N ≤ max_size`.
pub fn kernel_strategy(
    orders: std::ops::RangeInclusive<usize>,
    max_size: usize,
    max_support: usize,
) -> impl Strategy<Value = (SymmetricKernel, WeightVector)> {
    orders
        .prop_flat_map(move |q| (Just(q), q..=max_size))
        .prop_flat_map(move |(q, n)| {
            let idx: Vec<u32> = (1..=n as u32).collect();
            (
                Just(q),
                Just(n),
                prop::collection::vec((subsequence(idx, q), -1.0f64..1.0), 1..=max_support),
                prop::collection::vec(0.5f64..4.0, n),
            )
        })
        .prop_map(|(q, n, raw, lambda)| {
            let entries: BTreeMap<Vec<u32>, f64> = raw.into_iter().collect();
            (
                SymmetricKernel::build(q, n, entries).unwrap(),
                WeightVector::new(lambda).unwrap(),
            )
        })
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
