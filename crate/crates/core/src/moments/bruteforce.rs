use rayon::prelude::*;

use super::provider::MomentProvider;
use crate::error::{Error, Result};
use crate::kernels::SymmetricKernel;
use crate::numeric::{compensated_sum, factorial, KahanSum};

/// Default cap on the number of expanded tuple products.
pub const DEFAULT_BUDGET: f64 = 1e7;

/// Number of terms the expansion of `∏ Q_j` visits.
pub fn bruteforce_terms(factors: &[&SymmetricKernel]) -> f64 {
    factors.iter().map(|f| f.support_len() as f64).product()
}

/// `E[Q^m]` by expanding the `m`-fold product over support tuples.
pub fn moment_bruteforce(f: &SymmetricKernel, provider: &MomentProvider, m: usize) -> Result<f64> {
    if m > 4 {
        return Err(Error::OrderTooLarge { order: m, max: 4 });
    }
    let factors = vec![f; m];
    product_moment_bruteforce(&factors, provider, DEFAULT_BUDGET)
}

/// `E[Q_1 Q_2 ⋯ Q_m]` for homogeneous sums over one independent sequence.
///
/// Each `Q_j = q_j! Σ_{increasing t} f_j(t) ∏_{i∈t} X_i`. For a choice of one
/// tuple per factor the expectation factorizes over distinct indices as
/// `∏_i E[X_i^{count_i}]`. The first factor is split across workers; partial
/// sums are merged in support order.
pub fn product_moment_bruteforce(
    factors: &[&SymmetricKernel],
    provider: &MomentProvider,
    budget: f64,
) -> Result<f64> {
    if factors.is_empty() {
        return Ok(1.0);
    }
    let needed = bruteforce_terms(factors);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let size = factors.iter().map(|f| f.size()).max().unwrap_or(0);
    provider.check_covers(size)?;
    let depth = factors.len();
    if depth > crate::moments::MAX_MOMENT_ORDER {
        return Err(Error::OrderTooLarge {
            order: depth,
            max: crate::moments::MAX_MOMENT_ORDER,
        });
    }

    let terms: Vec<Vec<(&[u32], f64)>> = factors
        .iter()
        .map(|f| {
            let scale = factorial(f.order());
            f.iter().map(|(t, c)| (t, scale * c)).collect()
        })
        .collect();
    if terms.iter().any(|t| t.is_empty()) {
        return Ok(0.0);
    }

    // moments[i * (depth + 1) + c] = E[X_i^c]
    let stride = depth + 1;
    let mut moments = vec![0.0; (size + 1) * stride];
    let mut touched: Vec<u32> = factors.iter().flat_map(|f| f.support_indices()).collect();
    touched.sort_unstable();
    touched.dedup();
    for &i in &touched {
        for c in 0..=depth {
            moments[i as usize * stride + c] = provider.moment(i, c)?;
        }
    }

    let ctx = Expansion {
        terms: &terms,
        moments: &moments,
        stride,
    };
    let partials: Vec<f64> = terms[0]
        .par_iter()
        .map(|&(t, c)| {
            let mut state = State {
                counts: vec![0u8; size + 1],
                live: Vec::new(),
                acc: KahanSum::default(),
            };
            state.push(t);
            ctx.descend(1, c, &mut state);
            state.acc.value()
        })
        .collect();
    Ok(compensated_sum(partials))
}

struct Expansion<'a> {
    terms: &'a [Vec<(&'a [u32], f64)>],
    moments: &'a [f64],
    stride: usize,
}

struct State {
    counts: Vec<u8>,
    live: Vec<u32>,
    acc: KahanSum,
}

impl State {
    fn push(&mut self, t: &[u32]) {
        for &i in t {
            if self.counts[i as usize] == 0 {
                self.live.push(i);
            }
            self.counts[i as usize] += 1;
        }
    }

    fn pop(&mut self, t: &[u32]) {
        for &i in t {
            self.counts[i as usize] -= 1;
            if self.counts[i as usize] == 0 {
                let pos = self.live.iter().rposition(|&j| j == i).expect("live index");
                self.live.swap_remove(pos);
            }
        }
    }
}

impl Expansion<'_> {
    fn descend(&self, level: usize, coef: f64, state: &mut State) {
        if level == self.terms.len() {
            let expectation: f64 = state
                .live
                .iter()
                .map(|&i| {
                    self.moments[i as usize * self.stride + state.counts[i as usize] as usize]
                })
                .product();
            state.acc.add(coef * expectation);
            return;
        }
        for &(t, c) in &self.terms[level] {
            state.push(t);
            self.descend(level + 1, coef * c, state);
            state.pop(t);
        }
    }
}
