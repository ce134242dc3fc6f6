use std::collections::BTreeMap;

use super::provider::MomentProvider;
use crate::contract::{gamma_operator, star};
use crate::error::{Error, Result};
use crate::kernels::{embed, SymmetricKernel, WeightVector};
use crate::numeric::{compensated_sum, factorial, KahanSum};

/// `E[Q²] = q! Σ_{ordered} f² = (q!)² Σ_{increasing} f²` for any centered
/// unit-variance coordinates.
pub fn variance_exact(f: &SymmetricKernel) -> f64 {
    let qf = factorial(f.order());
    qf * qf * compensated_sum(f.iter().map(|(_, v)| v * v))
}

/// `E[Q_p Q_q] = q! ⟨embed f1, embed f2⟩` when the orders agree, zero otherwise.
pub fn cross_covariance(f1: &SymmetricKernel, f2: &SymmetricKernel) -> Result<f64> {
    if f1.size() != f2.size() {
        return Err(Error::SizeMismatch {
            left: f1.size(),
            right: f2.size(),
        });
    }
    if f1.order() != f2.order() {
        return Ok(0.0);
    }
    let qf = factorial(f1.order());
    let (small, large) = if f1.support_len() <= f2.support_len() {
        (f1, f2)
    } else {
        (f2, f1)
    };
    let dot = compensated_sum(small.iter().map(|(t, a)| a * large.get(t)));
    Ok(qf * qf * dot)
}

/// The terms `k! ‖Gₖ^{q,q}(g, g)‖²`, `k = 0..=2q`, of `E[I_q(g)⁴]`.
///
/// The two end terms use their closed forms: `(q!)² ‖g‖⁴` for `k = 0`, and
/// for `k = 2q`
/// `2 (q!)² ‖g‖⁴ + Σ_{p=1}^{q−1} (q!)⁴ / (p!(q−p)!)² ‖g ⋆ₚᵖ g‖²`.
pub fn chaos_fourth_moment_terms(f: &SymmetricKernel, w: &WeightVector) -> Result<Vec<f64>> {
    w.check_covers(f.size())?;
    let q = f.order();
    let g = embed(f);
    let qf = factorial(q);
    let norm4 = g.l2_norm_sq().powi(2);
    let mut terms = vec![0.0; 2 * q + 1];
    terms[0] = qf * qf * norm4;
    for (k, term) in terms.iter_mut().enumerate().take(2 * q).skip(1) {
        *term = factorial(k) * gamma_operator(&g, &g, k, w)?.l2_norm_sq();
    }
    let mut top = KahanSum::default();
    top.add(2.0 * qf * qf * norm4);
    for p in 1..q {
        let weight = qf.powi(4) / (factorial(p) * factorial(q - p)).powi(2);
        top.add(weight * star(&g, &g, p, p, w)?.l2_norm_sq());
    }
    terms[2 * q] = top.value();
    Ok(terms)
}

/// `E[Q⁴]` for Poisson coordinates via `Σ_{k=0}^{2q} k! ‖Gₖ^{q,q}(g, g)‖²`.
pub fn fourth_moment_structured(f: &SymmetricKernel, w: &WeightVector) -> Result<f64> {
    Ok(compensated_sum(chaos_fourth_moment_terms(f, w)?))
}

/// `E[(I_p(g1) I_q(g2))²] = Σ_{k=|q−p|}^{p+q} k! ‖Gₖ^{p,q}(g1, g2)‖²`.
///
/// Returns the per-`k` terms (indexed from `|q − p|`) and their sum.
pub fn product_second_moment_structured(
    f1: &SymmetricKernel,
    f2: &SymmetricKernel,
    w: &WeightVector,
) -> Result<(Vec<(usize, f64)>, f64)> {
    if f1.size() != f2.size() {
        return Err(Error::SizeMismatch {
            left: f1.size(),
            right: f2.size(),
        });
    }
    w.check_covers(f1.size())?;
    let (g1, g2) = (embed(f1), embed(f2));
    let (p, q) = (f1.order(), f2.order());
    let mut terms = Vec::new();
    for k in p.abs_diff(q)..=p + q {
        let gk = gamma_operator(&g1, &g2, k, w)?;
        terms.push((k, factorial(k) * gk.l2_norm_sq()));
    }
    let total = compensated_sum(terms.iter().map(|&(_, v)| v));
    Ok((terms, total))
}

/// A monomial of `Q²` in the orthogonal variables `X_i` and `Y_i = X_i² − 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Monomial {
    xs: Vec<u32>,
    ys: Vec<u32>,
}

/// `E[Q⁴]` for any provider by expanding `Q²` in the variables
/// `{X_i, Y_i = X_i² − 1}`.
///
/// A product `X^s X^t` of two support monomials equals
/// `∏_{i∈s∩t} (1 + Y_i) ∏_{i∈sΔt} X_i`. Monomials over different index sets
/// are orthogonal because `E[X_i] = E[Y_i] = 0`, and within one index set the
/// pairing uses `E[X²] = 1`, `E[XY] = m₃`, `E[Y²] = m₄ − 1` per index.
pub fn fourth_moment_expanded(f: &SymmetricKernel, provider: &MomentProvider) -> Result<f64> {
    provider.check_covers(f.size())?;
    let qf = factorial(f.order());
    let support: Vec<(&[u32], f64)> = f.iter().map(|(t, c)| (t, qf * c)).collect();
    if support.is_empty() {
        return Ok(0.0);
    }

    let mut square: BTreeMap<Monomial, f64> = BTreeMap::new();
    let mut shared = Vec::new();
    let mut sym = Vec::new();
    for &(s, a) in &support {
        for &(t, b) in &support {
            shared.clear();
            sym.clear();
            merge_split(s, t, &mut shared, &mut sym);
            let coef = a * b;
            for mask in 0u32..(1 << shared.len()) {
                let ys: Vec<u32> = shared
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| mask >> j & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                *square
                    .entry(Monomial {
                        xs: sym.clone(),
                        ys,
                    })
                    .or_insert(0.0) += coef;
            }
        }
    }

    let mut groups: BTreeMap<Vec<u32>, Vec<(Monomial, f64)>> = BTreeMap::new();
    for (m, c) in square {
        let mut set: Vec<u32> = m.xs.iter().chain(&m.ys).copied().collect();
        set.sort_unstable();
        groups.entry(set).or_default().push((m, c));
    }

    let mut total = KahanSum::default();
    for (set, members) in &groups {
        let mut pair_moments = Vec::with_capacity(set.len());
        for &i in set {
            let m3 = provider.moment(i, 3)?;
            let m4 = provider.moment(i, 4)?;
            pair_moments.push((m3, m4 - 1.0));
        }
        for (u, cu) in members {
            for (v, cv) in members {
                let mut e = 1.0;
                for (pos, &i) in set.iter().enumerate() {
                    let (m3, yy) = pair_moments[pos];
                    let uy = u.ys.binary_search(&i).is_ok();
                    let vy = v.ys.binary_search(&i).is_ok();
                    e *= match (uy, vy) {
                        (false, false) => 1.0,
                        (true, true) => yy,
                        _ => m3,
                    };
                }
                total.add(cu * cv * e);
            }
        }
    }
    Ok(total.value())
}

/// Splits two increasing tuples into their intersection and symmetric difference.
fn merge_split(s: &[u32], t: &[u32], shared: &mut Vec<u32>, sym: &mut Vec<u32>) {
    let (mut i, mut j) = (0, 0);
    while i < s.len() && j < t.len() {
        match s[i].cmp(&t[j]) {
            std::cmp::Ordering::Equal => {
                shared.push(s[i]);
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => {
                sym.push(s[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                sym.push(t[j]);
                j += 1;
            }
        }
    }
    sym.extend_from_slice(&s[i..]);
    sym.extend_from_slice(&t[j..]);
}
