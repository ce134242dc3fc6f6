//! Star contractions, the product-formula operator and contraction-norm tables.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{embed, GeneralKernel, SymmetricKernel, WeightVector, MAX_GENERAL_ORDER};
use crate::numeric::{binomial, compensated_sum, factorial};

/// `h1 ⋆ᵣˡ h2`: identify the first `r` coordinates of both kernels and
/// integrate out the first `l` of those.
///
/// The output tuple is laid out as `(γ, t, s)`: the `r − l` identified but
/// not integrated coordinates, then the free coordinates of `h1`, then those
/// of `h2`. An integrated coordinate contributes `⟨g_a, g_b⟩ = δ_ab`; an
/// identified one contributes `g_a g_b = δ_ab λ_a^{-1/2} g_a`.
///
/// The support of `h2` is bucketed by its first `r` coordinates and every
/// tuple of `h1` is joined against its bucket, so the cost is the number of
/// matching pairs rather than `N^{p+q}`.
pub fn star(
    h1: &GeneralKernel,
    h2: &GeneralKernel,
    r: usize,
    l: usize,
    w: &WeightVector,
) -> Result<GeneralKernel> {
    let (p, q) = (h1.order(), h2.order());
    if l > r || r > p.min(q) {
        return Err(Error::InvalidContractionIndices { r, l, p, q });
    }
    if h1.size() != h2.size() {
        return Err(Error::SizeMismatch {
            left: h1.size(),
            right: h2.size(),
        });
    }
    w.check_covers(h1.size())?;
    let order = p + q - r - l;
    if order > MAX_GENERAL_ORDER {
        return Err(Error::OrderOutOfRange {
            order,
            min: 0,
            max: MAX_GENERAL_ORDER,
        });
    }

    let mut buckets: HashMap<&[u32], Vec<(&[u32], f64)>> = HashMap::new();
    for (t, c) in h2.iter() {
        buckets.entry(&t[..r]).or_default().push((&t[r..], c));
    }

    let mut out: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut key = Vec::with_capacity(order);
    for (t1, c1) in h1.iter() {
        let Some(bucket) = buckets.get(&t1[..r]) else {
            continue;
        };
        let identified = &t1[l..r];
        let factor: f64 = identified
            .iter()
            .map(|&a| w.get(a).sqrt().recip())
            .product();
        let head = c1 * factor;
        for (rest2, c2) in bucket {
            key.clear();
            key.extend_from_slice(identified);
            key.extend_from_slice(&t1[r..]);
            key.extend_from_slice(rest2);
            *out.entry(key.clone()).or_insert(0.0) += head * c2;
        }
    }
    Ok(GeneralKernel::from_derived(order, h1.size(), out))
}

/// `Gₖ^{p,q}(h1, h2)`: the order-`k` chaos coefficient of `I_p(h1) I_q(h2)`,
///
/// `Σ_{r,l : p+q−r−l = k} r! C(p,r) C(q,r) C(r,l) · sym(h1 ⋆ᵣˡ h2)`.
pub fn gamma_operator(
    h1: &GeneralKernel,
    h2: &GeneralKernel,
    k: usize,
    w: &WeightVector,
) -> Result<GeneralKernel> {
    let (p, q) = (h1.order(), h2.order());
    let (min, max) = (p.abs_diff(q), p + q);
    if k < min || k > max {
        return Err(Error::InvalidOrder { k, min, max });
    }
    if h1.size() != h2.size() {
        return Err(Error::SizeMismatch {
            left: h1.size(),
            right: h2.size(),
        });
    }
    let mut acc = GeneralKernel::empty(k, h1.size());
    for r in 0..=p.min(q) {
        for l in 0..=r {
            if p + q - r - l != k {
                continue;
            }
            let coef = factorial(r) * binomial(p, r) * binomial(q, r) * binomial(r, l);
            let term = star(h1, h2, r, l, w)?.symmetrize();
            acc = acc.add_scaled(&term, coef)?;
        }
    }
    Ok(acc)
}

/// Contraction norms `‖g ⋆ᵣˡ g‖` of an embedded symmetric kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionTable {
    pub q: usize,
    /// `(r, l) ↦ ‖g ⋆ᵣˡ g‖_{L²}` for `1 ≤ r ≤ q`, `0 ≤ l ≤ r`. The `(q, q)`
    /// cell is the scalar `‖g‖²`.
    pub rows: BTreeMap<(usize, usize), f64>,
    /// `∫ g⁴ dμ^q`.
    pub int_g4: f64,
    /// `Σ f(i)⁴ / λ_i`, only for `q = 1`.
    pub cond3a: Option<f64>,
}

impl ContractionTable {
    pub fn norm(&self, r: usize, l: usize) -> Option<f64> {
        self.rows.get(&(r, l)).copied()
    }

    /// `max_{1 ≤ r ≤ q−1} ‖g ⋆ᵣʳ g‖`, the quantity that must vanish for a CLT
    /// when `q ≥ 2`. `None` for `q = 1`.
    pub fn max_diagonal_contraction(&self) -> Option<f64> {
        (self.q >= 2).then(|| {
            (1..self.q)
                .filter_map(|r| self.norm(r, r))
                .fold(0.0, f64::max)
        })
    }

    /// Maximum over the full family `r = 1..q`, `l = 1..min(r, q−1)`.
    pub fn max_full_contraction(&self) -> Option<f64> {
        (self.q >= 2).then(|| {
            self.rows
                .iter()
                .filter(|((r, l), _)| *l >= 1 && *l <= (*r).min(self.q - 1))
                .map(|(_, &v)| v)
                .fold(0.0, f64::max)
        })
    }
}

pub fn contraction_table(f: &SymmetricKernel, w: &WeightVector) -> Result<ContractionTable> {
    w.check_covers(f.size())?;
    let q = f.order();
    let g = embed(f);
    let cells: Vec<(usize, usize)> = (1..=q).flat_map(|r| (0..=r).map(move |l| (r, l))).collect();
    // each cell is summed in a fixed order, so the parallel map is reproducible
    let norms = cells
        .par_iter()
        .map(|&(r, l)| {
            if r == q && l == q {
                Ok(g.l2_norm_sq())
            } else {
                star(&g, &g, r, l, w).map(|h| h.l2_norm())
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let rows = cells.into_iter().zip(norms).collect();
    let int_g4 = g.p_integral(4, w)?;
    let cond3a = (q == 1).then(|| compensated_sum(f.iter().map(|(t, v)| v.powi(4) / w.get(t[0]))));
    Ok(ContractionTable {
        q,
        rows,
        int_g4,
        cond3a,
    })
}

/// One inequality from the contraction comparison lemma, as `lhs` vs `rhs`
/// with `slack ≥ 0` when it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityResidual {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl InequalityResidual {
    fn at_most(name: String, lhs: f64, rhs: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            slack: rhs - lhs,
        }
    }

    fn at_least(name: String, lhs: f64, rhs: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            slack: lhs - rhs,
        }
    }
}

/// Evaluates the inequalities that bound every contraction of `g = embed(f)`
/// by the diagonal ones `‖g ⋆ₗˡ g‖`, with `α = min λ_i`:
///
/// * `a`:  `‖g ⋆_{q−1}^{q−1} g‖² ≥ α^q ∫ g⁴`
/// * `a'`: `∫ g⁴ ≤ α^{−q} Σ_{ordered} f⁴`
/// * `b1`: `‖g ⋆_q^l g‖² ≤ α^{−(q−l)} ‖g ⋆ₗˡ g‖²` for `1 ≤ l ≤ q−1`
/// * `b2`: `‖g ⋆ᵣˡ g‖² ≤ α^{−(r−l)} ‖g ⋆ₗˡ g‖²` for `1 ≤ l ≤ r ≤ q−1`
pub fn prop41_residuals(f: &SymmetricKernel, w: &WeightVector) -> Result<Vec<InequalityResidual>> {
    let q = f.order();
    if q < 2 {
        return Err(Error::OrderTooSmall { order: q, min: 2 });
    }
    w.check_covers(f.size())?;
    let alpha = w.alpha();
    let g = embed(f);
    let mut sq: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut norm_sq = |r: usize, l: usize| -> Result<f64> {
        if let Some(&v) = sq.get(&(r, l)) {
            return Ok(v);
        }
        let v = star(&g, &g, r, l, w)?.l2_norm_sq();
        sq.insert((r, l), v);
        Ok(v)
    };

    let int_g4 = g.p_integral(4, w)?;
    let sum_f4 = f.ordered_power_sum(4);
    let mut out = Vec::new();
    out.push(InequalityResidual::at_least(
        "a".into(),
        norm_sq(q - 1, q - 1)?,
        alpha.powi(q as i32) * int_g4,
    ));
    out.push(InequalityResidual::at_most(
        "a'".into(),
        int_g4,
        alpha.powi(-(q as i32)) * sum_f4,
    ));
    for l in 1..q {
        let lhs = norm_sq(q, l)?;
        let rhs = alpha.powi(-((q - l) as i32)) * norm_sq(l, l)?;
        out.push(InequalityResidual::at_most(format!("b1[l={l}]"), lhs, rhs));
    }
    for r in 1..q {
        for l in 1..=r {
            let lhs = norm_sq(r, l)?;
            let rhs = alpha.powi(-((r - l) as i32)) * norm_sq(l, l)?;
            out.push(InequalityResidual::at_most(
                format!("b2[r={r},l={l}]"),
                lhs,
                rhs,
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(c: f64) -> SymmetricKernel {
        SymmetricKernel::build(2, 2, [(vec![1, 2], c)]).unwrap()
    }

    #[test]
    fn star_one_one_on_single_pair() {
        let c = 0.7;
        let g = pair(c).embed();
        let w = WeightVector::new(vec![1.5, 3.0]).unwrap();
        let h = star(&g, &g, 1, 1, &w).unwrap();
        assert_eq!(h.order(), 2);
        assert_eq!(h.len(), 2);
        assert!((h.coeff(&[1, 1]) - c * c).abs() < 1e-15);
        assert!((h.coeff(&[2, 2]) - c * c).abs() < 1e-15);
        assert!((h.l2_norm_sq() - 2.0 * c.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn star_two_one_picks_up_intensities() {
        let c = 0.7;
        let g = pair(c).embed();
        let w = WeightVector::new(vec![1.5, 3.0]).unwrap();
        let h = star(&g, &g, 2, 1, &w).unwrap();
        assert_eq!(h.order(), 1);
        assert!((h.coeff(&[1]) - c * c / 1.5_f64.sqrt()).abs() < 1e-15);
        assert!((h.coeff(&[2]) - c * c / 3.0_f64.sqrt()).abs() < 1e-15);
        let expected = c.powi(4) * (1.0 / 1.5 + 1.0 / 3.0);
        assert!((h.l2_norm_sq() - expected).abs() < 1e-14);
    }

    #[test]
    fn star_zero_zero_is_tensor_product() {
        let h = GeneralKernel::build(2, 3, [(vec![1, 2], 0.5), (vec![3, 3], -1.0)]).unwrap();
        let w = WeightVector::ones(3).unwrap();
        let t = star(&h, &h, 0, 0, &w).unwrap();
        assert_eq!(t.order(), 4);
        assert!((t.l2_norm_sq() - h.l2_norm_sq().powi(2)).abs() < 1e-14);
        assert_eq!(t.coeff(&[1, 2, 3, 3]), -0.5);
    }

    #[test]
    fn star_full_contraction_is_inner_product() {
        let h = GeneralKernel::build(2, 3, [(vec![1, 2], 0.5), (vec![3, 1], 2.0)]).unwrap();
        let w = WeightVector::new(vec![0.5, 2.0, 4.0]).unwrap();
        let s = star(&h, &h, 2, 2, &w).unwrap();
        assert_eq!(s.scalar_value(), Some(4.25));
    }

    #[test]
    fn star_rejects_bad_indices() {
        let g = pair(1.0).embed();
        let w = WeightVector::ones(2).unwrap();
        assert!(matches!(
            star(&g, &g, 1, 2, &w),
            Err(Error::InvalidContractionIndices { .. })
        ));
        assert!(matches!(
            star(&g, &g, 3, 0, &w),
            Err(Error::InvalidContractionIndices { .. })
        ));
        let other = GeneralKernel::build(2, 3, [(vec![1, 2], 1.0)]).unwrap();
        assert!(matches!(
            star(&g, &other, 1, 1, &w),
            Err(Error::SizeMismatch { .. })
        ));
        let short = WeightVector::ones(1).unwrap();
        assert!(matches!(
            star(&g, &g, 1, 1, &short),
            Err(Error::WeightLengthMismatch { .. })
        ));
    }

    #[test]
    fn gamma_first_order_products() {
        let h = GeneralKernel::build(1, 1, [(vec![1], 1.0)]).unwrap();
        let w = WeightVector::new(vec![2.0]).unwrap();
        let g0 = gamma_operator(&h, &h, 0, &w).unwrap();
        assert_eq!(g0.scalar_value(), Some(1.0));
        let g1 = gamma_operator(&h, &h, 1, &w).unwrap();
        assert!((g1.coeff(&[1]) - 0.5_f64.sqrt()).abs() < 1e-15);
        assert_eq!(g1.len(), 1);
        let g2 = gamma_operator(&h, &h, 2, &w).unwrap();
        assert_eq!(g2.coeff(&[1, 1]), 1.0);
        assert_eq!(g2.len(), 1);
        // E[P⁴] = 3 + 1/λ through the orthogonal expansion of P²
        let m4 = g0.l2_norm_sq() + g1.l2_norm_sq() + 2.0 * g2.l2_norm_sq();
        assert!((m4 - 3.5).abs() < 1e-14);
        assert!(matches!(
            gamma_operator(&h, &h, 3, &w),
            Err(Error::InvalidOrder { .. })
        ));
    }

    #[test]
    fn gamma_zero_is_scaled_inner_product() {
        let f =
            SymmetricKernel::build(3, 4, [(vec![1, 2, 3], 0.4), (vec![2, 3, 4], -0.9)]).unwrap();
        let g = f.embed();
        let w = WeightVector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g0 = gamma_operator(&g, &g, 0, &w).unwrap();
        assert!((g0.scalar_value().unwrap() - 6.0 * g.l2_norm_sq()).abs() < 1e-13);
    }

    #[test]
    fn gamma_top_order_is_symmetrized_tensor() {
        let a = SymmetricKernel::build(1, 3, [(vec![1], 1.0), (vec![3], 0.5)])
            .unwrap()
            .embed();
        let b = SymmetricKernel::build(2, 3, [(vec![1, 2], 2.0)])
            .unwrap()
            .embed();
        let w = WeightVector::ones(3).unwrap();
        let top = gamma_operator(&a, &b, 3, &w).unwrap();
        let direct = star(&a, &b, 0, 0, &w).unwrap().symmetrize();
        assert_eq!(top.len(), direct.len());
        for (t, c) in direct.iter() {
            assert!((top.coeff(t) - c).abs() < 1e-15);
        }
    }

    #[test]
    fn table_for_running_example() {
        let f = SymmetricKernel::build(2, 2, [(vec![1, 2], 0.5)]).unwrap();
        let w = WeightVector::ones(2).unwrap();
        let table = contraction_table(&f, &w).unwrap();
        assert!((table.norm(1, 1).unwrap() - (2.0 * 0.5_f64.powi(4)).sqrt()).abs() < 1e-15);
        assert!((table.norm(2, 2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(table.rows.len(), 5);
        assert!(table.cond3a.is_none());
    }

    #[test]
    fn table_first_order_statistic() {
        let f = SymmetricKernel::build(1, 4, (1..=4).map(|i| (vec![i], 0.5))).unwrap();
        let w = WeightVector::constant(4, 2.0).unwrap();
        let table = contraction_table(&f, &w).unwrap();
        assert!((table.cond3a.unwrap() - 4.0 * (1.0 / 16.0) / 2.0).abs() < 1e-15);
        assert!(table.max_diagonal_contraction().is_none());
    }

    #[test]
    fn table_of_empty_kernel_is_zero() {
        let f = SymmetricKernel::zero(3, 5).unwrap();
        let table = contraction_table(&f, &WeightVector::ones(5).unwrap()).unwrap();
        assert!(table.rows.values().all(|&v| v == 0.0));
        assert_eq!(table.int_g4, 0.0);
    }

    #[test]
    fn residuals_equal_weights_are_tight() {
        let c = 0.8;
        let f = pair(c);
        let res = prop41_residuals(&f, &WeightVector::ones(2).unwrap()).unwrap();
        let b1 = res.iter().find(|r| r.name == "b1[l=1]").unwrap();
        assert!((b1.lhs - 2.0 * c.powi(4)).abs() < 1e-15);
        assert!(b1.slack.abs() < 1e-15);
    }

    #[test]
    fn residuals_unequal_weights_are_strict() {
        let f = pair(0.8);
        let res = prop41_residuals(&f, &WeightVector::new(vec![1.0, 4.0]).unwrap()).unwrap();
        let b1 = res.iter().find(|r| r.name == "b1[l=1]").unwrap();
        assert!(b1.slack > 1e-3);
        assert!(res.iter().all(|r| r.slack >= -1e-12));
    }

    #[test]
    fn residuals_need_second_order() {
        let f = SymmetricKernel::build(1, 2, [(vec![1], 1.0)]).unwrap();
        assert!(matches!(
            prop41_residuals(&f, &WeightVector::ones(2).unwrap()),
            Err(Error::OrderTooSmall { .. })
        ));
    }
}
