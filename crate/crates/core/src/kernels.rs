//! Discrete kernels and the Poisson embedding.
//!
//! A [`SymmetricKernel`] is a symmetric function on `[N]^q` vanishing on
//! diagonals, stored once per strictly increasing index tuple. Its embedding
//! into `L²(μ^q)` is a [`GeneralKernel`]: a finite linear combination of the
//! orthonormal tensors `g_{i₁}⊗…⊗g_{i_k}` with `g_i = 1_{A_i}/√λ_i` and the
//! `A_i` pairwise disjoint. Under that basis
//!
//! * `∫ g_i g_j dμ = δ_ij`,
//! * `g_i · g_j = δ_ij λ_i^{-1/2} g_i` pointwise,
//!
//! so every functional used by the contraction machinery reduces to sums over
//! coefficient maps.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, factorial, next_permutation};

/// Largest kernel order accepted from user input.
pub const MAX_ORDER: usize = 6;
/// Largest order produced by contractions of two order-`MAX_ORDER` kernels.
pub const MAX_GENERAL_ORDER: usize = 2 * MAX_ORDER;
/// Largest index range.
pub const MAX_SIZE: usize = 10_000;
/// Coefficients below this magnitude are dropped when a kernel is built from raw data.
pub const ZERO_THRESHOLD: f64 = 1e-15;

/// Poisson intensities `λ_1, …, λ_N` together with `α = min λ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    lambda: Vec<f64>,
    alpha: f64,
}

impl WeightVector {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::EmptyWeights);
        }
        if lambda.len() > MAX_SIZE {
            return Err(Error::SizeOutOfRange {
                size: lambda.len(),
                max: MAX_SIZE,
            });
        }
        for (i, &l) in lambda.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidWeight {
                    index: i + 1,
                    value: l,
                });
            }
        }
        let alpha = lambda.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { lambda, alpha })
    }

    /// `λ ≡ 1` on `[n]`.
    pub fn ones(n: usize) -> Result<Self> {
        Self::constant(n, 1.0)
    }

    pub fn constant(n: usize, lambda: f64) -> Result<Self> {
        Self::new(vec![lambda; n])
    }

    /// Intensity at a 1-based index.
    #[inline]
    pub fn get(&self, index: u32) -> f64 {
        self.lambda[index as usize - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub(crate) fn check_covers(&self, size: usize) -> Result<()> {
        if size > self.len() {
            Err(Error::WeightLengthMismatch {
                size,
                weights: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

fn check_order(order: usize, min: usize, max: usize) -> Result<()> {
    if order < min || order > max {
        Err(Error::OrderOutOfRange { order, min, max })
    } else {
        Ok(())
    }
}

fn check_size(size: usize) -> Result<()> {
    if size == 0 || size > MAX_SIZE {
        Err(Error::SizeOutOfRange {
            size,
            max: MAX_SIZE,
        })
    } else {
        Ok(())
    }
}

fn check_tuple(tuple: &[u32], order: usize, size: usize) -> Result<()> {
    if tuple.len() != order {
        return Err(Error::TupleArity {
            tuple: tuple.to_vec(),
            expected: order,
            got: tuple.len(),
        });
    }
    if let Some(&index) = tuple.iter().find(|&&i| i == 0 || i as usize > size) {
        return Err(Error::IndexOutOfRange { index, size });
    }
    Ok(())
}

/// A symmetric kernel on `[N]^q` vanishing on diagonals.
///
/// Only strictly increasing tuples are stored; the value is shared by all `q!`
/// permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricKernel {
    order: usize,
    size: usize,
    entries: BTreeMap<Vec<u32>, f64>,
}

impl SymmetricKernel {
    /// Builds a kernel from raw `(tuple, value)` pairs in any index order.
    pub fn build<I>(order: usize, size: usize, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        check_order(order, 1, MAX_ORDER)?;
        check_size(size)?;
        let mut entries = BTreeMap::new();
        let mut seen = std::collections::BTreeSet::new();
        for (mut tuple, value) in raw {
            check_tuple(&tuple, order, size)?;
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { tuple, value });
            }
            let original = tuple.clone();
            tuple.sort_unstable();
            if tuple.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::RepeatedIndex { tuple: original });
            }
            if !seen.insert(tuple.clone()) {
                return Err(Error::DuplicateEntry { tuple });
            }
            if value.abs() >= ZERO_THRESHOLD {
                entries.insert(tuple, value);
            }
        }
        Ok(Self {
            order,
            size,
            entries,
        })
    }

    pub fn zero(order: usize, size: usize) -> Result<Self> {
        Self::build(order, size, std::iter::empty())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of stored (increasing) tuples.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `f(i₁,…,i_q)` for any index order; zero on diagonals and off the support.
    pub fn get(&self, tuple: &[u32]) -> f64 {
        if tuple.len() != self.order {
            return 0.0;
        }
        let mut key = tuple.to_vec();
        key.sort_unstable();
        if key.windows(2).any(|w| w[0] == w[1]) {
            return 0.0;
        }
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    /// Increasing tuples with their values, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.entries.iter().map(|(t, &v)| (t.as_slice(), v))
    }

    /// `Σ_{ordered} |f|^p = q! Σ_{increasing} |f|^p`.
    pub fn ordered_power_sum(&self, p: i32) -> f64 {
        factorial(self.order) * compensated_sum(self.entries.values().map(|v| v.abs().powi(p)))
    }

    /// Indices touched by the support, ascending.
    pub fn support_indices(&self) -> Vec<u32> {
        let mut idx: Vec<u32> = self.entries.keys().flatten().copied().collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    /// The Poisson embedding; see [`embed`].
    pub fn embed(&self) -> GeneralKernel {
        embed(self)
    }
}

/// `Σ c(i₁,…,i_k) g_{i₁}⊗…⊗g_{i_k}` over arbitrary ordered tuples.
///
/// Order 0 is a scalar stored under the empty tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralKernel {
    order: usize,
    size: usize,
    entries: BTreeMap<Vec<u32>, f64>,
}

impl GeneralKernel {
    /// Builds a kernel from raw coefficients; repeated tuples are summed.
    pub fn build<I>(order: usize, size: usize, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        check_order(order, 0, MAX_GENERAL_ORDER)?;
        check_size(size)?;
        let mut entries: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (tuple, value) in raw {
            check_tuple(&tuple, order, size)?;
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { tuple, value });
            }
            *entries.entry(tuple).or_insert(0.0) += value;
        }
        entries.retain(|_, v| v.abs() >= ZERO_THRESHOLD);
        Ok(Self {
            order,
            size,
            entries,
        })
    }

    pub fn scalar(size: usize, value: f64) -> Result<Self> {
        Self::build(0, size, [(Vec::new(), value)])
    }

    /// Wraps derived coefficients. Entries that cancelled down to rounding
    /// noise relative to the largest coefficient are dropped.
    pub(crate) fn from_derived(order: usize, size: usize, map: HashMap<Vec<u32>, f64>) -> Self {
        let scale = map.values().fold(0.0_f64, |m, v| m.max(v.abs()));
        let cutoff = scale * ZERO_THRESHOLD;
        let entries = map
            .into_iter()
            .filter(|(_, v)| *v != 0.0 && v.abs() > cutoff)
            .collect();
        Self {
            order,
            size,
            entries,
        }
    }

    pub(crate) fn empty(order: usize, size: usize) -> Self {
        Self {
            order,
            size,
            entries: BTreeMap::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coeff(&self, tuple: &[u32]) -> f64 {
        self.entries.get(tuple).copied().unwrap_or(0.0)
    }

    /// The order-0 value, or zero for an empty scalar.
    pub fn scalar_value(&self) -> Option<f64> {
        (self.order == 0).then(|| self.coeff(&[]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.entries.iter().map(|(t, &v)| (t.as_slice(), v))
    }

    /// `‖h‖²_{L²} = Σ c²` by orthonormality of the tensor basis.
    pub fn l2_norm_sq(&self) -> f64 {
        compensated_sum(self.entries.values().map(|v| v * v))
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn inner_product(&self, other: &GeneralKernel) -> Result<f64> {
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(compensated_sum(
            small
                .entries
                .iter()
                .filter_map(|(t, a)| large.entries.get(t).map(|b| a * b)),
        ))
    }

    /// `∫ h^p dμ^k`.
    ///
    /// Disjointness of the `A_i` kills every cross term of the `p`-fold
    /// product, so `h^p = Σ c(t)^p ∏_j g_{t_j}^p` and each factor integrates
    /// to `∫ g_i^p dμ = λ_i^{1-p/2}`.
    pub fn p_integral(&self, p: u32, w: &WeightVector) -> Result<f64> {
        if !(1..=8).contains(&p) {
            return Err(Error::InvalidPower(p));
        }
        w.check_covers(self.size)?;
        let exponent = 1.0 - p as f64 / 2.0;
        Ok(compensated_sum(self.entries.iter().map(|(t, c)| {
            let weight: f64 = t.iter().map(|&i| w.get(i).powf(exponent)).product();
            c.powi(p as i32) * weight
        })))
    }

    /// Averages coefficients over all permutations of each tuple.
    ///
    /// The average over the `k!` permutations of `u` equals the mean of the
    /// coefficients over the distinct elements of its orbit, so orbits are
    /// summed once and the mean is written back to every member.
    pub fn symmetrize(&self) -> GeneralKernel {
        if self.order <= 1 {
            return self.clone();
        }
        let mut orbits: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (t, &c) in &self.entries {
            let mut key = t.clone();
            key.sort_unstable();
            *orbits.entry(key).or_insert(0.0) += c;
        }
        let mut out = HashMap::new();
        for (mut key, total) in orbits {
            let mut members = Vec::new();
            loop {
                members.push(key.clone());
                if !next_permutation(&mut key) {
                    break;
                }
            }
            let value = total / members.len() as f64;
            for m in members {
                out.insert(m, value);
            }
        }
        GeneralKernel::from_derived(self.order, self.size, out)
    }

    /// Largest coefficient gap to the symmetrized kernel.
    pub fn asymmetry(&self) -> f64 {
        let sym = self.symmetrize();
        let mut worst = 0.0_f64;
        for (t, c) in sym.iter() {
            worst = worst.max((c - self.coeff(t)).abs());
        }
        for (t, c) in self.iter() {
            worst = worst.max((c - sym.coeff(t)).abs());
        }
        worst
    }

    /// `self + factor · other`, both of the same order and size.
    pub fn add_scaled(&self, other: &GeneralKernel, factor: f64) -> Result<GeneralKernel> {
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        if self.size != other.size {
            return Err(Error::SizeMismatch {
                left: self.size,
                right: other.size,
            });
        }
        let mut map: HashMap<Vec<u32>, f64> =
            self.entries.iter().map(|(t, &c)| (t.clone(), c)).collect();
        for (t, &c) in &other.entries {
            *map.entry(t.clone()).or_insert(0.0) += factor * c;
        }
        Ok(GeneralKernel::from_derived(self.order, self.size, map))
    }

    pub fn scaled(&self, factor: f64) -> GeneralKernel {
        let map = self
            .entries
            .iter()
            .map(|(t, &c)| (t.clone(), factor * c))
            .collect();
        GeneralKernel::from_derived(self.order, self.size, map)
    }
}

/// Expands every increasing tuple of `f` into its `q!` permutations.
pub fn embed(f: &SymmetricKernel) -> GeneralKernel {
    let mut entries = BTreeMap::new();
    for (t, v) in f.iter() {
        let mut perm = t.to_vec();
        loop {
            entries.insert(perm.clone(), v);
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
    GeneralKernel {
        order: f.order,
        size: f.size,
        entries,
    }
}
