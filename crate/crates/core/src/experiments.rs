//! Kernel sequences and the universality harness.

use std::fmt;
use std::sync::Arc;

use crate::contract::contraction_table;
use crate::error::{Error, Result};
use crate::kernels::{embed, SymmetricKernel, WeightVector};
use crate::moments::{
    cross_covariance, diagnose_with_budget, fourth_moment_structured, ProviderKind, DEFAULT_BUDGET,
};
use crate::montecarlo::{simulate, RngSpec};
use crate::numeric::{compensated_sum, factorial};

type Generator = dyn Fn(usize) -> Result<(SymmetricKernel, WeightVector)> + Send + Sync;

/// A sequence `n ↦ (f⁽ⁿ⁾, λ)` with its declared limit variance.
#[derive(Clone)]
pub struct KernelFamily {
    pub name: String,
    pub q: usize,
    pub sigma2: f64,
    generator: Arc<Generator>,
}

impl KernelFamily {
    pub fn new<G>(name: impl Into<String>, q: usize, sigma2: f64, generator: G) -> Self
    where
        G: Fn(usize) -> Result<(SymmetricKernel, WeightVector)> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            q,
            sigma2,
            generator: Arc::new(generator),
        }
    }

    pub fn generate(&self, n: usize) -> Result<(SymmetricKernel, WeightVector)> {
        (self.generator)(n)
    }

    /// Built-in family by CLI name: `counterexample`, `pair-partition`, `q1-escape`.
    pub fn by_name(name: &str, q: usize) -> Result<Self> {
        match name {
            "counterexample" => counterexample_family(q),
            "pair-partition" => Ok(pair_partition_family()),
            "q1-escape" => Ok(q1_escape_family()),
            other => Err(Error::Unknown {
                kind: "family",
                name: other.to_string(),
            }),
        }
    }
}

impl fmt::Debug for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelFamily")
            .field("name", &self.name)
            .field("q", &self.q)
            .field("sigma2", &self.sigma2)
            .finish_non_exhaustive()
    }
}

/// `f_N = 1/(q!√(N−q+1))` on the tuples `{1, …, q−1, s}`, `q ≤ s ≤ N`.
///
/// Over signs the sum is `e_1⋯e_{q−1} · Σ_s e_s/√(N−q+1)`, asymptotically
/// normal; over Gaussians it has the law of `G_1⋯G_q` for every `N`.
pub fn counterexample_kernel(q: usize, size: usize) -> Result<SymmetricKernel> {
    if q < 2 {
        return Err(Error::OrderTooSmall { order: q, min: 2 });
    }
    if size < q {
        return Err(Error::SizeOutOfRange {
            size,
            max: crate::kernels::MAX_SIZE,
        });
    }
    let m = (size - q + 1) as f64;
    let value = 1.0 / (factorial(q) * m.sqrt());
    let head: Vec<u32> = (1..q as u32).collect();
    SymmetricKernel::build(
        q,
        size,
        (q as u32..=size as u32).map(|s| {
            let mut t = head.clone();
            t.push(s);
            (t, value)
        }),
    )
}

/// `n ↦ f_N` on `N = n + q` with `λ ≡ 1`.
pub fn counterexample_family(q: usize) -> Result<KernelFamily> {
    counterexample_family_with_lambda(q, 1.0)
}

/// The counterexample family with constant intensity `lambda`.
pub fn counterexample_family_with_lambda(q: usize, lambda: f64) -> Result<KernelFamily> {
    if q < 2 {
        return Err(Error::OrderTooSmall { order: q, min: 2 });
    }
    WeightVector::constant(1, lambda)?;
    Ok(KernelFamily::new("counterexample", q, 1.0, move |n| {
        let size = n + q;
        Ok((
            counterexample_kernel(q, size)?,
            WeightVector::constant(size, lambda)?,
        ))
    }))
}

/// `f(2i−1, 2i) = 1/(2√n)` on `N = 2n`, `λ ≡ 1`: a normalized sum of `n`
/// independent products, so `‖g ⋆₁¹ g‖² = 1/(8n)`.
pub fn pair_partition_family() -> KernelFamily {
    KernelFamily::new("pair-partition", 2, 1.0, |n| {
        if n == 0 {
            return Err(Error::InvalidGrid("pair-partition needs n ≥ 1".into()));
        }
        let value = 1.0 / (2.0 * (n as f64).sqrt());
        let f = SymmetricKernel::build(
            2,
            2 * n,
            (1..=n as u32).map(|i| (vec![2 * i - 1, 2 * i], value)),
        )?;
        Ok((f, WeightVector::ones(2 * n)?))
    })
}

/// `f_n(n) = 1` on `N = n` with `λ_i = i`: the first-order sequence whose
/// Poisson sums normalize while the single coordinate stays non-Gaussian for
/// the other laws.
pub fn q1_escape_family() -> KernelFamily {
    KernelFamily::new("q1-escape", 1, 1.0, |n| {
        if n == 0 {
            return Err(Error::InvalidGrid("q1-escape needs n ≥ 1".into()));
        }
        let f = SymmetricKernel::build(1, n, [(vec![n as u32], 1.0)])?;
        Ok((f, WeightVector::new((1..=n).map(|i| i as f64).collect())?))
    })
}

/// Final-value thresholds for the trend summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub gap: f64,
    pub contraction: f64,
    pub w1: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            gap: 0.05,
            contraction: 0.05,
            w1: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniversalityRow {
    pub n: usize,
    /// Kernel size `N` at this grid point.
    pub size: usize,
    pub provider: ProviderKind,
    pub var_exact: f64,
    pub m4_exact: f64,
    pub gap: f64,
    /// `max_r ‖g ⋆ᵣʳ g‖` over `1 ≤ r ≤ q−1`; absent for `q = 1`.
    pub max_contraction: Option<f64>,
    /// `Σ f⁴/λ` for `q = 1`.
    pub cond3a: Option<f64>,
    pub w1: f64,
    pub ks: f64,
    pub m4_empirical: f64,
    pub se_m4: f64,
}

/// Trend flags for one provider along the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trend {
    pub provider: ProviderKind,
    /// `|gap|` strictly decreases along the grid.
    pub gap_decreasing: bool,
    /// The contraction statistic (or `cond3a` when `q = 1`) strictly decreases.
    pub contraction_decreasing: bool,
    pub final_gap_below: bool,
    pub final_contraction_below: bool,
    pub final_w1_below: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniversalityReport {
    pub family: String,
    pub q: usize,
    pub rows: Vec<UniversalityRow>,
    pub trends: Vec<Trend>,
}

impl UniversalityReport {
    pub fn rows_for(&self, provider: ProviderKind) -> impl Iterator<Item = &UniversalityRow> {
        self.rows.iter().filter(move |r| r.provider == provider)
    }
}

/// Runs exact diagnostics and Monte Carlo distances for every `(n, provider)`
/// pair of the grid. Rows come out in grid order, then provider order.
pub fn universality_run(
    family: &KernelFamily,
    providers: &[ProviderKind],
    grid: &[usize],
    n_samples: usize,
    spec: &RngSpec,
    thresholds: Thresholds,
) -> Result<UniversalityReport> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid(
            "grid must be strictly increasing".into(),
        ));
    }
    let mut rows = Vec::new();
    if !providers.is_empty() {
        for &n in grid {
            let (f, w) = family.generate(n)?;
            for &kind in providers {
                let provider = kind.resolve(&w);
                let diag = diagnose_with_budget(&f, &w, &provider, DEFAULT_BUDGET)?;
                let sim = simulate(&f, &provider, n_samples, spec, Some(family.sigma2))?;
                rows.push(UniversalityRow {
                    n,
                    size: f.size(),
                    provider: kind,
                    var_exact: diag.var_exact,
                    m4_exact: diag.m4_exact,
                    gap: diag.gap,
                    max_contraction: diag.contraction_table.max_diagonal_contraction(),
                    cond3a: diag.cond3a,
                    w1: sim.w1,
                    ks: sim.ks,
                    m4_empirical: sim.m4_empirical,
                    se_m4: sim.se_m4,
                });
            }
        }
    }
    let trends = providers
        .iter()
        .map(|&kind| {
            let series: Vec<&UniversalityRow> =
                rows.iter().filter(|r| r.provider == kind).collect();
            let stat = |r: &UniversalityRow| r.max_contraction.or(r.cond3a).unwrap_or(0.0);
            let strictly_down = |xs: Vec<f64>| xs.windows(2).all(|w| w[1] < w[0]);
            let last = series.last().expect("grid is nonempty");
            Trend {
                provider: kind,
                gap_decreasing: strictly_down(series.iter().map(|r| r.gap.abs()).collect()),
                contraction_decreasing: strictly_down(series.iter().map(|r| stat(r)).collect()),
                final_gap_below: last.gap.abs() < thresholds.gap,
                final_contraction_below: stat(last) < thresholds.contraction,
                final_w1_below: last.w1 < thresholds.w1,
            }
        })
        .collect();
    Ok(UniversalityReport {
        family: family.name.clone(),
        q: family.q,
        rows,
        trends,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceResidual {
    pub i: usize,
    pub j: usize,
    pub exact: f64,
    pub target: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDiagnostics {
    pub index: usize,
    pub q: usize,
    /// `max_r ‖g ⋆ᵣʳ g‖` for `q ≥ 2`, `Σ f⁴/λ` for `q = 1`.
    pub statistic: f64,
    pub m4_exact: f64,
    /// `E[F_j⁴] − 3 C(j,j)²`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorReport {
    pub pairs: Vec<CovarianceResidual>,
    pub components: Vec<ComponentDiagnostics>,
}

/// Componentwise diagnostics of a vector of Poisson homogeneous sums against
/// a target covariance `C`.
pub fn vector_diagnose(
    fs: &[SymmetricKernel],
    w: &WeightVector,
    cov: &[Vec<f64>],
) -> Result<VectorReport> {
    let d = fs.len();
    if cov.len() != d || cov.iter().any(|row| row.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "{d} kernels need a {d}×{d} covariance"
        )));
    }
    let symmetric = (0..d).all(|i| (0..i).all(|j| (cov[i][j] - cov[j][i]).abs() <= 1e-12));
    if !symmetric {
        return Err(Error::DimensionMismatch(
            "covariance is not symmetric".into(),
        ));
    }
    if let Some(first) = fs.first() {
        if let Some(other) = fs.iter().find(|f| f.size() != first.size()) {
            return Err(Error::SizeMismatch {
                left: first.size(),
                right: other.size(),
            });
        }
        w.check_covers(first.size())?;
    }

    let mut pairs = Vec::new();
    for i in 0..d {
        for j in i..d {
            let exact = cross_covariance(&fs[i], &fs[j])?;
            pairs.push(CovarianceResidual {
                i: i + 1,
                j: j + 1,
                exact,
                target: cov[i][j],
                residual: exact - cov[i][j],
            });
        }
    }

    let components = fs
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let statistic = if f.order() == 1 {
                compensated_sum(f.iter().map(|(t, v)| v.powi(4) / w.get(t[0])))
            } else {
                contraction_table(f, w)?
                    .max_diagonal_contraction()
                    .unwrap_or(0.0)
            };
            let m4_exact = fourth_moment_structured(f, w)?;
            Ok(ComponentDiagnostics {
                index: j + 1,
                q: f.order(),
                statistic,
                m4_exact,
                gap: m4_exact - 3.0 * cov[j][j] * cov[j][j],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorReport { pairs, components })
}

/// `‖embed f‖²` helper used by the family invariants.
pub fn embedded_norm_sq(f: &SymmetricKernel) -> f64 {
    embed(f).l2_norm_sq()
}
