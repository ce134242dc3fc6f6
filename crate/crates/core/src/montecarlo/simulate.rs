use super::distance::distances;
use super::rng::RngSpec;
use super::sample::{eval_row, RowSampler};
use crate::error::{Error, Result};
use crate::kernels::SymmetricKernel;
use crate::moments::{variance_exact, MomentProvider};
use crate::numeric::KahanSum;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub n_samples: usize,
    /// Target variance of the reference normal.
    pub sigma2: f64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `mean(Q²)` and its standard error.
    pub m2_empirical: f64,
    pub se_m2: f64,
    /// `mean(Q⁴)` and its standard error.
    pub m4_empirical: f64,
    pub se_m4: f64,
    pub w1: f64,
    pub ks: f64,
}

/// Samples `n` copies of `Q`, evaluates them and measures the distance to
/// `N(0, σ²)`, with `σ²` defaulting to the exact variance.
pub fn simulate(
    f: &SymmetricKernel,
    provider: &MomentProvider,
    n: usize,
    spec: &RngSpec,
    sigma2: Option<f64>,
) -> Result<SimulationReport> {
    if n < 2 {
        return Err(Error::InsufficientSamples(n));
    }
    let sigma2 = sigma2.unwrap_or_else(|| variance_exact(f));
    let sampler = RowSampler::new(provider, f.size())?;
    let values = spec.map_rows(
        n,
        || vec![0.0; sampler.cols()],
        |rng, row, _| {
            sampler.fill(rng, row);
            eval_row(f, row)
        },
    );
    let d = distances(&values, sigma2)?;
    let (mean, variance) = mean_and_variance(values.iter().copied());
    let (m2, var2) = mean_and_variance(values.iter().map(|x| x * x));
    let (m4, var4) = mean_and_variance(values.iter().map(|x| x.powi(4)));
    let root_n = (n as f64).sqrt();
    Ok(SimulationReport {
        n_samples: n,
        sigma2,
        mean,
        variance,
        m2_empirical: m2,
        se_m2: var2.sqrt() / root_n,
        m4_empirical: m4,
        se_m4: var4.sqrt() / root_n,
        w1: d.w1,
        ks: d.ks,
    })
}

/// Two-pass mean and unbiased variance in input order.
fn mean_and_variance<I: Iterator<Item = f64> + Clone>(xs: I) -> (f64, f64) {
    let mut count = 0usize;
    let mut sum = KahanSum::default();
    for x in xs.clone() {
        sum.add(x);
        count += 1;
    }
    let mean = sum.value() / count as f64;
    let mut ss = KahanSum::default();
    for x in xs {
        ss.add((x - mean) * (x - mean));
    }
    (mean, ss.value() / (count as f64 - 1.0))
}
