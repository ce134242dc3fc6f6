use super::normal::{normal_cdf, normal_pdf, normal_quantile};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Distances between an empirical law and `N(0, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distances {
    /// Wasserstein-1.
    pub w1: f64,
    /// Kolmogorov–Smirnov.
    pub ks: f64,
}

pub fn distances(samples: &[f64], sigma2: f64) -> Result<Distances> {
    let sorted = sorted_copy(samples, sigma2)?;
    let sigma = sigma2.sqrt();
    Ok(Distances {
        w1: wasserstein_sorted(&sorted, sigma),
        ks: ks_sorted(&sorted, sigma),
    })
}

pub fn wasserstein1(samples: &[f64], sigma2: f64) -> Result<f64> {
    let sorted = sorted_copy(samples, sigma2)?;
    Ok(wasserstein_sorted(&sorted, sigma2.sqrt()))
}

pub fn kolmogorov_smirnov(samples: &[f64], sigma2: f64) -> Result<f64> {
    let sorted = sorted_copy(samples, sigma2)?;
    Ok(ks_sorted(&sorted, sigma2.sqrt()))
}

fn sorted_copy(samples: &[f64], sigma2: f64) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples(samples.len()));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::NonpositiveVariance(sigma2));
    }
    if let Some(&bad) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::DomainError(bad));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// `∫₀¹ |F_n^{-1}(u) − σ Φ^{-1}(u)| du`.
///
/// On the `j`-th segment `((j−1)/n, j/n]` the empirical quantile is the
/// constant `x_(j)`. Splitting the segment where `σΦ^{-1}(u) = x_(j)` and
/// using `∫ Φ^{-1}(u) du = −φ(Φ^{-1}(u))` integrates each piece in closed form.
fn wasserstein_sorted(sorted: &[f64], sigma: f64) -> f64 {
    let n = sorted.len();
    // density of the standard normal at Φ^{-1}(j/n), zero at both ends
    let phi_at = |j: usize| -> f64 {
        if j == 0 || j == n {
            0.0
        } else {
            normal_pdf(normal_quantile(j as f64 / n as f64).expect("interior point"))
        }
    };
    let mut total = KahanSum::default();
    let mut phi_lo = phi_at(0);
    for (j, &x) in sorted.iter().enumerate() {
        let a = j as f64 / n as f64;
        let b = (j + 1) as f64 / n as f64;
        let phi_hi = phi_at(j + 1);
        let z = x / sigma;
        let cx = normal_cdf(z);
        let (c, phi_c) = if cx <= a {
            (a, phi_lo)
        } else if cx >= b {
            (b, phi_hi)
        } else {
            (cx, normal_pdf(z))
        };
        // ∫_a^c (x − σΦ⁻¹) du + ∫_c^b (σΦ⁻¹ − x) du
        let below = x * (c - a) - sigma * (phi_lo - phi_c);
        let above = sigma * (phi_c - phi_hi) - x * (b - c);
        total.add(below + above);
        phi_lo = phi_hi;
    }
    total.value().max(0.0)
}

fn ks_sorted(sorted: &[f64], sigma: f64) -> f64 {
    let n = sorted.len() as f64;
    let mut worst = 0.0_f64;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut k = i;
        while k < sorted.len() && sorted[k] == x {
            k += 1;
        }
        let cdf = normal_cdf(x / sigma);
        worst = worst
            .max((k as f64 / n - cdf).abs())
            .max((cdf - i as f64 / n).abs());
        i = k;
    }
    worst.min(1.0)
}
