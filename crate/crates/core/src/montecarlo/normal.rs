use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal quantile on the open unit interval.
pub fn normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::DomainError(u));
    }
    Ok(-SQRT_2 * erfc_inv(2.0 * u))
}
