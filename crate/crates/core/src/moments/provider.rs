use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::WeightVector;
use crate::numeric::binomial;

/// Highest central moment served by any provider.
pub const MAX_MOMENT_ORDER: usize = 16;

/// `T̃_k(λ) = E[(P(λ) − λ)^k]` through
/// `T̃_{k+1} = λ Σ_{j=0}^{k−1} C(k,j) T̃_j`, `T̃_0 = 1`, `T̃_1 = 0`.
pub fn poisson_central_moment(k: usize, lambda: f64) -> Result<f64> {
    if k > MAX_MOMENT_ORDER {
        return Err(Error::OrderTooLarge {
            order: k,
            max: MAX_MOMENT_ORDER,
        });
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::DomainError(lambda));
    }
    let mut t = vec![0.0; k.max(1) + 1];
    t[0] = 1.0;
    for n in 1..k {
        t[n + 1] = lambda * (0..n).map(|j| binomial(n, j) * t[j]).sum::<f64>();
    }
    Ok(t[k])
}

/// Central moments `m_0, m_1, …` of a centered unit-variance law.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomMoments(Vec<f64>);

impl CustomMoments {
    pub fn new(moments: Vec<f64>) -> Result<Self> {
        if moments.len() < 3 {
            return Err(Error::InvalidCustomMoments(
                "need at least m_0, m_1, m_2".into(),
            ));
        }
        if moments.len() > MAX_MOMENT_ORDER + 1 {
            return Err(Error::InvalidCustomMoments(format!(
                "at most {} moments",
                MAX_MOMENT_ORDER + 1
            )));
        }
        let expect = [1.0, 0.0, 1.0];
        for (k, (&got, &want)) in moments.iter().zip(&expect).enumerate() {
            if (got - want).abs() > 1e-12 {
                return Err(Error::InvalidCustomMoments(format!(
                    "m_{k} must be {want}, got {got}"
                )));
            }
        }
        if moments.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidCustomMoments("non-finite moment".into()));
        }
        Ok(Self(moments))
    }

    pub fn get(&self, k: usize) -> Result<f64> {
        self.0.get(k).copied().ok_or(Error::MissingCustomMoment(k))
    }
}

/// Law of the normalized coordinates `X_i`.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentProvider {
    Gaussian,
    Rademacher,
    /// `(P(λ_i) − λ_i)/√λ_i` with per-index intensities.
    Poisson(WeightVector),
    Custom(CustomMoments),
}

impl MomentProvider {
    pub fn name(&self) -> &'static str {
        match self {
            MomentProvider::Gaussian => "gaussian",
            MomentProvider::Rademacher => "rademacher",
            MomentProvider::Poisson(_) => "poisson",
            MomentProvider::Custom(_) => "custom",
        }
    }

    /// `E[X_index^k]`, 1-based index.
    pub fn moment(&self, index: u32, k: usize) -> Result<f64> {
        if k > MAX_MOMENT_ORDER {
            return Err(Error::OrderTooLarge {
                order: k,
                max: MAX_MOMENT_ORDER,
            });
        }
        match self {
            MomentProvider::Gaussian => Ok(if k % 2 == 1 {
                0.0
            } else {
                (1..k).step_by(2).map(|j| j as f64).product()
            }),
            MomentProvider::Rademacher => Ok(if k % 2 == 1 { 0.0 } else { 1.0 }),
            MomentProvider::Poisson(w) => {
                if index == 0 || index as usize > w.len() {
                    return Err(Error::IndexOutOfRange {
                        index,
                        size: w.len(),
                    });
                }
                let lambda = w.get(index);
                Ok(poisson_central_moment(k, lambda)? / lambda.powf(k as f64 / 2.0))
            }
            MomentProvider::Custom(table) => table.get(k),
        }
    }

    pub(crate) fn check_covers(&self, size: usize) -> Result<()> {
        match self {
            MomentProvider::Poisson(w) => w.check_covers(size),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for MomentProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `central_moment(provider, index, k)`: the `k`-th moment of the normalized
/// coordinate at a 1-based index.
pub fn central_moment(provider: &MomentProvider, index: u32, k: usize) -> Result<f64> {
    provider.moment(index, k)
}

/// A provider law without its parameters; Poisson picks up the intensities of
/// whatever kernel it is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProviderKind {
    Gaussian,
    Rademacher,
    Poisson,
}

impl ProviderKind {
    pub fn resolve(self, w: &WeightVector) -> MomentProvider {
        match self {
            ProviderKind::Gaussian => MomentProvider::Gaussian,
            ProviderKind::Rademacher => MomentProvider::Rademacher,
            ProviderKind::Poisson => MomentProvider::Poisson(w.clone()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProviderKind::Gaussian => "gaussian",
            ProviderKind::Rademacher => "rademacher",
            ProviderKind::Poisson => "poisson",
        }
    }
}

impl fmt::Display for ProviderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProviderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" => Ok(ProviderKind::Gaussian),
            "rademacher" => Ok(ProviderKind::Rademacher),
            "poisson" => Ok(ProviderKind::Poisson),
            other => Err(Error::Unknown {
                kind: "provider",
                name: other.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursion_low_orders() {
        for lambda in [0.5, 1.0, 2.0, 5.0] {
            assert_eq!(poisson_central_moment(0, lambda).unwrap(), 1.0);
            assert_eq!(poisson_central_moment(1, lambda).unwrap(), 0.0);
            assert!((poisson_central_moment(2, lambda).unwrap() - lambda).abs() < 1e-14);
            assert!((poisson_central_moment(3, lambda).unwrap() - lambda).abs() < 1e-14);
            let t4 = lambda + 3.0 * lambda * lambda;
            assert!((poisson_central_moment(4, lambda).unwrap() - t4).abs() < 1e-12);
        }
        assert!(matches!(
            poisson_central_moment(17, 1.0),
            Err(Error::OrderTooLarge { .. })
        ));
        assert!(poisson_central_moment(4, 0.0).is_err());
    }

    #[test]
    fn provider_moments() {
        let w = WeightVector::new(vec![2.0]).unwrap();
        let p = MomentProvider::Poisson(w);
        assert!((central_moment(&p, 1, 4).unwrap() - 3.5).abs() < 1e-14);
        assert!((central_moment(&p, 1, 3).unwrap() - 0.5_f64.sqrt()).abs() < 1e-14);
        assert_eq!(
            central_moment(&MomentProvider::Gaussian, 3, 6).unwrap(),
            15.0
        );
        assert_eq!(
            central_moment(&MomentProvider::Gaussian, 3, 8).unwrap(),
            105.0
        );
        assert_eq!(
            central_moment(&MomentProvider::Rademacher, 1, 5).unwrap(),
            0.0
        );
        assert_eq!(
            central_moment(&MomentProvider::Rademacher, 1, 6).unwrap(),
            1.0
        );
        assert!(matches!(
            central_moment(&p, 2, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn every_provider_is_standardized() {
        let providers = [
            MomentProvider::Gaussian,
            MomentProvider::Rademacher,
            MomentProvider::Poisson(WeightVector::new(vec![0.3, 7.0]).unwrap()),
            MomentProvider::Custom(CustomMoments::new(vec![1.0, 0.0, 1.0, 0.2, 4.0]).unwrap()),
        ];
        for p in &providers {
            for i in 1..=2 {
                assert!((p.moment(i, 0).unwrap() - 1.0).abs() < 1e-15);
                assert!(p.moment(i, 1).unwrap().abs() < 1e-15);
                assert!((p.moment(i, 2).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn custom_tables() {
        assert!(CustomMoments::new(vec![1.0, 0.1, 1.0]).is_err());
        assert!(CustomMoments::new(vec![1.0, 0.0]).is_err());
        let c = MomentProvider::Custom(CustomMoments::new(vec![1.0, 0.0, 1.0]).unwrap());
        assert!(matches!(c.moment(1, 3), Err(Error::MissingCustomMoment(3))));
    }

    #[test]
    fn kinds_parse() {
        assert_eq!(
            "poisson".parse::<ProviderKind>().unwrap(),
            ProviderKind::Poisson
        );
        assert!("cauchy".parse::<ProviderKind>().is_err());
        let w = WeightVector::ones(2).unwrap();
        assert_eq!(ProviderKind::Gaussian.resolve(&w), MomentProvider::Gaussian);
    }
}
