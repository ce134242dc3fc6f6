use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::rng::RngSpec;
use crate::error::{Error, Result};
use crate::kernels::SymmetricKernel;
use crate::moments::MomentProvider;
use crate::numeric::factorial;

/// Above this intensity Poisson counts come from a rejection sampler.
const INVERSION_LIMIT: f64 = 30.0;

/// Row-major `rows × cols` matrix of coordinate draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    pub fn column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |j| self.data[j * self.cols + i])
    }
}

enum Coordinate {
    Gaussian,
    Rademacher,
    SmallPoisson { lambda: f64, p0: f64 },
    LargePoisson { lambda: f64, dist: Poisson<f64> },
}

impl Coordinate {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Coordinate::Gaussian => rng.sample(StandardNormal),
            Coordinate::Rademacher => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
            Coordinate::SmallPoisson { lambda, p0 } => {
                let count = poisson_inversion(rng, *lambda, *p0);
                (count - lambda) / lambda.sqrt()
            }
            Coordinate::LargePoisson { lambda, dist } => {
                let count = dist.sample(rng);
                (count - lambda) / lambda.sqrt()
            }
        }
    }
}

/// Sequential-search inversion of the Poisson distribution function.
fn poisson_inversion(rng: &mut ChaCha8Rng, lambda: f64, p0: f64) -> f64 {
    let u: f64 = rng.random();
    let (mut k, mut p, mut cdf) = (0u32, p0, p0);
    while u > cdf && k < 1_000 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k as f64
}

/// Per-column samplers for the first `cols` coordinates.
pub(crate) struct RowSampler {
    coords: Vec<Coordinate>,
}

impl RowSampler {
    pub(crate) fn new(provider: &MomentProvider, cols: usize) -> Result<Self> {
        let coords = match provider {
            MomentProvider::Gaussian => (0..cols).map(|_| Coordinate::Gaussian).collect(),
            MomentProvider::Rademacher => (0..cols).map(|_| Coordinate::Rademacher).collect(),
            MomentProvider::Poisson(w) => {
                w.check_covers(cols)?;
                w.as_slice()[..cols]
                    .iter()
                    .map(|&lambda| {
                        if lambda <= INVERSION_LIMIT {
                            Ok(Coordinate::SmallPoisson {
                                lambda,
                                p0: (-lambda).exp(),
                            })
                        } else {
                            let dist =
                                Poisson::new(lambda).map_err(|_| Error::DomainError(lambda))?;
                            Ok(Coordinate::LargePoisson { lambda, dist })
                        }
                    })
                    .collect::<Result<_>>()?
            }
            MomentProvider::Custom(_) => {
                return Err(Error::UnsupportedSampler(provider.name().to_string()))
            }
        };
        Ok(Self { coords })
    }

    pub(crate) fn fill(&self, rng: &mut ChaCha8Rng, row: &mut [f64]) {
        for (x, c) in row.iter_mut().zip(&self.coords) {
            *x = c.draw(rng);
        }
    }

    pub(crate) fn cols(&self) -> usize {
        self.coords.len()
    }
}

/// Draws `rows` independent copies of `(X_1, …, X_cols)`.
pub fn sample_matrix(
    provider: &MomentProvider,
    cols: usize,
    rows: usize,
    spec: &RngSpec,
) -> Result<SampleMatrix> {
    if rows == 0 {
        return Err(Error::InsufficientSamples(0));
    }
    let sampler = RowSampler::new(provider, cols)?;
    let draws = spec.map_rows(
        rows,
        || (),
        |rng, _, _| {
            let mut row = vec![0.0; cols];
            sampler.fill(rng, &mut row);
            row
        },
    );
    Ok(SampleMatrix {
        rows,
        cols,
        data: draws.concat(),
    })
}

/// `q! Σ_{increasing t} f(t) ∏_{i∈t} row[i]` for one row of draws.
pub fn eval_row(f: &SymmetricKernel, row: &[f64]) -> f64 {
    let sum: f64 = f
        .iter()
        .map(|(t, c)| c * t.iter().map(|&i| row[i as usize - 1]).product::<f64>())
        .sum();
    factorial(f.order()) * sum
}

/// Evaluates the homogeneous sum on every row.
pub fn eval_sums(f: &SymmetricKernel, samples: &SampleMatrix) -> Result<Vec<f64>> {
    if samples.cols < f.size() {
        return Err(Error::WidthMismatch {
            width: samples.cols,
            size: f.size(),
        });
    }
    Ok((0..samples.rows)
        .map(|j| eval_row(f, samples.row(j)))
        .collect())
}
