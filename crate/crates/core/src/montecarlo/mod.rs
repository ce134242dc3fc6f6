//! Seeded sampling of coordinate sequences and distance-to-normal estimation.

mod distance;
mod normal;
mod rng;
mod sample;
mod simulate;

pub use distance::{distances, kolmogorov_smirnov, wasserstein1, Distances};
pub use normal::{normal_cdf, normal_pdf, normal_quantile};
pub use rng::{stream_rng, RngSpec};
pub use sample::{eval_row, eval_sums, sample_matrix, SampleMatrix};
pub use simulate::{simulate, SimulationReport};
