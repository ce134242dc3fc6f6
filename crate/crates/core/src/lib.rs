//! Discrete multiple stochastic integrals on the Poisson chaos.
//!
//! Homogeneous sums `Q = Σ f(i₁,…,i_q) X_{i₁}⋯X_{i_q}` built on a symmetric
//! kernel `f` vanishing on diagonals are represented through their Poisson
//! embedding `g = Σ f(i₁,…,i_q) g_{i₁}⊗…⊗g_{i_q}` with `g_i = 1_{A_i}/√λ_i`.
//! On top of that representation the crate provides star contractions, the
//! product-formula operator, exact moments (by brute-force expansion and by
//! chaos decomposition), normality diagnostics, seeded Monte Carlo distance
//! estimation and the universality harness.
//!
//! Indices are 1-based everywhere in the public API.

pub mod contract;
pub mod error;
pub mod experiments;
pub mod kernel_file;
pub mod kernels;
pub mod moments;
pub mod montecarlo;
pub mod numfmt;

mod numeric;

pub use contract::{
    contraction_table, gamma_operator, prop41_residuals, star, ContractionTable, InequalityResidual,
};
pub use error::{Error, Result};
pub use experiments::{
    counterexample_family, counterexample_kernel, pair_partition_family, q1_escape_family,
    universality_run, vector_diagnose, KernelFamily, Thresholds, UniversalityReport,
    UniversalityRow, VectorReport,
};
pub use kernel_file::{parse_kernel_file, serialize_kernel_file};
pub use kernels::{embed, GeneralKernel, SymmetricKernel, WeightVector};
pub use moments::{
    central_moment, cross_covariance, diagnose, diagnose_with_budget, fourth_moment_expanded,
    fourth_moment_structured, moment_bruteforce, poisson_central_moment, product_moment_bruteforce,
    product_second_moment_structured, variance_exact, DiagnosticsReport, Method, MomentProvider,
    ProviderKind,
};
pub use montecarlo::{
    distances, eval_sums, normal_cdf, normal_quantile, sample_matrix, simulate, Distances, RngSpec,
    SampleMatrix, SimulationReport,
};
