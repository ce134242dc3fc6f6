//! Exact moments of homogeneous sums.
//!
//! Three independent routes to `E[Q⁴]` live here:
//!
//! * [`moment_bruteforce`] expands `Q^m` over `m`-fold support tuples and
//!   factorizes each expectation by independence. It is the ground truth.
//! * [`fourth_moment_structured`] uses the chaos decomposition of `I_q(g)²`
//!   and is specific to the normalized Poisson coordinates.
//! * [`fourth_moment_expanded`] squares `Q` symbolically, rewrites
//!   `X_i² = 1 + (X_i² − 1)` and pairs orthogonal monomials, which works for
//!   any provider and scales to large supports.

mod bruteforce;
mod diagnose;
mod provider;
mod structured;

pub use bruteforce::{
    bruteforce_terms, moment_bruteforce, product_moment_bruteforce, DEFAULT_BUDGET,
};
pub use diagnose::{diagnose, diagnose_with_budget, DiagnosticsReport, Method};
pub use provider::{
    central_moment, poisson_central_moment, CustomMoments, MomentProvider, ProviderKind,
    MAX_MOMENT_ORDER,
};
pub use structured::{
    chaos_fourth_moment_terms, cross_covariance, fourth_moment_expanded, fourth_moment_structured,
    product_second_moment_structured, variance_exact,
};
