use std::fmt;

use super::bruteforce::{bruteforce_terms, product_moment_bruteforce, DEFAULT_BUDGET};
use super::provider::MomentProvider;
use super::structured::{fourth_moment_expanded, fourth_moment_structured, variance_exact};
use crate::contract::{contraction_table, ContractionTable};
use crate::error::{Error, Result};
use crate::kernels::{SymmetricKernel, WeightVector};

/// Which routes produced the reported fourth moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Bruteforce,
    Structured,
    Both,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Bruteforce => "bruteforce",
            Method::Structured => "structured",
            Method::Both => "both",
        })
    }
}

/// Exact moment diagnostics of a single kernel. Limits along a sequence are
/// the business of the experiments harness.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub q: usize,
    pub n: usize,
    pub provider: String,
    /// `E[Q²]`.
    pub var_exact: f64,
    /// `E[Q⁴]`.
    pub m4_exact: f64,
    /// The brute-force value when it fit within the budget.
    pub m4_bruteforce: Option<f64>,
    /// `E[Q⁴] − 3 E[Q²]²`.
    pub gap: f64,
    /// `Σ f(i)⁴ / λ_i` for `q = 1`.
    pub cond3a: Option<f64>,
    pub contraction_table: ContractionTable,
    pub method: Method,
}

pub fn diagnose(
    f: &SymmetricKernel,
    w: &WeightVector,
    provider: &MomentProvider,
) -> Result<DiagnosticsReport> {
    diagnose_with_budget(f, w, provider, DEFAULT_BUDGET)
}

/// Like [`diagnose`], running the brute-force cross-check only when its
/// expansion has at most `budget` terms. Poisson providers use the chaos
/// decomposition with the provider's own intensities; other laws use the
/// square expansion.
pub fn diagnose_with_budget(
    f: &SymmetricKernel,
    w: &WeightVector,
    provider: &MomentProvider,
    budget: f64,
) -> Result<DiagnosticsReport> {
    let table = contraction_table(f, w)?;
    let var_exact = variance_exact(f);
    let structured = match provider {
        MomentProvider::Poisson(pw) => fourth_moment_structured(f, pw)?,
        other => fourth_moment_expanded(f, other)?,
    };
    let brute = if bruteforce_terms(&[f; 4]) <= budget {
        Some(product_moment_bruteforce(&[f; 4], provider, budget)?)
    } else {
        None
    };
    if let Some(b) = brute {
        let scale = b.abs().max(structured.abs()).max(f64::MIN_POSITIVE);
        if (b - structured).abs() > 1e-9 * scale {
            return Err(Error::OracleMismatch {
                left: structured,
                right: b,
            });
        }
    }
    let method = if brute.is_some() {
        Method::Both
    } else {
        Method::Structured
    };
    Ok(DiagnosticsReport {
        q: f.order(),
        n: f.size(),
        provider: provider.name().to_string(),
        var_exact,
        m4_exact: structured,
        m4_bruteforce: brute,
        gap: structured - 3.0 * var_exact * var_exact,
        cond3a: table.cond3a,
        contraction_table: table,
        method,
    })
}
