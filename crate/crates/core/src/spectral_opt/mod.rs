//! Spectral optimization of the aggregation weights.
//!
//! The objective is the nontrivial spectral radius of the expected mixing
//! matrix, `ρ(P̄(A)) = max{λ₂, −λ_N}`. `P̄` is linear in `A`:
//!
//! ```text
//! R(A) = I + ½ Σ_{i≠j} a_ij E_ij,   E_ij = q_ij (e_i e_jᵀ + e_j e_iᵀ − e_i e_iᵀ − e_j e_jᵀ)
//! ```
//!
//! so at a simple extreme eigenvalue with unit eigenvector `v` the gradient
//! with respect to `a_ij` is `∓½ q_ij (v_i − v_j)²`. The driver alternates a
//! Chebyshev eigenvector estimate, a subgradient step and a local
//! restoration back to symmetric doubly stochastic weights.

mod chebyshev;
mod optimizer;
mod restore;

pub use chebyshev::{
    estimate_branch, estimate_dominant_nontrivial, power_iteration, rayleigh_history, ChebyshevConfig,
    Normalization,
};
pub use optimizer::{
    optimize, optimize_centralized, optimize_with, ChebyshevEstimator, EigenEstimator, ExactEstimator,
    OptimizationOutcome, OptimizerConfig, TraceRow,
};
pub use restore::restore_feasibility;

use alloc::vec::Vec;

use crate::linkmodel::LinkStats;
use crate::mixing::AggregationMatrix;
use crate::{Error, Matrix, Result};

/// Which end of the nontrivial spectrum attains `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// Second-largest eigenvalue `λ₂`.
    #[default]
    Lambda2,
    /// Smallest eigenvalue `λ_N`, attained with `ρ = −λ_N`.
    LambdaN,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Lambda2 => "lambda2",
            Branch::LambdaN => "lambdaN",
        }
    }

    /// `+1` on `λ₂`, `−1` on `λ_N`: the sign turning `P̃` into the operator
    /// whose top eigenvalue is `ρ`.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Lambda2 => 1.0,
            Branch::LambdaN => -1.0,
        }
    }
}

/// Estimated extreme nontrivial eigenpair of `P̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    /// Unit vector orthogonal to the all-ones direction.
    pub eigenvector: Vec<f64>,
    /// Rayleigh quotient of `±P̃` on the active branch, i.e. the estimate of
    /// `ρ`. The signed eigenvalue of `P̄` is [`SpectralEstimate::signed_eigenvalue`].
    pub eigenvalue: f64,
    pub active_branch: Branch,
    /// Matrix-vector products spent on the active branch.
    pub iterations_used: usize,
}

impl SpectralEstimate {
    /// `λ₂` or `λ_N` itself.
    pub fn signed_eigenvalue(&self) -> f64 {
        self.active_branch.sign() * self.eigenvalue
    }
}

/// `R(A) = I + ½ Σ_{i≠j} a_ij E_ij`, accumulated one `E_ij` at a time.
pub fn surrogate_operator(a: &AggregationMatrix, stats: &LinkStats) -> Result<Matrix> {
    let n = stats.n();
    if a.n() != n {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: n,
        });
    }
    let mut r = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let c = 0.5 * a.get(i, j) * stats.get(i, j);
            if c == 0.0 {
                continue;
            }
            r[(i, j)] += c;
            r[(j, i)] += c;
            r[(i, i)] -= c;
            r[(j, j)] -= c;
        }
    }
    Ok(r)
}

/// Subgradient of `ρ(R(A))` with respect to the entries of `A`:
/// `g_ij = ∓½ q_ij (v_i − v_j)²`, negative on `λ₂`, positive on `λ_N`.
pub fn subgradient(a: &AggregationMatrix, stats: &LinkStats, est: &SpectralEstimate) -> Result<Matrix> {
    let n = stats.n();
    if a.n() != n || est.eigenvector.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if a.n() != n { a.n() } else { est.eigenvector.len() },
        });
    }
    let v = &est.eigenvector;
    let s = -0.5 * est.active_branch.sign();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = v[i] - v[j];
            let gij = s * stats.get(i, j) * d * d;
            g[(i, j)] = gij;
            g[(j, i)] = gij;
        }
    }
    Ok(g)
}
