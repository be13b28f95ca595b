use alloc::vec::Vec;

use super::{estimate_dominant_nontrivial, restore_feasibility, subgradient, surrogate_operator};
use super::{Branch, ChebyshevConfig, SpectralEstimate};
use crate::linalg::{norm, remove_mean};
use crate::linkmodel::LinkStats;
use crate::mixing::AggregationMatrix;
use crate::rng::{self, Domain};
use crate::{oracle, Error, Matrix, Result};

/// Tolerance above 1 at which the optimizer reports divergence.
const DIVERGENCE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Constant step size `γ`.
    pub step_size: f64,
    /// Iteration count `J_max`. Zero returns the starting weights.
    pub max_iterations: usize,
    pub restoration_sweeps: usize,
    /// Stop early once successive oracle `ρ` values differ by less than
    /// this. Zero disables the check.
    pub convergence_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            step_size: 0.1,
            max_iterations: 300,
            restoration_sweeps: 10_000,
            convergence_tol: 0.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::invalid("step_size", "must be finite and positive"));
        }
        if self.restoration_sweeps == 0 {
            return Err(Error::invalid("restoration_sweeps", "must be at least 1"));
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol >= 0.0) {
            return Err(Error::invalid("convergence_tol", "must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Source of the eigenvector driving each subgradient step.
pub trait EigenEstimator {
    fn estimate(&self, p_bar: &Matrix, seed: u64, iteration: usize) -> Result<SpectralEstimate>;
}

/// The decentralized estimator, with a fresh start vector per iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChebyshevEstimator(pub ChebyshevConfig);

impl EigenEstimator for ChebyshevEstimator {
    fn estimate(&self, p_bar: &Matrix, seed: u64, iteration: usize) -> Result<SpectralEstimate> {
        let key = rng::derive_key(seed, Domain::Eigenvector, &[iteration as u64]);
        estimate_dominant_nontrivial(p_bar, &self.0, key)
    }
}

/// Full-knowledge dense eigensolver; drives the centralized baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExactEstimator;

impl EigenEstimator for ExactEstimator {
    fn estimate(&self, p_bar: &Matrix, _seed: u64, _iteration: usize) -> Result<SpectralEstimate> {
        let eig = oracle::eig_sym(p_bar)?;
        let c = eig.consensus_index();
        let n = eig.eigenvalues.len();
        let mut top = None;
        let mut bottom = None;
        for k in (0..n).filter(|&k| k != c) {
            top.get_or_insert(k);
            bottom = Some(k);
        }
        let (Some(top), Some(bottom)) = (top, bottom) else {
            return Err(Error::invalid("p_bar", "need at least two nodes for a nontrivial eigenpair"));
        };
        let lambda2 = eig.eigenvalues[top];
        let lambda_n = eig.eigenvalues[bottom];
        let (k, branch, value) = if -lambda_n > lambda2 {
            (bottom, Branch::LambdaN, -lambda_n)
        } else {
            (top, Branch::Lambda2, lambda2)
        };
        let mut v = eig.eigenvector(k);
        remove_mean(&mut v);
        let r = norm(&v);
        v.iter_mut().for_each(|x| *x /= r);
        Ok(SpectralEstimate {
            eigenvector: v,
            eigenvalue: value,
            active_branch: branch,
            iterations_used: 0,
        })
    }
}

/// One optimizer iterate. Row `n` describes the weights after `n` updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    /// The estimator's `ρ`.
    pub rho_surrogate: f64,
    /// `ρ(P̄)` from the dense eigensolver.
    pub rho_oracle: f64,
    pub active_branch: Branch,
    pub feasibility_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationOutcome {
    /// Iterate with the smallest oracle `ρ`.
    pub best: AggregationMatrix,
    pub best_iteration: usize,
    pub last: AggregationMatrix,
    pub trace: Vec<TraceRow>,
}

impl OptimizationOutcome {
    pub fn best_rho(&self) -> f64 {
        self.trace[self.best_iteration].rho_oracle
    }

    pub fn rho_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.rho_oracle).collect()
    }

    pub fn max_feasibility_residual(&self) -> f64 {
        self.trace.iter().fold(0.0, |m, r| m.max(r.feasibility_residual))
    }
}

/// Subgradient descent on `ρ(P̄(A))` with the given eigenvector source.
pub fn optimize_with<E: EigenEstimator + ?Sized>(
    estimator: &E,
    a0: &AggregationMatrix,
    stats: &LinkStats,
    opt: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationOutcome> {
    opt.validate()?;
    if a0.n() != stats.n() {
        return Err(Error::DimensionMismatch {
            expected: a0.n(),
            found: stats.n(),
        });
    }
    let mut a = a0.clone();
    let mut best = a0.clone();
    let mut best_iteration = 0;
    let mut best_rho = f64::INFINITY;
    let mut trace = Vec::with_capacity(opt.max_iterations + 1);

    for n in 0..=opt.max_iterations {
        let p_bar = surrogate_operator(&a, stats)?;
        let est = estimator.estimate(&p_bar, seed, n)?;
        let rho = oracle::rho_nontrivial(&p_bar)?;
        if rho > 1.0 + DIVERGENCE_SLACK {
            return Err(Error::Divergence(rho));
        }
        trace.push(TraceRow {
            iteration: n,
            rho_surrogate: est.eigenvalue,
            rho_oracle: rho,
            active_branch: est.active_branch,
            feasibility_residual: a.feasibility_residual(),
        });
        if rho < best_rho {
            best_rho = rho;
            best = a.clone();
            best_iteration = n;
        }
        if n == opt.max_iterations {
            break;
        }
        if n > 0 && opt.convergence_tol > 0.0 && (rho - trace[n - 1].rho_oracle).abs() < opt.convergence_tol {
            break;
        }
        let g = subgradient(&a, stats, &est)?;
        let raw = a.as_matrix().add_scaled(&g, -opt.step_size);
        a = restore_feasibility(&raw, opt.restoration_sweeps)?;
    }

    Ok(OptimizationOutcome {
        best,
        best_iteration,
        last: a,
        trace,
    })
}

/// Decentralized optimization driven by the Chebyshev estimator.
pub fn optimize(
    a0: &AggregationMatrix,
    stats: &LinkStats,
    opt: &OptimizerConfig,
    cheb: &ChebyshevConfig,
    seed: u64,
) -> Result<OptimizationOutcome> {
    cheb.validate()?;
    optimize_with(&ChebyshevEstimator(*cheb), a0, stats, opt, seed)
}

/// Centralized proxy: the same descent with exact eigenvectors.
pub fn optimize_centralized(
    a0: &AggregationMatrix,
    stats: &LinkStats,
    opt: &OptimizerConfig,
) -> Result<OptimizationOutcome> {
    optimize_with(&ExactEstimator, a0, stats, opt, 0)
}
