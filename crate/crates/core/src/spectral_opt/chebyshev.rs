//! Chebyshev-accelerated estimation of the extreme nontrivial eigenpair.
//!
//! Work happens on `S = ±P̃` with `P̃ = P̄ − 11ᵀ/N`, restricted to vectors
//! orthogonal to `1`. The map `T = (2S − (μ+ν)I)/(μ−ν)` sends `[ν, μ]` to
//! `[−1, 1]`, and the recurrence `v_k = 2T v_{k−1} − v_{k−2}` grows the
//! components above `μ` like Chebyshev polynomials while damping the rest.
//!
//! For that growth to single out the top eigenvalue, `μ` must sit between
//! the top two eigenvalues of `S`. Without a user-supplied `μ` the estimator
//! restarts the recurrence after blocks of `restart_degree`, then twice that,
//! and so on, raising `μ` each time to the second Ritz value of the block's
//! iterates, which by interlacing never passes the second eigenvalue.

use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use super::{Branch, SpectralEstimate};
use crate::linalg::{dot, norm, remove_mean};
use crate::rng::{self, Domain};
use crate::{oracle, Error, Matrix, Result};

/// How iterates are rescaled between Chebyshev steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Exact global 2-norm.
    #[default]
    Exact,
    /// Each node estimates `‖v‖²/N` by `rounds` steps of averaging with `P̄`
    /// and rescales its own entry by that estimate.
    Gossip { rounds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevConfig {
    /// Upper end of the damped interval. `None` adapts it from Ritz values.
    pub mu: Option<f64>,
    /// Lower end of the damped interval. `None` uses the Gershgorin lower
    /// bound of `±P̄`, `max(−1, min_i(±p̄_ii − Σ_{j≠i} |p̄_ij|))`, per branch.
    pub nu: Option<f64>,
    /// Matrix-vector product budget `K` per branch.
    pub iterations: usize,
    pub normalization: Normalization,
    /// Early stop once `‖Sv − θv‖ ≤ residual_tolerance`.
    pub residual_tolerance: f64,
    /// Largest final change between successive Rayleigh quotients accepted
    /// when the budget runs out before the residual test passes.
    pub tolerance: f64,
    /// Length of the first recurrence block; each later block doubles.
    pub restart_degree: usize,
}

impl Default for ChebyshevConfig {
    fn default() -> Self {
        ChebyshevConfig {
            mu: None,
            nu: None,
            iterations: 200,
            normalization: Normalization::Exact,
            residual_tolerance: 1e-6,
            tolerance: 1e-7,
            restart_degree: 6,
        }
    }
}

impl ChebyshevConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 2 {
            return Err(Error::invalid("iterations", "K must be at least 2"));
        }
        for (name, v) in [("tolerance", self.tolerance), ("residual_tolerance", self.residual_tolerance)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be finite and positive"));
            }
        }
        if self.restart_degree == 0 {
            return Err(Error::invalid("restart_degree", "must be at least 1"));
        }
        if let Normalization::Gossip { rounds: 0 } = self.normalization {
            return Err(Error::invalid("normalization", "gossip needs at least one round"));
        }
        for (name, v) in [("mu", self.mu), ("nu", self.nu)] {
            if v.is_some_and(|x| !x.is_finite()) {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if let (Some(mu), Some(nu)) = (self.mu, self.nu) {
            if mu <= nu {
                return Err(Error::InvalidBounds { mu, nu });
            }
        }
        Ok(())
    }
}

/// `x ↦ sign·P̃x` on the complement of `1`.
struct Operator<'a> {
    p_bar: &'a Matrix,
    sign: f64,
}

impl Operator<'_> {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.p_bar.matvec_into(x, out);
        remove_mean(out);
        if self.sign < 0.0 {
            out.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

struct BranchRun {
    v: Vec<f64>,
    theta: f64,
    iterations: usize,
    change: f64,
    converged: bool,
}

fn residual(v: &[f64], sv: &[f64], theta: f64) -> f64 {
    let r: f64 = v.iter().zip(sv).map(|(a, b)| (b - theta * a) * (b - theta * a)).sum();
    libm::sqrt(r) / norm(v)
}

/// Per-node rescaling factors `1/s_i` for the current iterate.
fn scale_factors(p_bar: &Matrix, v: &[f64], mode: Normalization) -> Vec<f64> {
    let n = v.len();
    let exact = norm(v);
    match mode {
        Normalization::Exact => vec![1.0 / exact; n],
        Normalization::Gossip { rounds } => {
            let mut x: Vec<f64> = v.iter().map(|a| a * a).collect();
            let mut y = vec![0.0; n];
            for _ in 0..rounds {
                p_bar.matvec_into(&x, &mut y);
                core::mem::swap(&mut x, &mut y);
            }
            x.iter()
                .map(|&xi| {
                    let s = libm::sqrt(n as f64 * xi);
                    if s.is_finite() && s > 0.0 {
                        1.0 / s
                    } else {
                        1.0 / exact
                    }
                })
                .collect()
        }
    }
}

/// Orthonormal basis of the iterates seen in one restart block, together
/// with their images under `S`.
#[derive(Default)]
struct RitzBasis {
    q: Vec<Vec<f64>>,
    sq: Vec<Vec<f64>>,
}

impl RitzBasis {
    fn clear(&mut self) {
        self.q.clear();
        self.sq.clear();
    }

    fn push(&mut self, x: &[f64], sx: &[f64]) {
        let mut x = x.to_vec();
        let mut sx = sx.to_vec();
        let scale = norm(&x);
        for _ in 0..2 {
            for (q, sq) in self.q.iter().zip(&self.sq) {
                let c = dot(q, &x);
                for i in 0..x.len() {
                    x[i] -= c * q[i];
                    sx[i] -= c * sq[i];
                }
            }
        }
        let r = norm(&x);
        if !(r > 1e-6 * scale) {
            return;
        }
        x.iter_mut().for_each(|v| *v /= r);
        sx.iter_mut().for_each(|v| *v /= r);
        self.q.push(x);
        self.sq.push(sx);
    }

    /// Top two Ritz values.
    fn ritz_values(&self) -> Option<(f64, f64)> {
        let k = self.q.len();
        if k < 2 {
            return None;
        }
        let h = Matrix::from_fn(k, k, |i, j| {
            0.5 * (dot(&self.q[i], &self.sq[j]) + dot(&self.q[j], &self.sq[i]))
        });
        let eig = oracle::eig_sym(&h).ok()?;
        Some((eig.eigenvalues[0], eig.eigenvalues[1]))
    }
}

fn run_branch(
    p_bar: &Matrix,
    sign: f64,
    nu: f64,
    cfg: &ChebyshevConfig,
    v0: &[f64],
    record: &mut dyn FnMut(f64),
) -> BranchRun {
    let n = v0.len();
    let op = Operator { p_bar, sign };
    let stop = cfg.residual_tolerance;

    let mut v = v0.to_vec();
    let mut sv = vec![0.0; n];
    op.apply(&v, &mut sv);
    let mut count = 1;
    let mut theta = dot(&v, &sv);
    record(theta);
    if residual(&v, &sv, theta) <= stop {
        return BranchRun {
            v,
            theta,
            iterations: count,
            change: 0.0,
            converged: true,
        };
    }

    let adaptive = cfg.mu.is_none();
    let mut mu = cfg.mu.unwrap_or(theta);
    let mut change = f64::INFINITY;

    let mut prev = vec![0.0; n];
    let mut cur = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut s_cur = vec![0.0; n];
    let mut s_prev = vec![0.0; n];

    let mut basis = RitzBasis::default();
    let mut block = cfg.restart_degree;

    while count < cfg.iterations {
        basis.clear();
        basis.push(&v, &sv);
        if mu <= nu {
            mu = nu + 1e-3;
        }
        let c = 0.5 * (mu + nu);
        let e = 0.5 * (mu - nu);

        prev.copy_from_slice(&v);
        for i in 0..n {
            cur[i] = (sv[i] - c * v[i]) / e;
        }
        for _ in 0..block {
            op.apply(&cur, &mut s_cur);
            count += 1;
            for i in 0..n {
                next[i] = 2.0 * (s_cur[i] - c * cur[i]) / e - prev[i];
            }
            let f = scale_factors(p_bar, &cur, cfg.normalization);
            for i in 0..n {
                prev[i] = cur[i] * f[i];
                s_prev[i] = s_cur[i] * f[i];
                cur[i] = next[i] * f[i];
            }
            remove_mean(&mut cur);
            if let Normalization::Gossip { .. } = cfg.normalization {
                // Per-node factors do not commute with S; refresh the image
                // used for monitoring.
                op.apply(&prev, &mut s_prev);
            }
            let t = dot(&prev, &s_prev) / dot(&prev, &prev);
            record(t);
            basis.push(&prev, &s_prev);
            change = (t - theta).abs();
            theta = t;
            if residual(&prev, &s_prev, theta) <= stop {
                let k = 1.0 / norm(&prev);
                prev.iter_mut().for_each(|x| *x *= k);
                return BranchRun {
                    v: prev,
                    theta,
                    iterations: count,
                    change,
                    converged: true,
                };
            }
            if count >= cfg.iterations {
                break;
            }
        }

        // Restart from the last iterate. The second Ritz value of the
        // block never exceeds the second eigenvalue, so it is a safe `μ`.
        // Each restart resets the polynomial, so blocks double in length
        // once `μ` has had a chance to settle.
        block *= 2;
        basis.push(&prev, &s_prev);
        if let (true, Some((hi, lo))) = (adaptive, basis.ritz_values()) {
            mu = mu.max(lo).min(hi - 1e-3 * (hi - nu));
        }
        let k = 1.0 / norm(&prev);
        v = prev.iter().map(|x| x * k).collect();
        sv = s_prev.iter().map(|x| x * k).collect();
    }

    BranchRun {
        v,
        theta,
        iterations: count,
        change,
        converged: false,
    }
}

fn initial_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, Domain::Eigenvector, &[]);
    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    remove_mean(&mut v);
    let r = norm(&v);
    if r > 0.0 {
        v.iter_mut().for_each(|x| *x /= r);
    } else {
        // Only reachable for n = 2 with a degenerate draw.
        v = vec![0.0; n];
        v[0] = core::f64::consts::FRAC_1_SQRT_2;
        v[1] = -core::f64::consts::FRAC_1_SQRT_2;
    }
    v
}

fn check_input(p_bar: &Matrix) -> Result<()> {
    if !p_bar.is_square() {
        return Err(Error::DimensionMismatch {
            expected: p_bar.rows(),
            found: p_bar.cols(),
        });
    }
    if p_bar.rows() < 2 {
        return Err(Error::invalid("p_bar", "need at least two nodes for a nontrivial eigenpair"));
    }
    if !p_bar.all_finite() {
        return Err(Error::invalid("p_bar", "entries must be finite"));
    }
    Ok(())
}

/// Gershgorin lower bound on the spectrum of `sign·P̄`, which contains the
/// nontrivial spectrum of `sign·P̃`; never below −1.
fn default_nu(p_bar: &Matrix, sign: f64) -> f64 {
    let n = p_bar.rows();
    let low = (0..n)
        .map(|i| {
            let radius: f64 = (0..n).filter(|&j| j != i).map(|j| p_bar[(i, j)].abs()).sum();
            sign * p_bar[(i, i)] - radius
        })
        .fold(f64::INFINITY, f64::min);
    low.max(-1.0)
}

fn resolve_nu(p_bar: &Matrix, cfg: &ChebyshevConfig, sign: f64) -> f64 {
    cfg.nu.unwrap_or_else(|| default_nu(p_bar, sign))
}

fn finish(run: BranchRun, branch: Branch, tol: f64) -> Result<SpectralEstimate> {
    if !run.converged && run.change > tol {
        return Err(Error::NonConvergence {
            iterations: run.iterations,
            change: run.change,
        });
    }
    let mut v = run.v;
    remove_mean(&mut v);
    let r = norm(&v);
    v.iter_mut().for_each(|x| *x /= r);
    Ok(SpectralEstimate {
        eigenvector: v,
        eigenvalue: run.theta,
        active_branch: branch,
        iterations_used: run.iterations,
    })
}

/// Estimate the eigenpair attaining `ρ(P̄)`.
///
/// Both ends of the spectrum are run from the same start vector and the
/// branch attaining `max{λ₂, −λ_N}` wins; ties go to `λ₂`. Comparing the
/// signed quotients rather than their magnitudes matters only when every
/// nontrivial eigenvalue is negative and equal, e.g. `N = 2`.
pub fn estimate_dominant_nontrivial(p_bar: &Matrix, cfg: &ChebyshevConfig, seed: u64) -> Result<SpectralEstimate> {
    cfg.validate()?;
    check_input(p_bar)?;
    let v0 = initial_vector(p_bar.rows(), seed);
    let upper = run_branch(p_bar, 1.0, resolve_nu(p_bar, cfg, 1.0), cfg, &v0, &mut |_| {});
    let lower = run_branch(p_bar, -1.0, resolve_nu(p_bar, cfg, -1.0), cfg, &v0, &mut |_| {});
    if lower.theta > upper.theta {
        finish(lower, Branch::LambdaN, cfg.tolerance)
    } else {
        finish(upper, Branch::Lambda2, cfg.tolerance)
    }
}

/// Run one branch only.
pub fn estimate_branch(p_bar: &Matrix, branch: Branch, cfg: &ChebyshevConfig, seed: u64) -> Result<SpectralEstimate> {
    cfg.validate()?;
    check_input(p_bar)?;
    let nu = resolve_nu(p_bar, cfg, branch.sign());
    let v0 = initial_vector(p_bar.rows(), seed);
    let run = run_branch(p_bar, branch.sign(), nu, cfg, &v0, &mut |_| {});
    finish(run, branch, cfg.tolerance)
}

/// Rayleigh quotient after every matrix-vector product of one branch, until
/// convergence or the budget runs out.
pub fn rayleigh_history(p_bar: &Matrix, branch: Branch, cfg: &ChebyshevConfig, seed: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_input(p_bar)?;
    let nu = resolve_nu(p_bar, cfg, branch.sign());
    let v0 = initial_vector(p_bar.rows(), seed);
    let mut history = Vec::new();
    run_branch(p_bar, branch.sign(), nu, cfg, &v0, &mut |t| history.push(t));
    Ok(history)
}

/// Plain power iteration on `P̃` from the same start vector the Chebyshev
/// estimator uses for `seed`; returns the (signed) Rayleigh quotient after
/// each product.
pub fn power_iteration(p_bar: &Matrix, iterations: usize, seed: u64) -> Result<Vec<f64>> {
    check_input(p_bar)?;
    let n = p_bar.rows();
    let op = Operator { p_bar, sign: 1.0 };
    let mut v = initial_vector(n, seed);
    let mut sv = vec![0.0; n];
    let mut history = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        op.apply(&v, &mut sv);
        history.push(dot(&v, &sv));
        let r = norm(&sv);
        if r == 0.0 {
            break;
        }
        for i in 0..n {
            v[i] = sv[i] / r;
        }
    }
    Ok(history)
}
