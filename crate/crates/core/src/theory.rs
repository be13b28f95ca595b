//! The non-asymptotic convergence bound for decentralized SGD under random
//! mixing, and matrices with a prescribed nontrivial spectral radius.
//!
//! With `ρ = ρ(E[P²])` and learning rate `η < (1 − √ρ)/(6L√N)`,
//!
//! ```text
//! Γ = Nη²L² / ((1 − √ρ)² − 18Nη²L²)
//!
//! (1/T) Σ_t E‖∇𝓛(w̄_t)‖² ≤ 1/(½ − 9Γ) · ( (𝓛₀ − 𝓛*)/(ηT) + ηLσ²/(2N) + σ²Γ + 9δ²Γ )
//! ```

use alloc::format;

use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremInputs {
    /// Smoothness constant `L`.
    pub lipschitz: f64,
    /// Minibatch gradient variance bound `σ²`.
    pub sigma2: f64,
    /// Heterogeneity bound `δ²`.
    pub delta2: f64,
    pub eta: f64,
    pub rounds: usize,
    pub nodes: usize,
    /// `ρ(E[P²])`.
    pub rho_p2: f64,
    /// `𝓛₀ − 𝓛*`.
    pub loss_gap: f64,
}

impl TheoremInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lipschitz", self.lipschitz),
            ("sigma2", self.sigma2),
            ("delta2", self.delta2),
            ("eta", self.eta),
            ("loss_gap", self.loss_gap),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, "must be finite and nonnegative"));
            }
        }
        if !(0.0..1.0).contains(&self.rho_p2) {
            return Err(Error::invalid("rho_p2", "must lie in [0, 1)"));
        }
        if self.nodes == 0 {
            return Err(Error::invalid("nodes", "must be at least 1"));
        }
        Ok(())
    }
}

/// Largest admissible learning rate, `(1 − √ρ)/(6L√N)` (exclusive).
pub fn learning_rate_limit(lipschitz: f64, nodes: usize, rho_p2: f64) -> f64 {
    (1.0 - libm::sqrt(rho_p2)) / (6.0 * lipschitz * libm::sqrt(nodes as f64))
}

fn check_regime(inputs: &TheoremInputs) -> Result<()> {
    let limit = learning_rate_limit(inputs.lipschitz, inputs.nodes, inputs.rho_p2);
    if inputs.eta >= limit {
        return Err(Error::LearningRateRegime(format!(
            "eta = {} must be below (1 - sqrt(rho)) / (6 L sqrt(N)) = {}",
            inputs.eta, limit
        )));
    }
    Ok(())
}

/// `Γ = Nη²L² / ((1 − √ρ)² − 18Nη²L²)`.
pub fn gamma(inputs: &TheoremInputs) -> Result<f64> {
    inputs.validate()?;
    check_regime(inputs)?;
    let s = inputs.nodes as f64 * inputs.eta * inputs.eta * inputs.lipschitz * inputs.lipschitz;
    let gap = 1.0 - libm::sqrt(inputs.rho_p2);
    let denom = gap * gap - 18.0 * s;
    if !(denom > 0.0) {
        return Err(Error::LearningRateRegime(format!(
            "Gamma denominator (1 - sqrt(rho))^2 - 18 N eta^2 L^2 = {denom} is not positive"
        )));
    }
    Ok(s / denom)
}

/// Right-hand side of the averaged squared-gradient bound.
pub fn convergence_bound(inputs: &TheoremInputs) -> Result<f64> {
    let g = gamma(inputs)?;
    if inputs.rounds == 0 {
        return Err(Error::invalid("rounds", "must be at least 1"));
    }
    if !(inputs.eta > 0.0) {
        return Err(Error::invalid("eta", "must be positive for the bound"));
    }
    let pre = 0.5 - 9.0 * g;
    if !(pre > 0.0) {
        return Err(Error::LearningRateRegime(format!("1/2 - 9 Gamma = {pre} is not positive")));
    }
    let n = inputs.nodes as f64;
    let body = inputs.loss_gap / (inputs.eta * inputs.rounds as f64)
        + inputs.eta * inputs.lipschitz * inputs.sigma2 / (2.0 * n)
        + inputs.sigma2 * g
        + 9.0 * inputs.delta2 * g;
    Ok(body / pre)
}

/// `(1 − β)/N · 11ᵀ + β·I`: every nontrivial eigenvalue equals `β`.
pub fn prescribed_rho_matrix(n: usize, beta: f64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::invalid("beta", "must lie in [0, 1)"));
    }
    let off = (1.0 - beta) / n as f64;
    Ok(Matrix::from_fn(n, n, |i, j| if i == j { off + beta } else { off }))
}
