//! Gossip SGD over random links.
//!
//! Each round every node computes a minibatch gradient at its current
//! model, exchanges models over whichever links are up, fuses with the
//! realized mixing matrix and takes the step:
//!
//! ```text
//! W⁽ᵗ⁺¹⁾ = W⁽ᵗ⁾ P⁽ᵗ⁾ − η ∇ℓ⁽ᵗ⁾(W⁽ᵗ⁾)
//! ```
//!
//! `W` is `d × N`, one column per node.

mod task;

pub use task::{QuadraticConstants, QuadraticTask, SoftmaxTask, Task, TaskKind, TaskSpec};

use alloc::vec;
use alloc::vec::Vec;

use crate::linkmodel::{self, LinkMask, LinkStats};
use crate::mixing::{self, AggregationMatrix};
use crate::spectral_opt::{self, ChebyshevConfig, OptimizerConfig};
use crate::{Error, Matrix, Result};

/// Stacked local models and the round counter.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetState {
    /// `d × N`; column `i` is node `i`'s model.
    pub w: Matrix,
    pub round: usize,
}

impl FleetState {
    pub fn new(w: Matrix, round: usize) -> Result<Self> {
        if !w.all_finite() {
            return Err(Error::invalid("w", "model entries must be finite"));
        }
        Ok(FleetState { w, round })
    }

    /// Every node starts from its own `task.initial_model`.
    pub fn initial(task: &Task, seed: u64) -> Self {
        let n = task.nodes();
        let mut w = Matrix::zeros(task.model_dim(), n);
        for i in 0..n {
            w.set_column(i, &task.initial_model(i, seed));
        }
        FleetState { w, round: 0 }
    }

    pub fn nodes(&self) -> usize {
        self.w.cols()
    }

    pub fn model(&self, i: usize) -> Vec<f64> {
        self.w.column(i)
    }

    /// `w̄ = (1/N) Σ_i w_i`.
    pub fn mean_model(&self) -> Vec<f64> {
        let n = self.nodes() as f64;
        (0..self.w.rows()).map(|k| self.w.row(k).iter().sum::<f64>() / n).collect()
    }
}

/// `(1/N) Σ_i ‖w_i − w̄‖²`.
pub fn consensus_error(state: &FleetState) -> f64 {
    let mean = state.mean_model();
    let n = state.nodes();
    let mut total = 0.0;
    for (k, m) in mean.iter().enumerate() {
        for &x in state.w.row(k) {
            total += (x - m) * (x - m);
        }
    }
    total / n as f64
}

/// One protocol round: fuse with `P⁽ᵗ⁾` and step along gradients taken at
/// the pre-fusion models. Minibatches are keyed by `(seed, t, node)`.
pub fn protocol_round(
    state: &FleetState,
    a: &AggregationMatrix,
    mask: &LinkMask,
    task: &Task,
    eta: f64,
    seed: u64,
) -> Result<FleetState> {
    let n = state.nodes();
    let d = state.w.rows();
    if a.n() != n || task.nodes() != n || task.model_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if a.n() != n { a.n() } else { task.nodes() },
        });
    }
    let p = mixing::realize_mixing(a, mask)?.p;
    let mut next = state.w.matmul(&p)?;
    if eta != 0.0 {
        let mut g = vec![0.0; d];
        for i in 0..n {
            let wi = state.model(i);
            task.minibatch_gradient(i, &wi, seed, state.round, &mut g);
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient {
                    node: i,
                    round: state.round,
                });
            }
            for k in 0..d {
                next[(k, i)] -= eta * g[k];
            }
        }
    }
    if !next.all_finite() {
        return Err(Error::NonFiniteGradient {
            node: 0,
            round: state.round,
        });
    }
    Ok(FleetState {
        w: next,
        round: state.round + 1,
    })
}

/// Metropolis–Hastings weights on the graph of links with `q_ij ≥ q_δ`:
/// `a_ij = 1/(1 + max(deg_i, deg_j))`, remainder on the diagonal.
pub fn metropolis_weights(stats: &LinkStats, q_delta: f64) -> Result<AggregationMatrix> {
    if !(q_delta > 0.0 && q_delta < 1.0) {
        return Err(Error::invalid("q_delta", "must lie in (0, 1)"));
    }
    let n = stats.n();
    let adj = stats.threshold_graph(q_delta);
    if n > 1 {
        if let Some(node) = adj.iter().position(Vec::is_empty) {
            return Err(Error::IsolatedNode {
                node,
                threshold: q_delta,
            });
        }
    }
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for &j in &adj[i] {
            a[(i, j)] = 1.0 / (1 + adj[i].len().max(adj[j].len())) as f64;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)]).sum();
        a[(i, i)] = 1.0 - off;
    }
    AggregationMatrix::new(a)
}

/// Aggregation-weight scheme used by a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightsSource {
    /// Decentralized subgradient optimization from uniform weights.
    Optimized,
    /// `A = 11ᵀ/N` regardless of link quality (UWA).
    Uniform,
    /// Uniform weights over links forced to be perfectly reliable (FRLA).
    Ideal,
    /// Metropolis–Hastings weights on links with `q ≥ q_δ` (TB-MH).
    Metropolis { q_delta: f64 },
    /// Centralized full-knowledge subgradient run (proxy for CWO).
    CentralizedProxy,
    /// `(1 − β)/N·11ᵀ + βI` over deterministic links.
    Prescribed { beta: f64 },
}

impl WeightsSource {
    pub fn label(&self) -> &'static str {
        match self {
            WeightsSource::Optimized => "optimized",
            WeightsSource::Uniform => "uwa",
            WeightsSource::Ideal => "frla",
            WeightsSource::Metropolis { .. } => "tb_mh",
            WeightsSource::CentralizedProxy => "cwo_proxy",
            WeightsSource::Prescribed { .. } => "prescribed",
        }
    }

    /// Whether this scheme runs over links that never fail.
    pub fn forces_ideal_links(&self) -> bool {
        matches!(self, WeightsSource::Ideal | WeightsSource::Prescribed { .. })
    }

    /// The link statistics the scheme actually experiences.
    pub fn effective_stats(&self, stats: &LinkStats) -> Result<LinkStats> {
        if self.forces_ideal_links() {
            LinkStats::uniform(stats.n(), 1.0)
        } else {
            Ok(stats.clone())
        }
    }

    /// Build the aggregation matrix for this scheme.
    pub fn weights(
        &self,
        stats: &LinkStats,
        opt: &OptimizerConfig,
        cheb: &ChebyshevConfig,
        seed: u64,
    ) -> Result<AggregationMatrix> {
        let n = stats.n();
        match *self {
            WeightsSource::Uniform | WeightsSource::Ideal => Ok(AggregationMatrix::uniform(n)),
            WeightsSource::Metropolis { q_delta } => metropolis_weights(stats, q_delta),
            WeightsSource::Optimized => {
                Ok(spectral_opt::optimize(&AggregationMatrix::uniform(n), stats, opt, cheb, seed)?.best)
            }
            WeightsSource::CentralizedProxy => {
                Ok(spectral_opt::optimize_centralized(&AggregationMatrix::uniform(n), stats, opt)?.best)
            }
            WeightsSource::Prescribed { beta } => {
                AggregationMatrix::new(crate::theory::prescribed_rho_matrix(n, beta)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub learning_rate: f64,
    pub rounds: usize,
    pub weights_source: WeightsSource,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid("learning_rate", "must be finite and positive"));
        }
        if let WeightsSource::Metropolis { q_delta } = self.weights_source {
            if !(q_delta > 0.0 && q_delta < 1.0) {
                return Err(Error::invalid("q_delta", "must lie in (0, 1)"));
            }
        }
        if let WeightsSource::Prescribed { beta } = self.weights_source {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::invalid("beta", "must lie in [0, 1)"));
            }
        }
        Ok(())
    }
}

/// Metrics after `round` protocol rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundMetrics {
    pub round: usize,
    /// `𝓛(w̄)`.
    pub avg_loss: f64,
    /// Mean over nodes of each local model's test accuracy.
    pub avg_acc: Option<f64>,
    /// Worst node's test accuracy.
    pub min_acc: Option<f64>,
    pub consensus_error: f64,
    /// `‖∇𝓛(w̄)‖`.
    pub grad_norm_at_mean: f64,
}

pub fn measure(state: &FleetState, task: &Task) -> RoundMetrics {
    let mean = state.mean_model();
    let grad = task.global_gradient(&mean);
    let (avg_acc, min_acc) = match task {
        Task::Quadratic(_) => (None, None),
        Task::Softmax(_) => {
            let accs: Vec<f64> = (0..state.nodes())
                .filter_map(|i| task.accuracy(&state.model(i)))
                .collect();
            let avg = accs.iter().sum::<f64>() / accs.len() as f64;
            let min = accs.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            (Some(avg), Some(min))
        }
    };
    RoundMetrics {
        round: state.round,
        avg_loss: task.global_loss(&mean),
        avg_acc,
        min_acc,
        consensus_error: consensus_error(state),
        grad_norm_at_mean: crate::linalg::norm(&grad),
    }
}

/// Run `cfg.rounds` rounds and record metrics before the first round and
/// after every round. Link masks come from `(cfg.seed, t)`, so schemes that
/// share a seed see the same link randomness.
pub fn run_experiment(
    cfg: &ProtocolConfig,
    task: &Task,
    stats: &LinkStats,
    a: &AggregationMatrix,
) -> Result<Vec<RoundMetrics>> {
    cfg.validate()?;
    if stats.n() != task.nodes() {
        return Err(Error::DimensionMismatch {
            expected: task.nodes(),
            found: stats.n(),
        });
    }
    let links = cfg.weights_source.effective_stats(stats)?;
    let mut state = FleetState::initial(task, cfg.seed);
    let mut trace = Vec::with_capacity(cfg.rounds + 1);
    trace.push(measure(&state, task));
    for t in 0..cfg.rounds {
        let mask = linkmodel::sample_mask(&links, cfg.seed, t);
        state = protocol_round(&state, a, &mask, task, cfg.learning_rate, cfg.seed)?;
        trace.push(measure(&state, task));
    }
    Ok(trace)
}
