//! Link success probabilities from constellation geometry, and the random
//! link masks they drive.
//!
//! Nodes sit on one circular orbit. For each pair the success probability is
//!
//! ```text
//! q_ij = 1 − max{ α_d·d_ij/d_max, α_θ·θ_ij/θ_max, w_ij }   clamped to [0, 1]
//! ```
//!
//! with `d_ij` the great-circle arc between the nodes, `θ_ij` the angle
//! between their orbital tangent vectors (degrees) and `w_ij` an
//! environment interference level. Each round, every unordered pair is up
//! with probability `q_ij`, independently of all other pairs.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::rng::{self, Domain};
use crate::{Error, Matrix, Result};

/// Physical and weighting parameters of the link-success law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub alpha_d: f64,
    pub alpha_theta: f64,
    /// Uniform interference level `w_ij` applied to every pair.
    pub interference: f64,
    pub d_max_km: f64,
    pub theta_max_deg: f64,
    pub orbit_radius_km: f64,
}

impl LinkParams {
    pub const D_MAX_KM: f64 = 3000.0;
    pub const THETA_MAX_DEG: f64 = 60.0;
    /// Orbit radius at which the Set A/B/C comparison ranks A > C > B; see README.
    pub const DEFAULT_ORBIT_RADIUS_KM: f64 = 2500.0;
}

impl Default for LinkParams {
    fn default() -> Self {
        ParameterSet::Default.params()
    }
}

/// Named parameter settings for the link-success law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterSet {
    /// `α_d = 0.7, α_θ = 0.8, w = 0.05`.
    Default,
    /// `α_d = 0.5, α_θ = 0.7, w = 0.05`; the most reliable links.
    A,
    /// `α_d = 0.7, α_θ = 0.9, w = 0.05`; strongest geometric sensitivity.
    B,
    /// `α_d = 0.9, α_θ = 0.5, w = 0.10`.
    C,
}

impl ParameterSet {
    pub fn params(self) -> LinkParams {
        let (alpha_d, alpha_theta, interference) = match self {
            ParameterSet::Default => (0.7, 0.8, 0.05),
            ParameterSet::A => (0.5, 0.7, 0.05),
            ParameterSet::B => (0.7, 0.9, 0.05),
            ParameterSet::C => (0.9, 0.5, 0.10),
        };
        LinkParams {
            alpha_d,
            alpha_theta,
            interference,
            d_max_km: LinkParams::D_MAX_KM,
            theta_max_deg: LinkParams::THETA_MAX_DEG,
            orbit_radius_km: LinkParams::DEFAULT_ORBIT_RADIUS_KM,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParameterSet::Default => "default",
            ParameterSet::A => "A",
            ParameterSet::B => "B",
            ParameterSet::C => "C",
        }
    }
}

/// How node angles are laid out on the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    /// `φ_i = 2πi/N`.
    #[default]
    Uniform,
    /// Independent `Unif[0, 2π)` angles, fixed per seed.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationConfig {
    pub node_count: usize,
    pub orbit_radius_km: f64,
    /// Angular position of each node on the orbit, radians.
    pub node_angles: Vec<f64>,
    pub d_max_km: f64,
    pub theta_max_deg: f64,
    pub alpha_d: f64,
    pub alpha_theta: f64,
    /// Symmetric, zero-diagonal, entries in `[0, 1]`.
    pub interference: Matrix,
}

impl ConstellationConfig {
    /// Lay out `node_count` nodes and apply `params` to every pair.
    ///
    /// `seed` only matters for [`Placement::Random`].
    pub fn new(params: &LinkParams, node_count: usize, placement: Placement, seed: u64) -> Self {
        let node_angles = match placement {
            Placement::Uniform => (0..node_count)
                .map(|i| 2.0 * PI * i as f64 / node_count as f64)
                .collect(),
            Placement::Random => {
                let mut rng = rng::stream(seed, Domain::Placement, &[]);
                (0..node_count).map(|_| rng.random::<f64>() * 2.0 * PI).collect()
            }
        };
        let interference = Matrix::from_fn(node_count, node_count, |i, j| {
            if i == j {
                0.0
            } else {
                params.interference
            }
        });
        ConstellationConfig {
            node_count,
            orbit_radius_km: params.orbit_radius_km,
            node_angles,
            d_max_km: params.d_max_km,
            theta_max_deg: params.theta_max_deg,
            alpha_d: params.alpha_d,
            alpha_theta: params.alpha_theta,
            interference,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.node_count;
        if n < 2 {
            return Err(Error::invalid("node_count", "at least two nodes are required"));
        }
        if self.node_angles.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.node_angles.len(),
            });
        }
        if self.node_angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("node_angles", "angles must be finite"));
        }
        if !(self.orbit_radius_km.is_finite() && self.orbit_radius_km >= 0.0) {
            return Err(Error::invalid("orbit_radius_km", "must be finite and non-negative"));
        }
        if !(self.d_max_km.is_finite() && self.d_max_km > 0.0) {
            return Err(Error::invalid("d_max_km", "must be finite and positive"));
        }
        if !(self.theta_max_deg.is_finite() && self.theta_max_deg > 0.0) {
            return Err(Error::invalid("theta_max_deg", "must be finite and positive"));
        }
        if !(self.alpha_d.is_finite() && self.alpha_d >= 0.0) {
            return Err(Error::invalid("alpha_d", "must be finite and non-negative"));
        }
        if !(self.alpha_theta.is_finite() && self.alpha_theta >= 0.0) {
            return Err(Error::invalid("alpha_theta", "must be finite and non-negative"));
        }
        self.interference.ensure_square(n)?;
        for i in 0..n {
            if self.interference[(i, i)] != 0.0 {
                return Err(Error::invalid("interference", "diagonal must be zero"));
            }
            for j in 0..n {
                let w = self.interference[(i, j)];
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::invalid("interference", "entries must lie in [0, 1]"));
                }
                if w != self.interference[(j, i)] {
                    return Err(Error::invalid("interference", "matrix must be symmetric"));
                }
            }
        }
        Ok(())
    }

    fn position(&self, i: usize) -> (f64, f64) {
        let a = self.node_angles[i];
        (libm::cos(a), libm::sin(a))
    }

    fn tangent(&self, i: usize) -> (f64, f64) {
        let a = self.node_angles[i];
        (-libm::sin(a), libm::cos(a))
    }

    /// Central angle between two nodes, in `[0, π]`.
    pub fn central_angle(&self, i: usize, j: usize) -> f64 {
        angle_between(self.position(i), self.position(j))
    }

    /// Great-circle arc length between two nodes on the orbit, km.
    pub fn arc_distance_km(&self, i: usize, j: usize) -> f64 {
        self.orbit_radius_km * self.central_angle(i, j)
    }

    /// Angle between the orbital tangent vectors of two nodes, degrees in
    /// `[0, 180]`.
    pub fn pointing_deviation_deg(&self, i: usize, j: usize) -> f64 {
        angle_between(self.tangent(i), self.tangent(j)).to_degrees().clamp(0.0, 180.0)
    }
}

fn angle_between(a: (f64, f64), b: (f64, f64)) -> f64 {
    let cross = a.0 * b.1 - a.1 * b.0;
    let dot = a.0 * b.0 + a.1 * b.1;
    libm::atan2(cross.abs(), dot)
}

/// Per-pair link success probabilities.
///
/// Invariants: square, entries in `[0, 1]`, exactly symmetric, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStats {
    q: Matrix,
}

impl LinkStats {
    pub fn new(q: Matrix) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::DimensionMismatch {
                expected: q.rows(),
                found: q.cols(),
            });
        }
        let n = q.rows();
        for i in 0..n {
            if q[(i, i)] != 0.0 {
                return Err(Error::invalid("q", "diagonal must be zero"));
            }
            for j in 0..n {
                let v = q[(i, j)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid("q", "probabilities must lie in [0, 1]"));
                }
                if v != q[(j, i)] {
                    return Err(Error::NotSymmetric((v - q[(j, i)]).abs()));
                }
            }
        }
        Ok(LinkStats { q })
    }

    /// Every off-diagonal pair succeeds with probability `p`.
    pub fn uniform(n: usize, p: f64) -> Result<Self> {
        Self::new(Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { p }))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.q.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[(i, j)]
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.q
    }

    /// Upper-triangle pairs `(i, j, q_ij)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.q[(i, j)])))
    }

    /// Pairs whose state is actually random, i.e. `0 < q_ij < 1`.
    pub fn stochastic_pairs(&self) -> Vec<(usize, usize, f64)> {
        self.pairs().filter(|&(_, _, q)| q > 0.0 && q < 1.0).collect()
    }

    /// Adjacency of the graph keeping only pairs with `q_ij >= threshold`.
    pub fn threshold_graph(&self, threshold: f64) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut adj = vec![Vec::new(); n];
        for (i, j, q) in self.pairs() {
            if q >= threshold {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        adj
    }
}

/// Evaluate the link-success law for every pair.
pub fn compute_link_stats(cfg: &ConstellationConfig) -> Result<LinkStats> {
    cfg.validate()?;
    let n = cfg.node_count;
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = cfg.arc_distance_km(i, j);
            let theta = cfg.pointing_deviation_deg(i, j);
            let loss = (cfg.alpha_d * d / cfg.d_max_km)
                .max(cfg.alpha_theta * theta / cfg.theta_max_deg)
                .max(cfg.interference[(i, j)]);
            if !loss.is_finite() {
                return Err(Error::invalid("constellation", "geometry produced a non-finite link term"));
            }
            let p = (1.0 - loss).clamp(0.0, 1.0);
            q[(i, j)] = p;
            q[(j, i)] = p;
        }
    }
    LinkStats::new(q)
}

/// One round's link availability `M^(t)`: symmetric, binary, zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkMask {
    n: usize,
    up: Vec<bool>,
    pub round: usize,
}

impl LinkMask {
    /// Build from a predicate evaluated on `i < j` only and mirrored.
    pub fn from_fn(n: usize, round: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut up = vec![false; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let b = f(i, j);
                up[i * n + j] = b;
                up[j * n + i] = b;
            }
        }
        LinkMask { n, up, round }
    }

    /// Every link up.
    pub fn full(n: usize, round: usize) -> Self {
        Self::from_fn(n, round, |_, _| true)
    }

    /// Every link down.
    pub fn empty(n: usize, round: usize) -> Self {
        Self::from_fn(n, round, |_, _| false)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_up(&self, i: usize, j: usize) -> bool {
        self.up[i * self.n + j]
    }

    /// `m_ij` as 0.0 / 1.0.
    #[inline]
    pub fn indicator(&self, i: usize, j: usize) -> f64 {
        if self.is_up(i, j) {
            1.0
        } else {
            0.0
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| self.indicator(i, j))
    }
}

/// Draw round `t`'s mask: one Bernoulli(`q_ij`) per unordered pair, in
/// row-major upper-triangle order, from the stream keyed by `(seed, t)`.
///
/// One uniform is consumed per pair whatever `q_ij` is, so two schemes that
/// share a seed see the same randomness.
pub fn sample_mask(stats: &LinkStats, seed: u64, t: usize) -> LinkMask {
    let mut rng = rng::stream(seed, Domain::LinkMask, &[t as u64]);
    LinkMask::from_fn(stats.n(), t, |i, j| rng.random::<f64>() < stats.get(i, j))
}

/// Fraction of upper-triangle pairs with `q_ij <= x`, for each `x` in `grid`.
pub fn empirical_cdf(stats: &LinkStats, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must not be empty"));
    }
    if grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::invalid("grid", "values must lie in [0, 1]"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("grid", "must be sorted ascending"));
    }
    let mut values: Vec<f64> = stats.pairs().map(|(_, _, q)| q).collect();
    if values.is_empty() {
        return Err(Error::invalid("stats", "need at least two nodes for a distribution"));
    }
    values.sort_by(f64::total_cmp);
    let total = values.len() as f64;
    let mut below = 0usize;
    Ok(grid
        .iter()
        .map(|&x| {
            while below < values.len() && values[below] <= x {
                below += 1;
            }
            (x, below as f64 / total)
        })
        .collect())
}
