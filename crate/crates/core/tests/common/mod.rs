#![allow(dead_code)]

use dmix_core::linkmodel::LinkStats;
use dmix_core::mixing::AggregationMatrix;
use dmix_core::{oracle, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Feasible weights built directly: random sparse symmetric off-diagonal
/// mass, scaled so every row sum stays below one, then the diagonal fills up.
pub fn random_weights(n: usize, rng: &mut ChaCha8Rng) -> AggregationMatrix {
    let density: f64 = rng.random_range(0.3..1.0);
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                let x: f64 = rng.random();
                w[(i, j)] = x;
                w[(j, i)] = x;
            }
        }
    }
    let max_row = w.row_sums().into_iter().fold(0.0, f64::max);
    let scale = if max_row > 0.0 { 1.0 / (max_row * rng.random_range(1.0..1.5)) } else { 0.0 };
    let mut a = w.scaled(scale);
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)]).sum();
        a[(i, i)] = 1.0 - off;
    }
    AggregationMatrix::new(a).unwrap()
}

/// Link probabilities mixing dead, perfect and random links; at most
/// `max_stochastic` links get a probability strictly inside (0, 1).
pub fn random_stats(n: usize, max_stochastic: usize, rng: &mut ChaCha8Rng) -> LinkStats {
    let mut q = Matrix::zeros(n, n);
    let mut stochastic = 0;
    for i in 0..n {
        for j in i + 1..n {
            let u: f64 = rng.random();
            let v = if u < 0.2 {
                0.0
            } else if u < 0.4 || stochastic >= max_stochastic {
                1.0
            } else {
                stochastic += 1;
                rng.random_range(0.05..0.95)
            };
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    LinkStats::new(q).unwrap()
}

pub fn dense_random_stats(n: usize, rng: &mut ChaCha8Rng) -> LinkStats {
    random_stats(n, usize::MAX, rng)
}

/// Random connected symmetric doubly stochastic matrix `I − L/c` from a
/// weighted Erdős–Rényi graph, or `None` if the draw is disconnected.
pub fn random_doubly_stochastic(n: usize, seed: u64) -> Option<Matrix> {
    let mut r = rng(seed);
    let p: f64 = r.random_range(0.1..0.5);
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if r.random::<f64>() < p {
                let x: f64 = r.random();
                w[(i, j)] = x;
                w[(j, i)] = x;
            }
        }
    }
    let deg = w.row_sums();
    let c = deg.iter().cloned().fold(0.0, f64::max) * r.random_range(1.0..2.0) + 1e-3;
    let m = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 - deg[i] / c } else { w[(i, j)] / c });
    (oracle::rho_nontrivial(&m).unwrap() < 1.0 - 1e-6).then_some(m)
}

/// Nontrivial eigenvalues sorted by decreasing magnitude.
pub fn nontrivial_by_magnitude(m: &Matrix) -> Vec<f64> {
    let e = oracle::eig_sym(m).unwrap();
    let c = e.consensus_index();
    let mut v: Vec<f64> = e
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != c)
        .map(|(_, x)| *x)
        .collect();
    v.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    v
}
