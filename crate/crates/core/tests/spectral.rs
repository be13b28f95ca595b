mod common;

use common::*;
use dmix_core::linkmodel::*;
use dmix_core::mixing::*;
use dmix_core::spectral_opt::*;
use dmix_core::{oracle, theory, Error, Matrix};
use rand::Rng;

#[test]
fn surrogate_equals_expected_mixing() {
    let mut r = rng(10);
    for k in 0..100 {
        let n = [4, 8, 22][k % 3];
        let a = random_weights(n, &mut r);
        let stats = dense_random_stats(n, &mut r);
        let s = surrogate_operator(&a, &stats).unwrap();
        assert!(s.max_abs_diff(&expected_mixing(&a, &stats).unwrap()) < 1e-12);
    }
}

#[test]
fn surrogate_trivial_cases() {
    let stats = LinkStats::uniform(4, 0.7).unwrap();
    assert_eq!(surrogate_operator(&AggregationMatrix::identity(4), &stats).unwrap(), Matrix::identity(4));
    let mut a = Matrix::identity(3);
    a[(0, 0)] = 0.0;
    a[(1, 1)] = 0.0;
    a[(0, 1)] = 1.0;
    a[(1, 0)] = 1.0;
    let mut q = Matrix::zeros(3, 3);
    q[(0, 1)] = 1.0;
    q[(1, 0)] = 1.0;
    let r = surrogate_operator(&AggregationMatrix::new(a.clone()).unwrap(), &LinkStats::new(q).unwrap()).unwrap();
    assert_eq!(r, a);
}

#[test]
fn estimate_matches_dense_oracle() {
    let mut done = 0;
    for seed in 0.. {
        let Some(p) = random_doubly_stochastic(10, seed) else { continue };
        let spectrum = nontrivial_by_magnitude(&p);
        if spectrum[0].abs() - spectrum[1].abs() < 1e-3 {
            continue;
        }
        let est = estimate_dominant_nontrivial(&p, &ChebyshevConfig::default(), seed).unwrap();
        let eig = oracle::eig_sym(&p).unwrap();
        let k = (0..10)
            .filter(|&k| k != eig.consensus_index())
            .max_by(|&a, &b| eig.eigenvalues[a].abs().partial_cmp(&eig.eigenvalues[b].abs()).unwrap())
            .unwrap();
        let cos: f64 = eig.eigenvector(k).iter().zip(&est.eigenvector).map(|(a, b)| a * b).sum();
        assert!(cos.abs() >= 0.999, "seed {seed}: |cos| = {}", cos.abs());
        assert!((est.signed_eigenvalue() - eig.eigenvalues[k]).abs() < 1e-6);
        done += 1;
        if done == 20 {
            break;
        }
    }
}

#[test]
fn estimate_on_prescribed_and_averaging() {
    let p = theory::prescribed_rho_matrix(22, 0.46).unwrap();
    let est = estimate_dominant_nontrivial(&p, &ChebyshevConfig::default(), 0).unwrap();
    assert!((est.eigenvalue - 0.46).abs() < 1e-9);
    let est = estimate_dominant_nontrivial(&Matrix::averaging(22), &ChebyshevConfig::default(), 0).unwrap();
    assert!(est.eigenvalue.abs() < 1e-9);
}

#[test]
fn estimator_outpaces_power_iteration_at_small_gaps() {
    let cfg = ChebyshevConfig {
        iterations: 5000,
        ..ChebyshevConfig::default()
    };
    let mut tried = 0;
    for seed in 0.. {
        let Some(p) = random_doubly_stochastic(22, seed) else { continue };
        let spectrum = nontrivial_by_magnitude(&p);
        if spectrum[0].abs() - spectrum[1].abs() > 0.02 {
            continue;
        }
        let target = spectrum[0];
        let branch = if target >= 0.0 { Branch::Lambda2 } else { Branch::LambdaN };
        let cheb: Vec<f64> = rayleigh_history(&p, branch, &cfg, seed)
            .unwrap()
            .iter()
            .map(|x| branch.sign() * x)
            .collect();
        let power = power_iteration(&p, 20_000, seed).unwrap();
        let settle = |h: &[f64]| h.iter().rposition(|x| (x - target).abs() > 1e-6).map_or(1, |k| k + 2);
        assert!(settle(&cheb) <= cheb.len());
        assert!(settle(&cheb) < settle(&power), "seed {seed}");
        tried += 1;
        if tried == 5 {
            break;
        }
    }
}

#[test]
fn subgradient_examples() {
    let n = 4;
    let mut q = Matrix::zeros(n, n);
    q[(0, 1)] = 1.0;
    q[(1, 0)] = 1.0;
    let stats = LinkStats::new(q).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let est = SpectralEstimate {
        eigenvector: vec![h, -h, 0.0, 0.0],
        eigenvalue: 1.0,
        active_branch: Branch::Lambda2,
        iterations_used: 0,
    };
    let g = subgradient(&AggregationMatrix::uniform(n), &stats, &est).unwrap();
    assert!((g[(0, 1)] + 1.0).abs() < 1e-15);
    assert_eq!(g.symmetry_residual(), 0.0);
    let flat = SpectralEstimate {
        eigenvector: vec![0.5, 0.5, -0.5, -0.5],
        ..est
    };
    let g = subgradient(&AggregationMatrix::uniform(n), &LinkStats::uniform(n, 1.0).unwrap(), &flat).unwrap();
    assert_eq!(g[(0, 1)], 0.0);
    assert_eq!(g[(2, 3)], 0.0);
    assert!(g[(0, 2)] < 0.0);
}

#[test]
fn subgradient_matches_finite_differences() {
    let mut r = rng(11);
    let mut checked = 0;
    while checked < 20 {
        let n = r.random_range(4..9);
        let a = random_weights(n, &mut r);
        let stats = dense_random_stats(n, &mut r);
        let p = surrogate_operator(&a, &stats).unwrap();
        let spectrum = nontrivial_by_magnitude(&p);
        let positive: Vec<f64> = spectrum.iter().copied().filter(|x| *x > 0.0).collect();
        let simple = spectrum[0].abs() - spectrum[1].abs() > 1e-3;
        // The perturbation must also keep every weight inside the feasible box.
        let interior = a.as_matrix().as_slice().iter().all(|&x| x == 0.0 || x > 1e-5);
        if !simple || !interior || positive.is_empty() {
            continue;
        }
        let cfg = ChebyshevConfig {
            iterations: 2000,
            residual_tolerance: 1e-12,
            ..ChebyshevConfig::default()
        };
        let est = estimate_dominant_nontrivial(&p, &cfg, 1).unwrap();
        let g = subgradient(&a, &stats, &est).unwrap();
        let fd = oracle::finite_diff_rho(&a, &stats, 1e-6).unwrap();
        for i in 0..n {
            for j in 0..n {
                if i != j && a.get(i, j) > 0.0 {
                    assert!((g[(i, j)] - fd[(i, j)]).abs() < 1e-5, "({i},{j}): {} vs {}", g[(i, j)], fd[(i, j)]);
                }
            }
        }
        checked += 1;
    }
}

/// Symmetrize then row-normalize with plain loops, many times over.
fn alternate(a: &Matrix, sweeps: usize) -> Matrix {
    let n = a.rows();
    let mut x: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)].max(0.0)).collect()).collect();
    for _ in 0..sweeps {
        let t = x.clone();
        for i in 0..n {
            for j in 0..n {
                x[i][j] = 0.5 * (t[i][j] + t[j][i]);
            }
        }
        for row in x.iter_mut() {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
    }
    Matrix::from_rows(&x).unwrap()
}

#[test]
fn restoration_matches_balancing_reference() {
    let mut r = rng(12);
    for _ in 0..10 {
        let raw = Matrix::from_fn(3, 3, |_, _| r.random_range(0.05..1.0));
        let out = restore_feasibility(&raw, 500).unwrap();
        assert!(out.as_matrix().max_abs_diff(&alternate(&raw, 10_000)) < 1e-8);
    }
}

#[test]
fn restoration_contracts() {
    let mut r = rng(13);
    for _ in 0..20 {
        let n = r.random_range(3..15);
        let raw = Matrix::from_fn(n, n, |i, j| {
            if (i + 2 * j) % 5 == 1 && i != j {
                0.0
            } else {
                r.random_range(-0.2..1.0)
            }
        });
        // Far-from-feasible inputs need more alternations than optimizer steps.
        let out = restore_feasibility(&raw, 200).unwrap();
        assert!(out.feasibility_residual() <= 1e-9);
        for i in 0..n {
            for j in 0..n {
                if i != j && raw[(i, j)] <= 0.0 && raw[(j, i)] <= 0.0 {
                    assert_eq!(out.get(i, j), 0.0);
                }
            }
        }
    }
    let a = random_weights(6, &mut r);
    let back = restore_feasibility(a.as_matrix(), 50).unwrap();
    assert!(back.as_matrix().max_abs_diff(a.as_matrix()) < 1e-12);
    let mut dead = Matrix::identity(3);
    dead[(1, 1)] = -1.0;
    assert!(matches!(restore_feasibility(&dead, 5), Err(Error::DegenerateRow { row: 1 })));
}

#[test]
fn equal_links_descend_toward_analytic_floor() {
    // With every q equal, P̄ = (1 − q)I + qA. The nontrivial eigenvalues of
    // A sum to tr(A) − 1 ≥ −1, so ρ(P̄) ≥ 1 − q − q/(N − 1), while uniform
    // weights sit at 1 − q.
    let (n, q) = (10, 0.6);
    let stats = LinkStats::uniform(n, q).unwrap();
    let cheb = ChebyshevConfig {
        iterations: 1000,
        ..ChebyshevConfig::default()
    };
    let opt = OptimizerConfig {
        max_iterations: 30,
        ..OptimizerConfig::default()
    };
    let out = optimize(&AggregationMatrix::uniform(n), &stats, &opt, &cheb, 3).unwrap();
    let floor = 1.0 - q - q / (n - 1) as f64;
    assert!((out.trace[0].rho_oracle - (1.0 - q)).abs() < 1e-12);
    assert!(out.best_rho() < 1.0 - q - 1e-3);
    assert!(out.rho_trace().iter().all(|&r| r >= floor - 1e-12));
}

#[test]
fn zero_iterations_is_identity_map() {
    let stats = dense_random_stats(6, &mut rng(14));
    let a0 = random_weights(6, &mut rng(15));
    let opt = OptimizerConfig {
        max_iterations: 0,
        ..OptimizerConfig::default()
    };
    let out = optimize(&a0, &stats, &opt, &ChebyshevConfig::default(), 0).unwrap();
    assert_eq!(out.best, a0);
    assert_eq!(out.last, a0);
}

#[test]
fn optimizer_improves_set_a_and_tracks_centralized_run() {
    let cfg = ConstellationConfig::new(&ParameterSet::A.params(), 22, Placement::Uniform, 0);
    let stats = compute_link_stats(&cfg).unwrap();
    let a0 = AggregationMatrix::uniform(22);
    let opt = OptimizerConfig {
        max_iterations: 100,
        ..OptimizerConfig::default()
    };
    let cheb = ChebyshevConfig {
        iterations: 1000,
        ..ChebyshevConfig::default()
    };
    let dec = optimize(&a0, &stats, &opt, &cheb, 0).unwrap();
    let cen = optimize_centralized(&a0, &stats, &opt).unwrap();
    let start = dec.trace[0].rho_oracle;
    assert!(dec.best_rho() < start - 1e-3);
    assert!((dec.best_rho() - cen.best_rho()).abs() <= 0.02);
    assert!(dec.max_feasibility_residual() <= 1e-9);
    assert_eq!(dec.trace.len(), 101);
    let best = expected_mixing(&dec.best, &stats).unwrap();
    assert!((oracle::rho_nontrivial(&best).unwrap() - dec.best_rho()).abs() < 1e-12);
}
