mod common;

use common::*;
use dmix_core::linkmodel::*;
use dmix_core::mixing::*;
use dmix_core::{oracle, Matrix};
use rand::Rng;

/// `I + A⊙M − Diag(A·M)` with plain loops.
fn eq10(a: &Matrix, m: &Matrix) -> Matrix {
    let n = a.rows();
    let mut p = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] += a[(i, j)] * m[(i, j)];
        }
        let mut am = 0.0;
        for k in 0..n {
            am += a[(i, k)] * m[(k, i)];
        }
        p[(i, i)] -= am;
    }
    p
}

#[test]
fn realization_matches_loop_evaluation() {
    let mut r = rng(1);
    for _ in 0..20 {
        let a = random_weights(4, &mut r);
        let mask = LinkMask::from_fn(4, 0, |_, _| r.random::<bool>());
        let p = realize_mixing(&a, &mask).unwrap().p;
        let want = eq10(a.as_matrix(), &mask.to_matrix());
        assert!(p.max_abs_diff(&want) < 1e-15);
        assert_eq!(p.symmetry_residual(), 0.0);
        assert!(p.row_sum_residual() < 1e-15);
    }
}

#[test]
fn trivial_realizations() {
    let a = AggregationMatrix::uniform(5);
    assert_eq!(realize_mixing(&a, &LinkMask::empty(5, 0)).unwrap().p, Matrix::identity(5));
    let p = realize_mixing(&a, &LinkMask::full(5, 0)).unwrap().p;
    assert!(p.max_abs_diff(&Matrix::averaging(5)) < 1e-15);
}

#[test]
fn expected_mixing_is_monte_carlo_mean() {
    let stats = compute_link_stats(&ConstellationConfig::new(&ParameterSet::A.params(), 22, Placement::Uniform, 0)).unwrap();
    let a = AggregationMatrix::uniform(22);
    let p_bar = expected_mixing(&a, &stats).unwrap();
    let samples = 100_000;
    let mut sum = Matrix::zeros(22, 22);
    let mut sum_sq = Matrix::zeros(22, 22);
    for t in 0..samples {
        let p = realize_mixing(&a, &sample_mask(&stats, 4, t)).unwrap().p;
        for i in 0..22 {
            for j in 0..22 {
                sum[(i, j)] += p[(i, j)];
                sum_sq[(i, j)] += p[(i, j)] * p[(i, j)];
            }
        }
    }
    let m = samples as f64;
    for i in 0..22 {
        for j in 0..22 {
            let mean = sum[(i, j)] / m;
            let var = (sum_sq[(i, j)] / m - mean * mean).max(0.0);
            let band = 3.0 * (var / m).sqrt() + 1e-12;
            assert!((mean - p_bar[(i, j)]).abs() <= band, "({i},{j}) {mean} vs {}", p_bar[(i, j)]);
        }
    }
}

#[test]
fn expected_mixing_extremes() {
    let mut r = rng(2);
    let a = random_weights(6, &mut r);
    let ones = LinkStats::uniform(6, 1.0).unwrap();
    assert!(expected_mixing(&a, &ones).unwrap().max_abs_diff(a.as_matrix()) < 1e-15);
    let zeros = LinkStats::uniform(6, 0.0).unwrap();
    assert_eq!(expected_mixing(&a, &zeros).unwrap(), Matrix::identity(6));
}

#[test]
fn analytic_second_moment_matches_enumeration() {
    let mut r = rng(3);
    for n in [3, 5, 6] {
        for _ in 0..10 {
            let a = random_weights(n, &mut r);
            let stats = random_stats(n, 12, &mut r);
            let exact = oracle::enumerate_second_moment(&a, &stats).unwrap();
            let analytic = second_moment_analytic(&a, &stats).unwrap();
            assert!(analytic.max_abs_diff(&exact) < 1e-12);
        }
    }
}

#[test]
fn two_half_links_on_five_nodes() {
    let mut q = Matrix::from_fn(5, 5, |i, j| if i != j { 1.0 } else { 0.0 });
    for (i, j) in [(0, 1), (2, 4)] {
        q[(i, j)] = 0.5;
        q[(j, i)] = 0.5;
    }
    let stats = LinkStats::new(q).unwrap();
    let a = random_weights(5, &mut rng(4));
    let mut want = Matrix::zeros(5, 5);
    for bits in 0..4u32 {
        let up01 = bits & 1 == 1;
        let up24 = bits & 2 == 2;
        let mask = LinkMask::from_fn(5, 0, |i, j| match (i.min(j), i.max(j)) {
            (0, 1) => up01,
            (2, 4) => up24,
            _ => true,
        });
        let p = eq10(a.as_matrix(), &mask.to_matrix());
        want = want.add_scaled(&p.matmul(&p).unwrap(), 0.25);
    }
    assert!(second_moment_analytic(&a, &stats).unwrap().max_abs_diff(&want) < 1e-12);
}

#[test]
fn second_moment_deterministic_links() {
    let mut r = rng(5);
    let a = random_weights(7, &mut r);
    let zeros = LinkStats::uniform(7, 0.0).unwrap();
    assert!(second_moment_analytic(&a, &zeros).unwrap().max_abs_diff(&Matrix::identity(7)) < 1e-15);
    let ones = LinkStats::uniform(7, 1.0).unwrap();
    let p = expected_mixing(&a, &ones).unwrap();
    let sq = p.matmul(&p).unwrap();
    assert!(second_moment_analytic(&a, &ones).unwrap().max_abs_diff(&sq) < 1e-15);
    assert!(second_moment_monte_carlo(&a, &ones, 3, 1).unwrap().max_abs_diff(&sq) < 1e-15);
    assert_eq!(deviation_norm(&a, &ones).unwrap(), 0.0);
}

#[test]
fn monte_carlo_second_moment_within_three_sigma() {
    let mut r = rng(6);
    let a = random_weights(6, &mut r);
    let stats = dense_random_stats(6, &mut r);
    let analytic = second_moment_analytic(&a, &stats).unwrap();
    let (mean, se) = second_moment_monte_carlo_with_se(&a, &stats, 100_000, 9).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            assert!((mean[(i, j)] - analytic[(i, j)]).abs() <= 3.0 * se[(i, j)] + 1e-12);
        }
    }
}

#[test]
fn single_sample_is_that_mask() {
    let mut r = rng(7);
    let a = random_weights(5, &mut r);
    let stats = dense_random_stats(5, &mut r);
    let mc = second_moment_monte_carlo(&a, &stats, 1, 2).unwrap();
    let key = dmix_core::rng::derive_key(2, dmix_core::rng::Domain::MonteCarlo, &[]);
    let p = realize_mixing(&a, &sample_mask(&stats, key, 0)).unwrap().p;
    assert_eq!(mc, p.matmul(&p).unwrap());
}

#[test]
fn spectral_sandwich() {
    let mut r = rng(8);
    for _ in 0..30 {
        let n = r.random_range(3..12);
        let a = random_weights(n, &mut r);
        let stats = dense_random_stats(n, &mut r);
        let rho2 = oracle::rho_nontrivial(&second_moment_analytic(&a, &stats).unwrap()).unwrap();
        let rho = oracle::rho_nontrivial(&expected_mixing(&a, &stats).unwrap()).unwrap();
        let dev = deviation_norm(&a, &stats).unwrap();
        assert!(rho2 <= rho * rho + dev + 1e-9, "{rho2} > {rho}^2 + {dev}");
    }
}

#[test]
fn deviation_shrinks_under_replication() {
    let base = dense_random_stats(8, &mut rng(9));
    let mut last = f64::INFINITY;
    for n in [8, 16, 32, 64] {
        let q = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else if i % 8 == j % 8 {
                0.5
            } else {
                base.get(i % 8, j % 8)
            }
        });
        let stats = LinkStats::new(q).unwrap();
        let dev = deviation_norm(&AggregationMatrix::uniform(n), &stats).unwrap();
        assert!(dev < last, "N = {n}: {dev} >= {last}");
        last = dev;
    }
}

#[test]
fn enumeration_budget() {
    let stats = LinkStats::uniform(8, 0.5).unwrap();
    assert!(oracle::enumerate_second_moment(&AggregationMatrix::uniform(8), &stats).is_err());
}
