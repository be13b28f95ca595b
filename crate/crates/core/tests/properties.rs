mod common;

use common::rng;
use dmix_core::dml_sim::*;
use dmix_core::linkmodel::*;
use dmix_core::mixing::*;
use dmix_core::spectral_opt::*;
use dmix_core::theory::*;
use dmix_core::{oracle, Matrix};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = LinkParams> {
    (0.0..1.5f64, 0.0..1.5f64, 0.0..0.5f64, 1000.0..8000.0f64).prop_map(|(ad, at, w, r)| LinkParams {
        alpha_d: ad,
        alpha_theta: at,
        interference: w,
        orbit_radius_km: r,
        ..ParameterSet::Default.params()
    })
}

fn placement() -> impl Strategy<Value = Placement> {
    prop_oneof![Just(Placement::Uniform), Just(Placement::Random)]
}

fn weights_and_stats(max_n: usize) -> impl Strategy<Value = (AggregationMatrix, LinkStats)> {
    (2..=max_n, any::<u64>()).prop_map(|(n, seed)| {
        let mut r = rng(seed);
        (common::random_weights(n, &mut r), common::dense_random_stats(n, &mut r))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stats_and_masks_are_symmetric(p in params(), n in 2usize..16, pl in placement(), seed: u64, t in 0usize..50) {
        let stats = compute_link_stats(&ConstellationConfig::new(&p, n, pl, seed)).unwrap();
        let q = stats.as_matrix();
        prop_assert_eq!(q, &q.transpose());
        prop_assert!(q.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        let m = sample_mask(&stats, seed, t).to_matrix();
        prop_assert_eq!(&m, &m.transpose());
        prop_assert!((0..n).all(|i| m[(i, i)] == 0.0));
    }

    #[test]
    fn raising_any_coefficient_never_raises_q(p in params(), n in 2usize..12, seed: u64, which in 0usize..3, bump in 0.0..0.5f64) {
        let base = ConstellationConfig::new(&p, n, Placement::Random, seed);
        let mut up = base.clone();
        match which {
            0 => up.alpha_d += bump,
            1 => up.alpha_theta += bump,
            _ => up.interference = Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { (p.interference + bump).min(1.0) }),
        }
        let q0 = compute_link_stats(&base).unwrap();
        let q1 = compute_link_stats(&up).unwrap();
        for (i, j, v) in q1.pairs() {
            prop_assert!(v <= q0.get(i, j));
        }
    }

    #[test]
    fn realizations_are_symmetric_and_stochastic((a, stats) in weights_and_stats(12), seed: u64, t in 0usize..20) {
        let p = realize_mixing(&a, &sample_mask(&stats, seed, t)).unwrap().p;
        prop_assert_eq!(&p, &p.transpose());
        prop_assert!(p.row_sum_residual() < 1e-12);
    }

    #[test]
    fn surrogate_is_expected_mixing((a, stats) in weights_and_stats(22)) {
        let s = surrogate_operator(&a, &stats).unwrap();
        prop_assert!(s.max_abs_diff(&expected_mixing(&a, &stats).unwrap()) < 1e-12);
        prop_assert!(s.max_abs_diff(&oracle::expected_mixing_raw(a.as_matrix(), &stats)) < 1e-12);
    }

    #[test]
    fn second_moment_is_mean_square_plus_deviation((a, stats) in weights_and_stats(10)) {
        let p_bar = expected_mixing(&a, &stats).unwrap();
        let lhs = second_moment_analytic(&a, &stats).unwrap();
        let rhs = p_bar.matmul(&p_bar).unwrap().add_scaled(&second_moment_deviation(&a, &stats).unwrap(), 1.0);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        prop_assert!(lhs.row_sum_residual() < 1e-12);
    }

    #[test]
    fn restoration_lands_in_feasible_set(n in 2usize..12, seed: u64) {
        let mut r = rng(seed);
        let raw = Matrix::from_fn(n, n, |i, j| {
            if i == j { rand::Rng::random_range(&mut r, 0.1..1.0) } else if rand::Rng::random::<f64>(&mut r) < 0.3 { 0.0 } else { rand::Rng::random_range(&mut r, -0.2..1.0) }
        });
        let out = restore_feasibility(&raw, 200).unwrap();
        prop_assert!(out.feasibility_residual() < 1e-9);
        for i in 0..n {
            for j in 0..n {
                prop_assert!(out.get(i, j) >= 0.0);
                if i != j && raw[(i, j)] == 0.0 && raw[(j, i)] == 0.0 {
                    prop_assert_eq!(out.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn restored_optimizer_step_is_feasible((a, stats) in weights_and_stats(10)) {
        let opt = OptimizerConfig { max_iterations: 3, ..OptimizerConfig::default() };
        let out = optimize_centralized(&a, &stats, &opt).unwrap();
        prop_assert!(out.max_feasibility_residual() <= 1e-9);
        prop_assert!(out.best.feasibility_residual() <= 1e-9);
    }

    #[test]
    fn fusion_preserves_average(n in 2usize..10, seed: u64, t in 0usize..10) {
        let mut r = rng(seed);
        let a = common::random_weights(n, &mut r);
        let stats = common::dense_random_stats(n, &mut r);
        let task = TaskSpec { dimension: 3, nodes: n, ..TaskSpec::default() }.build(seed).unwrap();
        let w = Matrix::from_fn(3, n, |_, _| rand::Rng::random_range(&mut r, -5.0..5.0));
        let s = FleetState::new(w, t).unwrap();
        let next = protocol_round(&s, &a, &sample_mask(&stats, seed, t), &task, 0.0, seed).unwrap();
        for (x, y) in s.mean_model().iter().zip(next.mean_model()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn bound_is_nonnegative_and_increasing_in_rho(
        l in 0.1..5.0f64, sigma2 in 0.0..3.0f64, delta2 in 0.0..3.0f64,
        n in 1usize..64, rounds in 1usize..10_000, gap in 0.0..10.0f64,
        r0 in 0.0..0.9f64, dr in 1e-3..0.09f64, frac in 0.01..0.99f64,
    ) {
        let r1 = r0 + dr;
        let eta = frac * learning_rate_limit(l, n, r1);
        let at = |rho_p2| TheoremInputs { lipschitz: l, sigma2, delta2, eta, rounds, nodes: n, rho_p2, loss_gap: gap };
        let (g0, g1) = (gamma(&at(r0)).unwrap(), gamma(&at(r1)).unwrap());
        let (b0, b1) = (convergence_bound(&at(r0)).unwrap(), convergence_bound(&at(r1)).unwrap());
        prop_assert!(b0 >= 0.0 && b1 >= 0.0);
        prop_assert!(g1 > g0);
        if sigma2 + delta2 > 0.0 || gap > 0.0 {
            prop_assert!(b1 > b0);
        }
    }

    #[test]
    fn prescribed_matrix_has_prescribed_radius(n in 2usize..30, beta in 0.0..0.999f64) {
        let m = prescribed_rho_matrix(n, beta).unwrap();
        let a = AggregationMatrix::new(m.clone()).unwrap();
        prop_assert!(a.feasibility_residual() < 1e-14);
        prop_assert!((oracle::rho_nontrivial(&m).unwrap() - beta).abs() < 1e-10);
    }

    #[test]
    fn rho_is_deflated_spectral_norm(seed: u64) {
        if let Some(m) = common::random_doubly_stochastic(8, seed) {
            let deflated = m.sub(&Matrix::averaging(8));
            let diff = oracle::rho_nontrivial(&m).unwrap() - oracle::spectral_norm(&deflated).unwrap();
            prop_assert!(diff.abs() < 1e-9);
        }
    }
}
