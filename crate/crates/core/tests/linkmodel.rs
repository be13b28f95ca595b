mod common;

use std::f64::consts::PI;

use dmix_core::linkmodel::*;
use dmix_core::Matrix;

fn reference_q(p: &LinkParams, angles: &[f64], i: usize, j: usize) -> f64 {
    let raw = (angles[i] - angles[j]).rem_euclid(2.0 * PI);
    let sep = raw.min(2.0 * PI - raw);
    let d = p.orbit_radius_km * sep;
    let theta = sep * 180.0 / PI;
    let worst = (p.alpha_d * d / p.d_max_km)
        .max(p.alpha_theta * theta / p.theta_max_deg)
        .max(p.interference);
    (1.0 - worst).clamp(0.0, 1.0)
}

#[test]
fn set_a_uniform_matches_scalar_evaluation() {
    let p = ParameterSet::A.params();
    let cfg = ConstellationConfig::new(&p, 22, Placement::Uniform, 0);
    let q = compute_link_stats(&cfg).unwrap();
    for i in 0..22 {
        for j in 0..22 {
            let want = if i == j { 0.0 } else { reference_q(&p, &cfg.node_angles, i, j) };
            assert!((q.get(i, j) - want).abs() < 1e-12, "q[{i}][{j}] = {} vs {want}", q.get(i, j));
        }
    }
}

#[test]
fn random_placement_matches_scalar_evaluation() {
    for set in [ParameterSet::B, ParameterSet::C] {
        let p = set.params();
        let cfg = ConstellationConfig::new(&p, 15, Placement::Random, 9);
        let q = compute_link_stats(&cfg).unwrap();
        for (i, j, v) in q.pairs() {
            assert!((v - reference_q(&p, &cfg.node_angles, i, j)).abs() < 1e-12);
        }
    }
}

#[test]
fn coincident_nodes_keep_interference_term() {
    let p = ParameterSet::Default.params();
    let mut cfg = ConstellationConfig::new(&p, 2, Placement::Uniform, 0);
    cfg.node_angles = vec![0.3, 0.3];
    let q = compute_link_stats(&cfg).unwrap();
    assert!((q.get(0, 1) - 0.95).abs() < 1e-12);
}

#[test]
fn distance_dominated_link_at_d_max() {
    let p = ParameterSet::Default.params();
    let mut cfg = ConstellationConfig::new(&p, 2, Placement::Uniform, 0);
    cfg.alpha_theta = 0.0;
    cfg.node_angles = vec![0.0, p.d_max_km / p.orbit_radius_km];
    let q = compute_link_stats(&cfg).unwrap();
    assert!((q.get(0, 1) - 0.3).abs() < 1e-12);
}

#[test]
fn rejects_bad_geometry() {
    let p = ParameterSet::A.params();
    let cfg = ConstellationConfig::new(&p, 1, Placement::Uniform, 0);
    assert!(compute_link_stats(&cfg).is_err());
    let mut cfg = ConstellationConfig::new(&p, 4, Placement::Uniform, 0);
    cfg.node_angles[2] = f64::NAN;
    assert!(compute_link_stats(&cfg).is_err());
    let mut cfg = ConstellationConfig::new(&p, 4, Placement::Uniform, 0);
    cfg.interference[(0, 1)] = 0.5;
    assert!(compute_link_stats(&cfg).is_err());
}

#[test]
fn degenerate_masks() {
    let ones = LinkStats::uniform(6, 1.0).unwrap();
    let zeros = LinkStats::uniform(6, 0.0).unwrap();
    for t in 0..20 {
        assert_eq!(sample_mask(&ones, 3, t), LinkMask::full(6, t));
        assert_eq!(sample_mask(&zeros, 3, t), LinkMask::empty(6, t));
    }
}

#[test]
fn half_probability_link_frequency() {
    let mut q = Matrix::zeros(3, 3);
    q[(0, 1)] = 0.5;
    q[(1, 0)] = 0.5;
    let stats = LinkStats::new(q).unwrap();
    let draws = 100_000;
    let ups = (0..draws).filter(|&t| sample_mask(&stats, 11, t).is_up(0, 1)).count();
    let mean = ups as f64 / draws as f64;
    assert!((0.494..=0.506).contains(&mean), "mean {mean}");
}

#[test]
fn distinct_pairs_uncorrelated() {
    let stats = LinkStats::uniform(4, 0.3).unwrap();
    let draws = 100_000;
    let (mut sa, mut sb, mut sab) = (0.0, 0.0, 0.0);
    for t in 0..draws {
        let m = sample_mask(&stats, 5, t);
        let a = m.indicator(0, 1);
        let b = m.indicator(2, 3);
        sa += a;
        sb += b;
        sab += a * b;
    }
    let r = draws as f64;
    let cov = sab / r - (sa / r) * (sb / r);
    let band = 3.0 * 0.3 * 0.7 / r.sqrt();
    assert!(cov.abs() <= band, "cov {cov} band {band}");
}

#[test]
fn masks_replay_per_seed_and_round() {
    let p = ParameterSet::C.params();
    let q = compute_link_stats(&ConstellationConfig::new(&p, 12, Placement::Uniform, 0)).unwrap();
    assert_eq!(sample_mask(&q, 8, 17), sample_mask(&q, 8, 17));
    assert_ne!(sample_mask(&q, 8, 17), sample_mask(&q, 8, 18));
}

#[test]
fn point_mass_cdf() {
    let stats = LinkStats::uniform(5, 0.9).unwrap();
    let cdf = empirical_cdf(&stats, &[0.5, 0.9, 1.0]).unwrap();
    let f: Vec<f64> = cdf.iter().map(|p| p.1).collect();
    assert_eq!(f, vec![0.0, 1.0, 1.0]);
    assert!(empirical_cdf(&stats, &[]).is_err());
}

#[test]
fn set_c_cdf_by_counting() {
    let q = compute_link_stats(&ConstellationConfig::new(&ParameterSet::C.params(), 22, Placement::Uniform, 0)).unwrap();
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let cdf = empirical_cdf(&q, &grid).unwrap();
    let mut values = Vec::new();
    for i in 0..22 {
        for j in i + 1..22 {
            values.push(q.get(i, j));
        }
    }
    for (x, f) in cdf {
        let count = values.iter().filter(|&&v| v <= x).count();
        assert_eq!(f, count as f64 / values.len() as f64);
    }
}

#[test]
fn set_b_rises_above_set_a() {
    let grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    let cdf = |s: ParameterSet| {
        let q = compute_link_stats(&ConstellationConfig::new(&s.params(), 22, Placement::Uniform, 0)).unwrap();
        empirical_cdf(&q, &grid).unwrap()
    };
    let a = cdf(ParameterSet::A);
    let b = cdf(ParameterSet::B);
    for (pa, pb) in a.iter().zip(&b).filter(|(p, _)| p.0 >= 0.5) {
        assert!(pb.1 >= pa.1, "x = {}: B {} < A {}", pa.0, pb.1, pa.1);
    }
}
