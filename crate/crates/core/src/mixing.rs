//! Realized and expected mixing matrices.
//!
//! Given aggregation weights `A` and a round's link mask `M`, fusion applies
//!
//! ```text
//! P = I + A⊙M − Diag(A·M)
//! ```
//!
//! so `p_ij = a_ij·m_ij` off the diagonal and each diagonal entry absorbs
//! whatever weight the node could not place on a live link. Off-diagonal
//! entries are always assembled from the symmetric part `½(a_ij + a_ji)`,
//! which makes `P` bitwise symmetric; for feasible `A` that part is `A`
//! itself.

use alloc::vec::Vec;

use crate::linkmodel::{self, LinkMask, LinkStats};
use crate::rng::{self, Domain};
use crate::{oracle, Error, Matrix, Result};

/// Symmetric, nonnegative, row-stochastic weights `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationMatrix {
    a: Matrix,
}

impl AggregationMatrix {
    /// Tolerance on symmetry and row sums accepted by [`AggregationMatrix::new`].
    pub const TOLERANCE: f64 = 1e-9;

    pub fn new(a: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: a.cols(),
            });
        }
        if !a.all_finite() {
            return Err(Error::invalid("weights", "entries must be finite"));
        }
        if a.as_slice().iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("weights", "entries must be nonnegative"));
        }
        let asym = a.symmetry_residual();
        if asym > Self::TOLERANCE {
            return Err(Error::NotSymmetric(asym));
        }
        let rows = a.row_sum_residual();
        if rows > Self::TOLERANCE {
            return Err(Error::invalid(
                "weights",
                alloc::format!("row sums deviate from 1 by {rows:e}"),
            ));
        }
        Ok(AggregationMatrix { a })
    }

    /// Skip validation; callers guarantee feasibility.
    pub(crate) fn new_unchecked(a: Matrix) -> Self {
        AggregationMatrix { a }
    }

    /// `a_ij = 1/N` everywhere: link-agnostic uniform weighting.
    pub fn uniform(n: usize) -> Self {
        AggregationMatrix {
            a: Matrix::averaging(n),
        }
    }

    pub fn identity(n: usize) -> Self {
        AggregationMatrix {
            a: Matrix::identity(n),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[(i, j)]
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn into_matrix(self) -> Matrix {
        self.a
    }

    /// `max(symmetry residual, row-sum residual)`.
    pub fn feasibility_residual(&self) -> f64 {
        self.a.symmetry_residual().max(self.a.row_sum_residual())
    }

    /// Symmetric part of the off-diagonal weight on pair `(i, j)`.
    #[inline]
    pub(crate) fn pair_weight(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.a[(i, j)] + self.a[(j, i)])
    }
}

/// One round's mask and the mixing matrix it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingRealization {
    pub p: Matrix,
    pub mask: LinkMask,
}

/// How the second moment in an [`ExpectedMixing`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    MonteCarlo { samples: usize },
}

/// `P̄ = E[P]` and `E[P²]` for a fixed `(A, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedMixing {
    pub p_bar: Matrix,
    pub p2_bar: Matrix,
    pub provenance: Provenance,
}

impl ExpectedMixing {
    pub fn analytic(a: &AggregationMatrix, stats: &LinkStats) -> Result<Self> {
        Ok(ExpectedMixing {
            p_bar: expected_mixing(a, stats)?,
            p2_bar: second_moment_analytic(a, stats)?,
            provenance: Provenance::Analytic,
        })
    }

    pub fn monte_carlo(a: &AggregationMatrix, stats: &LinkStats, samples: usize, seed: u64) -> Result<Self> {
        Ok(ExpectedMixing {
            p_bar: expected_mixing(a, stats)?,
            p2_bar: second_moment_monte_carlo(a, stats, samples, seed)?,
            provenance: Provenance::MonteCarlo { samples },
        })
    }
}

fn check_dims(a: &AggregationMatrix, n: usize) -> Result<()> {
    if a.n() != n {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: n,
        });
    }
    Ok(())
}

/// Fill a symmetric matrix from per-pair weights and put the leftover mass
/// on the diagonal.
fn assemble(n: usize, mut weight: impl FnMut(usize, usize) -> f64) -> Matrix {
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weight(i, j);
            p[(i, j)] = w;
            p[(j, i)] = w;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| p[(i, j)]).sum();
        p[(i, i)] = 1.0 - off;
    }
    p
}

/// `P = I + A⊙M − Diag(A·M)`.
pub fn realize_mixing(a: &AggregationMatrix, mask: &LinkMask) -> Result<MixingRealization> {
    check_dims(a, mask.n())?;
    let p = assemble(a.n(), |i, j| a.pair_weight(i, j) * mask.indicator(i, j));
    Ok(MixingRealization {
        p,
        mask: mask.clone(),
    })
}

/// `P̄`: `p̄_ij = a_ij·q_ij`, `p̄_ii = 1 − Σ_{j≠i} a_ij·q_ij`.
pub fn expected_mixing(a: &AggregationMatrix, stats: &LinkStats) -> Result<Matrix> {
    check_dims(a, stats.n())?;
    Ok(assemble(a.n(), |i, j| a.pair_weight(i, j) * stats.get(i, j)))
}

/// `Δ = E[P²] − P̄²`.
///
/// Writing `P = I − L` with `L` the Laplacian of edge weights
/// `x_ij = a_ij·m_ij`, only the variance of each edge survives:
/// `Δ = Σ_{i<j} 2·a_ij²·q_ij(1 − q_ij)·(e_i − e_j)(e_i − e_j)ᵀ`.
pub fn second_moment_deviation(a: &AggregationMatrix, stats: &LinkStats) -> Result<Matrix> {
    check_dims(a, stats.n())?;
    let n = a.n();
    let mut delta = Matrix::zeros(n, n);
    for (i, j, q) in stats.pairs() {
        let w = a.pair_weight(i, j);
        let v = 2.0 * w * w * q * (1.0 - q);
        delta[(i, j)] -= v;
        delta[(j, i)] -= v;
        delta[(i, i)] += v;
        delta[(j, j)] += v;
    }
    Ok(delta)
}

/// Exact `E[P²]` under independent links.
pub fn second_moment_analytic(a: &AggregationMatrix, stats: &LinkStats) -> Result<Matrix> {
    let p_bar = expected_mixing(a, stats)?;
    let p_bar2 = p_bar.matmul(&p_bar)?;
    Ok(p_bar2.add_scaled(&second_moment_deviation(a, stats)?, 1.0))
}

/// Sample mean of `P²` over `samples` independent masks.
pub fn second_moment_monte_carlo(
    a: &AggregationMatrix,
    stats: &LinkStats,
    samples: usize,
    seed: u64,
) -> Result<Matrix> {
    second_moment_monte_carlo_with_se(a, stats, samples, seed).map(|(mean, _)| mean)
}

/// Sample mean of `P²` and the entrywise standard error of that mean.
pub fn second_moment_monte_carlo_with_se(
    a: &AggregationMatrix,
    stats: &LinkStats,
    samples: usize,
    seed: u64,
) -> Result<(Matrix, Matrix)> {
    check_dims(a, stats.n())?;
    if samples == 0 {
        return Err(Error::invalid("sample_count", "must be at least 1"));
    }
    let n = a.n();
    let mask_seed = rng::derive_key(seed, Domain::MonteCarlo, &[]);
    let mut sum = Matrix::zeros(n, n);
    let mut sum_sq = Matrix::zeros(n, n);
    for k in 0..samples {
        let mask = linkmodel::sample_mask(stats, mask_seed, k);
        let p = realize_mixing(a, &mask)?.p;
        let p2 = p.matmul(&p)?;
        for i in 0..n {
            for j in 0..n {
                let v = p2[(i, j)];
                sum[(i, j)] += v;
                sum_sq[(i, j)] += v * v;
            }
        }
    }
    let m = samples as f64;
    let mean = sum.scaled(1.0 / m);
    let se = Matrix::from_fn(n, n, |i, j| {
        if samples < 2 {
            return 0.0;
        }
        let mu = mean[(i, j)];
        let var = ((sum_sq[(i, j)] - m * mu * mu) / (m - 1.0)).max(0.0);
        libm::sqrt(var / m)
    });
    Ok((mean, se))
}

/// `‖E[P²] − P̄²‖₂`.
pub fn deviation_norm(a: &AggregationMatrix, stats: &LinkStats) -> Result<f64> {
    let delta = second_moment_deviation(a, stats)?;
    let eig = oracle::eig_sym(&delta)?;
    Ok(eig.eigenvalues.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
}

/// Draw `rounds` consecutive masks for one seed and realize each.
pub fn realize_rounds(
    a: &AggregationMatrix,
    stats: &LinkStats,
    seed: u64,
    rounds: core::ops::Range<usize>,
) -> Result<Vec<MixingRealization>> {
    rounds
        .map(|t| realize_mixing(a, &linkmodel::sample_mask(stats, seed, t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats_with(n: usize, pairs: &[(usize, usize, f64)]) -> LinkStats {
        let mut q = Matrix::zeros(n, n);
        for &(i, j, p) in pairs {
            q[(i, j)] = p;
            q[(j, i)] = p;
        }
        LinkStats::new(q).unwrap()
    }

    #[test]
    fn empty_mask_gives_identity() {
        let a = AggregationMatrix::uniform(5);
        let r = realize_mixing(&a, &LinkMask::empty(5, 0)).unwrap();
        assert_eq!(r.p, Matrix::identity(5));
    }

    #[test]
    fn full_mask_uniform_weights() {
        let n = 6;
        let a = AggregationMatrix::uniform(n);
        let p = realize_mixing(&a, &LinkMask::full(n, 0)).unwrap().p;
        for i in 0..n {
            for j in 0..n {
                assert!((p[(i, j)] - 1.0 / n as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = AggregationMatrix::uniform(3);
        assert!(realize_mixing(&a, &LinkMask::full(4, 0)).is_err());
        assert!(expected_mixing(&a, &LinkStats::uniform(4, 0.5).unwrap()).is_err());
    }

    #[test]
    fn zero_links_expected_identity() {
        let a = AggregationMatrix::uniform(4);
        let q = LinkStats::uniform(4, 0.0).unwrap();
        assert_eq!(expected_mixing(&a, &q).unwrap(), Matrix::identity(4));
        assert_eq!(second_moment_analytic(&a, &q).unwrap(), Matrix::identity(4));
    }

    #[test]
    fn deterministic_links_have_no_deviation() {
        let a = AggregationMatrix::uniform(5);
        let q = LinkStats::uniform(5, 1.0).unwrap();
        let p_bar = expected_mixing(&a, &q).unwrap();
        let p2 = second_moment_analytic(&a, &q).unwrap();
        assert!(p2.max_abs_diff(&p_bar.matmul(&p_bar).unwrap()) < 1e-15);
        assert_eq!(deviation_norm(&a, &q).unwrap(), 0.0);
    }

    #[test]
    fn single_link_two_point_average() {
        // One link at q = 0.5: E[P²] is the average of I and the swap-mix squared.
        let a = AggregationMatrix::new(
            Matrix::from_rows(&[
                alloc::vec![0.6, 0.4, 0.0],
                alloc::vec![0.4, 0.6, 0.0],
                alloc::vec![0.0, 0.0, 1.0],
            ])
            .unwrap(),
        )
        .unwrap();
        let q = stats_with(3, &[(0, 1, 0.5)]);
        let up = realize_mixing(&a, &LinkMask::full(3, 0)).unwrap().p;
        let up2 = up.matmul(&up).unwrap();
        let expect = up2.add_scaled(&Matrix::identity(3), 1.0).scaled(0.5);
        assert!(second_moment_analytic(&a, &q).unwrap().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn monte_carlo_single_sample_deterministic_mask() {
        let a = AggregationMatrix::uniform(4);
        let q = LinkStats::uniform(4, 1.0).unwrap();
        let mc = second_moment_monte_carlo(&a, &q, 1, 9).unwrap();
        let p = realize_mixing(&a, &LinkMask::full(4, 0)).unwrap().p;
        assert_eq!(mc, p.matmul(&p).unwrap());
        assert!(second_moment_monte_carlo(&a, &q, 0, 9).is_err());
    }

    #[test]
    fn aggregation_matrix_validation() {
        let bad = Matrix::from_rows(&[alloc::vec![0.5, 0.6], alloc::vec![0.5, 0.5]]).unwrap();
        assert!(AggregationMatrix::new(bad).is_err());
        let neg = Matrix::from_rows(&[alloc::vec![1.5, -0.5], alloc::vec![-0.5, 1.5]]).unwrap();
        assert!(AggregationMatrix::new(neg).is_err());
        assert!(AggregationMatrix::new(Matrix::averaging(3)).is_ok());
    }
}
