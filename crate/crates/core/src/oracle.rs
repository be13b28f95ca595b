//! Slow reference routines. Nothing on the fast path depends on these except
//! for tracing; they exist so the fast routines have something independent to
//! be checked against.

use alloc::vec::Vec;

use crate::linkmodel::{LinkMask, LinkStats};
use crate::mixing::{self, AggregationMatrix};
use crate::{Error, Matrix, Result};

/// Largest number of random links [`enumerate_second_moment`] will expand.
pub const ENUMERATION_BUDGET: usize = 20;

/// Eigenvalues in descending order, eigenvectors as matching columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    /// Index of the eigenvector most aligned with the all-ones direction.
    pub fn consensus_index(&self) -> usize {
        let n = self.eigenvalues.len();
        let mut best = 0;
        let mut best_align = f64::NEG_INFINITY;
        for k in 0..n {
            let s: f64 = (0..n).map(|i| self.eigenvectors[(i, k)]).sum();
            let align = s.abs();
            if align > best_align {
                best_align = align;
                best = k;
            }
        }
        best
    }
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eig_sym(s: &Matrix) -> Result<EigenDecomposition> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch {
            expected: s.rows(),
            found: s.cols(),
        });
    }
    if !s.all_finite() {
        return Err(Error::invalid("matrix", "entries must be finite"));
    }
    let asym = s.symmetry_residual();
    if asym > 1e-12 * s.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let n = s.rows();
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off == 0.0 || libm::sqrt(off) <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (theta.abs() + libm::hypot(theta, 1.0));
                let c = 1.0 / libm::hypot(t, 1.0);
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].total_cmp(&a[(x, x)]));
    let eigenvalues = order.iter().map(|&k| a[(k, k)]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `max |λ_k|` over every eigenpair except the consensus one.
pub fn rho_nontrivial(s: &Matrix) -> Result<f64> {
    let eig = eig_sym(s)?;
    let c = eig.consensus_index();
    Ok(eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != c)
        .fold(0.0, |m: f64, (_, v)| m.max(v.abs())))
}

/// `‖S‖₂` for symmetric `S`.
pub fn spectral_norm(s: &Matrix) -> Result<f64> {
    Ok(eig_sym(s)?.eigenvalues.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
}

/// Exact `E[P²]` by summing over every joint state of the random links.
pub fn enumerate_second_moment(a: &AggregationMatrix, stats: &LinkStats) -> Result<Matrix> {
    let n = stats.n();
    if a.n() != n {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: n,
        });
    }
    let random = stats.stochastic_pairs();
    if random.len() > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget {
            links: random.len(),
            max: ENUMERATION_BUDGET,
        });
    }
    let mut total = Matrix::zeros(n, n);
    for state in 0u64..(1u64 << random.len()) {
        let mut prob = 1.0;
        for (bit, &(_, _, q)) in random.iter().enumerate() {
            prob *= if state >> bit & 1 == 1 { q } else { 1.0 - q };
        }
        let mask = LinkMask::from_fn(n, 0, |i, j| {
            let q = stats.get(i, j);
            match random.iter().position(|&(ri, rj, _)| ri == i && rj == j) {
                Some(bit) => state >> bit & 1 == 1,
                None => q == 1.0,
            }
        });
        let p = mixing::realize_mixing(a, &mask)?.p;
        let p2 = p.matmul(&p)?;
        total = total.add_scaled(&p2, prob);
    }
    Ok(total)
}

/// `P̄` for an arbitrary (not necessarily feasible) weight matrix, built
/// entry by entry from its off-diagonal part.
pub fn expected_mixing_raw(a: &Matrix, stats: &LinkStats) -> Matrix {
    let n = stats.n();
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0;
        for j in 0..n {
            if i != j {
                let w = 0.5 * (a[(i, j)] + a[(j, i)]) * stats.get(i, j);
                p[(i, j)] = w;
                diag -= w;
            }
        }
        p[(i, i)] = diag;
    }
    p
}

/// Central differences of `ρ(P̄(A))` under paired perturbations
/// `a_ij, a_ji ± ε`, reported per entry (so each pair's total change is
/// split evenly between `(i, j)` and `(j, i)`). Diagonal left at zero.
pub fn finite_diff_rho(a: &AggregationMatrix, stats: &LinkStats, epsilon: f64) -> Result<Matrix> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be finite and positive"));
    }
    let n = stats.n();
    if a.n() != n {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: n,
        });
    }
    let base = a.as_matrix();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut plus = base.clone();
            plus[(i, j)] += epsilon;
            plus[(j, i)] += epsilon;
            let mut minus = base.clone();
            minus[(i, j)] -= epsilon;
            minus[(j, i)] -= epsilon;
            let up = rho_nontrivial(&expected_mixing_raw(&plus, stats))?;
            let down = rho_nontrivial(&expected_mixing_raw(&minus, stats))?;
            let d = (up - down) / (4.0 * epsilon);
            g[(i, j)] = d;
            g[(j, i)] = d;
        }
    }
    Ok(g)
}
