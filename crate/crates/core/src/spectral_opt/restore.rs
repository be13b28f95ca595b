use crate::mixing::AggregationMatrix;
use crate::{Error, Matrix, Result};

/// Joint residual below which alternation stops early.
const EARLY_EXIT: f64 = 1e-13;

/// Return raw weights to the feasible set: clip negatives, then alternate
/// `A ← ½(A + Aᵀ)` and `a_ij ← a_ij / Σ_k a_ik` up to `sweeps` times.
///
/// Every step only touches a node's own row and its neighbors' entries for
/// the same pair, so the procedure is local. Zeros stay zeros.
pub fn restore_feasibility(a_raw: &Matrix, sweeps: usize) -> Result<AggregationMatrix> {
    if !a_raw.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a_raw.rows(),
            found: a_raw.cols(),
        });
    }
    if !a_raw.all_finite() {
        return Err(Error::invalid("weights", "entries must be finite"));
    }
    if sweeps == 0 {
        return Err(Error::invalid("restoration_sweeps", "must be at least 1"));
    }
    let n = a_raw.rows();
    let mut a = Matrix::from_fn(n, n, |i, j| a_raw[(i, j)].max(0.0));
    for _ in 0..sweeps {
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = s;
                a[(j, i)] = s;
            }
        }
        for i in 0..n {
            let row = a.row_mut(i);
            let total: f64 = row.iter().sum();
            if !(total > 0.0) {
                return Err(Error::DegenerateRow { row: i });
            }
            row.iter_mut().for_each(|v| *v /= total);
        }
        if a.symmetry_residual().max(a.row_sum_residual()) < EARLY_EXIT {
            break;
        }
    }
    Ok(AggregationMatrix::new_unchecked(a))
}
