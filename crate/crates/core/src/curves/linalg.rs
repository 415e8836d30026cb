//! Dense kernels for tall, narrow least-squares problems (a handful of
//! columns). Matrices are row-major `Vec<Vec<f64>>`, copied into nalgebra for the factorizations.

use nalgebra::{DMatrix, DVector};

/// Outcome of a least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub x: Vec<f64>,
    /// Numerical rank of the design matrix.
    pub rank: usize,
}

/// Relative threshold on the pivoted diagonal of R (or on singular values)
/// below which a direction counts as rank deficient.
const RANK_TOL: f64 = 1e-11;

/// Least squares `min ||A x - b||` by column-pivoted QR on unit-norm
/// columns. Falls back to the minimum-norm SVD solution when `A` is rank
/// deficient.
pub fn lstsq(a: &[Vec<f64>], b: &[f64]) -> LstsqSolution {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    assert_eq!(m, b.len());
    if n == 0 {
        return LstsqSolution { x: vec![], rank: 0 };
    }

    let scale: Vec<f64> = (0..n)
        .map(|j| {
            let s = a.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let scaled = DMatrix::from_fn(m, n, |i, j| a[i][j] / scale[j]);
    let (q, r, p) = scaled.col_piv_qr().unpack();

    let steps = n.min(m);
    let r00 = r[(0, 0)].abs();
    let rank = (0..steps).filter(|&k| r[(k, k)].abs() > RANK_TOL * r00.max(f64::MIN_POSITIVE)).count();
    if rank < n {
        return min_norm_svd(a, b);
    }

    // A P = Q R, so x = P R^-1 Q^T b.
    let qtb = q.transpose() * DVector::from_column_slice(b);
    let mut z = r
        .view((0, 0), (n, n))
        .solve_upper_triangular(&qtb.rows(0, n))
        .expect("full-rank R is invertible");
    p.inv_permute_rows(&mut z);
    let x = (0..n).map(|j| z[j] / scale[j]).collect();
    LstsqSolution { x, rank: n }
}

/// Minimum-norm least-squares solution via SVD, dropping singular values
/// below `RANK_TOL` relative to the largest.
pub fn min_norm_svd(a: &[Vec<f64>], b: &[f64]) -> LstsqSolution {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let svd = DMatrix::from_fn(m, n, |i, j| a[i][j]).svd(true, true);
    let smax = svd.singular_values.max();
    let tol = RANK_TOL * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol && s > 0.0).count();
    let x = svd
        .solve(&DVector::from_column_slice(b), tol.max(f64::MIN_POSITIVE))
        .expect("SVD computed with U and V");
    LstsqSolution {
        x: x.iter().copied().collect(),
        rank,
    }
}

/// Solves the small dense system `M x = rhs` by LU with partial pivoting.
/// Returns `None` when `M` is singular.
pub fn solve(m: Vec<Vec<f64>>, rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mat = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    if mat.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let x = mat.lu().solve(&DVector::from_vec(rhs))?;
    x.iter().all(|v| v.is_finite()).then(|| x.iter().copied().collect())
}
