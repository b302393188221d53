//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Column vector type used throughout the crate.
pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative rank tolerance for the orthogonal factorizations.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of ker(A), computed from an SVD of A padded to a
/// square (or taller) matrix so that the full right singular basis is
/// available.
pub fn nullspace_basis(a: &Matrix) -> Matrix {
    let cols = a.ncols();
    if cols == 0 {
        return Matrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return Matrix::identity(cols, cols);
    }
    let rows = a.nrows().max(cols);
    let mut padded = Matrix::zeros(rows, cols);
    padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.max();
    let tol = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    let null_rows: Vec<usize> = (0..cols)
        .filter(|&k| svd.singular_values[k] <= tol)
        .collect();
    let mut basis = Matrix::zeros(cols, null_rows.len());
    for (j, &k) in null_rows.iter().enumerate() {
        basis.set_column(j, &v_t.row(k).transpose());
    }
    basis
}

/// Minimum-norm solution of `A y = rhs`. Fails when the system is
/// inconsistent beyond `1e-9 * (1 + |rhs|)`.
pub fn min_norm_solve(a: &Matrix, rhs: &Vector) -> Result<Vector> {
    if a.nrows() != rhs.len() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: rhs.len() });
    }
    if a.nrows() == 0 {
        return Ok(Vector::zeros(a.ncols()));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    let y = svd
        .solve(rhs, tol)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residual = (a * &y - rhs).norm();
    if residual > 1e-9 * (1.0 + rhs.norm()) {
        return Err(Error::InconsistentSystem { residual });
    }
    Ok(y)
}

/// Lower Cholesky factor of `m + jitter*I`, growing the jitter until the
/// factorization succeeds.
pub fn robust_cholesky(m: &Matrix) -> Matrix {
    let n = m.nrows();
    let scale = (m.trace() / n.max(1) as f64).abs().max(1e-300);
    let mut jitter = 1e-12 * scale;
    loop {
        let shifted = m + Matrix::identity(n, n) * jitter;
        if let Some(ch) = shifted.cholesky() {
            return ch.l();
        }
        jitter *= 10.0;
        if jitter > 1e6 * scale {
            return Matrix::identity(n, n) * scale.sqrt();
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_single_row() {
        let a = Matrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let n = nullspace_basis(&a);
        assert_eq!(n.ncols(), 1);
        assert!((&a * &n).norm() < 1e-12);
        assert!(((n.transpose() * &n)[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nullspace_handles_redundant_rows() {
        let a = Matrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, 1.0, -1.0, 0.0, 0.0, 1.0, -1.0]);
        let n = nullspace_basis(&a);
        assert_eq!(n.ncols(), 1);
        assert!((&a * &n).norm() < 1e-10);
    }

    #[test]
    fn min_norm_solution_of_sum_constraint() {
        let a = Matrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let y = min_norm_solve(&a, &Vector::from_vec(vec![1.0])).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-12 && (y[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_system_is_rejected() {
        let a = Matrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let err = min_norm_solve(&a, &Vector::from_vec(vec![0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::InconsistentSystem { .. }));
    }
}
