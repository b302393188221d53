use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{min_norm_solve, nullspace_basis, Matrix, Vector};

/// `{x : A x = b}` parametrized as `x = x_p + N y` with `N` an orthonormal
/// basis of `ker(A)` and `x_p` the minimum-norm solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineSubspace {
    a: Matrix,
    b: Vector,
    particular: Vector,
    basis: Matrix,
}

impl AffineSubspace {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if a.ncols() == 0 {
            return Err(Error::InvalidArgument("affine subspace needs at least one coordinate".into()));
        }
        let particular = min_norm_solve(&a, &b)?;
        let basis = nullspace_basis(&a);
        Ok(Self { a, b, particular, basis })
    }

    /// The whole space `R^dim` (no constraints).
    pub fn free(dim: usize) -> Self {
        Self {
            a: Matrix::zeros(0, dim),
            b: Vector::zeros(0),
            particular: Vector::zeros(dim),
            basis: Matrix::identity(dim, dim),
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// Dimension of the subspace, `dim - rank(A)`.
    pub fn reduced_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn constraints(&self) -> (&Matrix, &Vector) {
        (&self.a, &self.b)
    }

    pub fn particular(&self) -> &Vector {
        &self.particular
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// `x_p + N y`.
    pub fn embed(&self, y: &Vector) -> Result<Vector> {
        check_dim(self.reduced_dim(), y.len())?;
        Ok(&self.particular + &self.basis * y)
    }

    /// Reduced coordinates `Nᵀ (x - x_p)`; an orthogonal projection for
    /// points off the subspace.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        Ok(self.basis.tr_mul(&(x - &self.particular)))
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn snap(&self, x: &Vector) -> Result<Vector> {
        self.embed(&self.project(x)?)
    }

    /// `‖A x - b‖₂`.
    pub fn residual(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok((&self.a * x - &self.b).norm())
    }
}
