use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;

/// A convex function with a subgradient oracle.
pub trait ConvexFunction: Send + Sync {
    fn dim(&self) -> usize;

    /// Value and one subgradient at `x`.
    fn value_and_subgradient(&self, x: &Vector) -> Result<(f64, Vector)>;

    fn value(&self, x: &Vector) -> Result<f64> {
        Ok(self.value_and_subgradient(x)?.0)
    }
}

/// `‖x - center‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneNorm {
    pub center: Vector,
}

impl ConvexFunction for OneNorm {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value_and_subgradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        check_dim(self.dim(), x.len())?;
        let diff = x - &self.center;
        Ok((diff.abs().sum(), diff.map(|v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 })))
    }
}

/// `max_k (a_k·x + b_k)`; ties go to the lowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxAffine {
    slopes: Vec<Vector>,
    intercepts: Vec<f64>,
}

impl MaxAffine {
    pub fn new(slopes: Vec<Vector>, intercepts: Vec<f64>) -> Result<Self> {
        if slopes.is_empty() || slopes.len() != intercepts.len() {
            return Err(Error::InvalidArgument("max-affine needs matching nonempty slopes and intercepts".into()));
        }
        let d = slopes[0].len();
        for s in &slopes {
            check_dim(d, s.len())?;
        }
        Ok(Self { slopes, intercepts })
    }

    pub fn slopes(&self) -> &[Vector] {
        &self.slopes
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }
}

impl ConvexFunction for MaxAffine {
    fn dim(&self) -> usize {
        self.slopes[0].len()
    }

    fn value_and_subgradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        check_dim(self.dim(), x.len())?;
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (k, (a, b)) in self.slopes.iter().zip(&self.intercepts).enumerate() {
            let v = a.dot(x) + b;
            if v > best_val {
                best_val = v;
                best = k;
            }
        }
        Ok((best_val, self.slopes[best].clone()))
    }
}

/// `scale·‖x - center‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredNorm {
    pub center: Vector,
    pub scale: f64,
}

impl ConvexFunction for SquaredNorm {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value_and_subgradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        check_dim(self.dim(), x.len())?;
        let diff = x - &self.center;
        Ok((self.scale * diff.norm_squared(), diff * (2.0 * self.scale)))
    }
}

/// `scale·(x_0 - x_1)²` on two coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDiff {
    pub scale: f64,
}

impl ConvexFunction for SquaredDiff {
    fn dim(&self) -> usize {
        2
    }

    fn value_and_subgradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        check_dim(2, x.len())?;
        let d = x[0] - x[1];
        let g = 2.0 * self.scale * d;
        Ok((self.scale * d * d, Vector::from_vec(vec![g, -g])))
    }
}
