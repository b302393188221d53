use std::sync::Arc;

use super::SetFunction;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::oracles::{ConvexFunction, OracleCounter};

/// Tolerance for coordinates outside `[0, 1]` before they are clamped.
pub const CUBE_TOL: f64 = 1e-12;

/// A point of the unit cube with its descending sort order.
///
/// Ties go to the lower index first.
#[derive(Debug, Clone, PartialEq)]
pub struct LovaszPoint {
    x: Vec<f64>,
    order: Vec<usize>,
}

impl LovaszPoint {
    /// Clamps coordinates within [`CUBE_TOL`] of the cube; rejects the rest.
    pub fn new(x: &[f64]) -> Result<Self> {
        let mut clamped = Vec::with_capacity(x.len());
        for &v in x {
            if !(-CUBE_TOL..=1.0 + CUBE_TOL).contains(&v) {
                return Err(Error::InvalidArgument(format!("coordinate {v} outside [0, 1]")));
            }
            clamped.push(v.clamp(0.0, 1.0));
        }
        let order = descending_order(&clamped);
        Ok(Self { x: clamped, order })
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

fn descending_order(x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    order
}

/// Values `F(first j)` of the prefixes of `order`, `j = 1..=k`.
fn prefix_values(f: &dyn SetFunction, order: &[usize]) -> Vec<f64> {
    let mut mask = 0u64;
    order
        .iter()
        .map(|&k| {
            mask |= 1 << k;
            f.eval(mask)
        })
        .collect()
}

fn check_len(f: &dyn SetFunction, x: &[f64]) -> Result<()> {
    if f.size() != x.len() {
        return Err(Error::DimensionMismatch { expected: f.size(), got: x.len() });
    }
    Ok(())
}

/// `f̂(x) = Σ_j (F(first j) - F(first j-1)) x_π(j)`; `|V|` evaluations.
pub fn lovasz_value(f: &dyn SetFunction, x: &[f64]) -> Result<f64> {
    check_len(f, x)?;
    let p = LovaszPoint::new(x)?;
    Ok(sort_formula(&p.x, &p.order, &prefix_values(f, &p.order), 0.0).0)
}

/// Prefix-difference subgradient of `f̂` at `x`, with the value;
/// `|V| + 1` evaluations.
pub fn lovasz_subgradient(f: &dyn SetFunction, x: &[f64]) -> Result<(f64, Vector)> {
    check_len(f, x)?;
    let p = LovaszPoint::new(x)?;
    let empty = f.eval(0);
    Ok(sort_formula(&p.x, &p.order, &prefix_values(f, &p.order), empty))
}

fn sort_formula(x: &[f64], order: &[usize], prefixes: &[f64], empty: f64) -> (f64, Vector) {
    let mut g = Vector::zeros(x.len());
    let mut value = 0.0;
    let mut prev = empty;
    for (&k, &fk) in order.iter().zip(prefixes) {
        g[k] = fk - prev;
        value += g[k] * x[k];
        prev = fk;
    }
    (value, g)
}

/// Lovász extension of one set function as a [`ConvexFunction`].
///
/// The sort formula is evaluated as is at any point, which extends `f̂`
/// positively homogeneously off the cube; the epigraph domain box keeps
/// the solver on the cube.
pub struct LovaszExtension {
    f: Arc<dyn SetFunction>,
    counter: Option<Arc<OracleCounter>>,
}

impl LovaszExtension {
    pub fn new(f: Arc<dyn SetFunction>) -> Self {
        Self { f, counter: None }
    }

    /// Records `|V| + 1` evaluation calls per query.
    pub fn with_counter(mut self, counter: Arc<OracleCounter>) -> Self {
        self.counter = Some(counter);
        self
    }
}

impl ConvexFunction for LovaszExtension {
    fn dim(&self) -> usize {
        self.f.size()
    }

    fn value_and_subgradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        check_len(self.f.as_ref(), x.as_slice())?;
        let order = descending_order(x.as_slice());
        let empty = self.f.eval(0);
        let prefixes = prefix_values(self.f.as_ref(), &order);
        if let Some(c) = &self.counter {
            c.record_evaluations(order.len() as u64 + 1);
        }
        Ok(sort_formula(x.as_slice(), &order, &prefixes, empty))
    }
}
