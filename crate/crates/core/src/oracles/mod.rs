//! Separation oracles, the epigraph reduction from subgradient oracles, and
//! call accounting.

mod epigraph;
mod functions;
mod known;
mod program;

pub use epigraph::EpigraphBlock;
pub use functions::{ConvexFunction, MaxAffine, OneNorm, SquaredDiff, SquaredNorm};
pub use known::KnownBody;
pub use program::{EpigraphProgram, Term};

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Halfspace;
use crate::linalg::Vector;

#[derive(Debug, Clone, PartialEq)]
pub enum SeparationResult {
    Member,
    /// A halfspace containing the set and strictly excluding the query.
    Separated(Halfspace),
}

impl SeparationResult {
    pub fn is_member(&self) -> bool {
        matches!(self, SeparationResult::Member)
    }
}

pub trait SeparationOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn separate(&self, q: &Vector) -> Result<SeparationResult>;
}

impl<T: SeparationOracle + ?Sized> SeparationOracle for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn separate(&self, q: &Vector) -> Result<SeparationResult> {
        (**self).separate(q)
    }
}

impl<T: SeparationOracle + ?Sized> SeparationOracle for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn separate(&self, q: &Vector) -> Result<SeparationResult> {
        (**self).separate(q)
    }
}

/// Thread-safe call counters.
#[derive(Debug, Default)]
pub struct OracleCounter {
    separation: AtomicU64,
    subgradient: AtomicU64,
    evaluation: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSnapshot {
    pub separation_calls: u64,
    pub subgradient_calls: u64,
    pub evaluation_calls: u64,
}

impl OracleCounter {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn record_separation(&self) {
        self.separation.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_subgradient(&self) {
        self.subgradient.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_evaluations(&self, n: u64) {
        self.evaluation.fetch_add(n, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            separation_calls: self.separation.load(Ordering::Relaxed),
            subgradient_calls: self.subgradient.load(Ordering::Relaxed),
            evaluation_calls: self.evaluation.load(Ordering::Relaxed),
        }
    }
}

/// Pass-through oracle that counts every separation call.
pub struct CountingOracle<O> {
    inner: O,
    counter: Arc<OracleCounter>,
}

pub fn wrap_counting<O: SeparationOracle>(inner: O, counter: Arc<OracleCounter>) -> CountingOracle<O> {
    CountingOracle { inner, counter }
}

impl<O> CountingOracle<O> {
    pub fn counter(&self) -> &Arc<OracleCounter> {
        &self.counter
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: SeparationOracle> SeparationOracle for CountingOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn separate(&self, q: &Vector) -> Result<SeparationResult> {
        self.counter.record_separation();
        self.inner.separate(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ball;

    #[test]
    fn counter_counts_every_call() {
        let counter = OracleCounter::new();
        let oracle = wrap_counting(KnownBody::Ball(Ball::new(Vector::zeros(2), 1.0).unwrap()), counter.clone());
        let mut log = 0;
        for q in [[0.0, 0.0], [2.0, 0.0], [0.5, 0.5]] {
            oracle.separate(&Vector::from_vec(q.to_vec())).unwrap();
            log += 1;
        }
        assert_eq!(counter.snapshot().separation_calls, log);
        assert_eq!(counter.snapshot().subgradient_calls, 0);
    }
}
