//! Decomposable submodular minimization through the Lovász extension.
//!
//! Sets over a ground set of size `n <= 64` are bitmasks: bit `k` is set
//! when element `k` is a member. Term functions see their own support, so
//! bit `p` of a term mask is the `p`-th element of that term's support.

mod driver;
mod lovasz;

pub use driver::{minimize_decomposable, minimize_decomposable_with, sfm_program, SfmOutcome};
pub use lovasz::{lovasz_subgradient, lovasz_value, LovaszExtension, LovaszPoint, CUBE_TOL};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ground set [`brute_force_min`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Largest support a `table` term may have.
pub const TABLE_LIMIT: usize = 20;

/// A set function on `{0, .., size-1}`, evaluated on bitmasks.
pub trait SetFunction: Send + Sync {
    fn size(&self) -> usize;
    fn eval(&self, mask: u64) -> f64;
}

/// Term families, over positions in the term's support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "lowercase")]
pub enum TermKind {
    /// Weighted graph cut; edges `(u, v, w)` with `w >= 0`.
    Cut(Vec<(usize, usize, f64)>),
    /// `F(S) = Σ_{k∈S} w_k`.
    Modular(Vec<f64>),
    /// All `2^k` values indexed by mask; entry 0 must be 0.
    Table(Vec<f64>),
}

/// One summand `F_i(S ∩ V_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfmTerm {
    pub support: Vec<usize>,
    #[serde(flatten)]
    pub kind: TermKind,
}

impl SfmTerm {
    pub fn new(support: Vec<usize>, kind: TermKind) -> Result<Self> {
        let term = Self { support, kind };
        term.validate()?;
        Ok(term)
    }

    fn validate(&self) -> Result<()> {
        let k = self.support.len();
        if k == 0 {
            return Err(Error::InvalidArgument("term support is empty".into()));
        }
        let mut sorted = self.support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k {
            return Err(Error::InvalidArgument("term support has repeated elements".into()));
        }
        match &self.kind {
            TermKind::Cut(edges) => {
                for &(u, v, w) in edges {
                    if u >= k || v >= k || u == v {
                        return Err(Error::InvalidArgument(format!("cut edge ({u}, {v}) invalid for support of size {k}")));
                    }
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(Error::InvalidArgument(format!("cut weight {w} must be finite and nonnegative")));
                    }
                }
            }
            TermKind::Modular(w) => {
                if w.len() != k || w.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("modular term needs one finite weight per element".into()));
                }
            }
            TermKind::Table(values) => {
                if k > TABLE_LIMIT {
                    return Err(Error::TooLarge(format!("table term over {k} elements")));
                }
                if values.len() != 1 << k || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument(format!("table term needs {} finite values", 1u64 << k)));
                }
                if values[0] != 0.0 {
                    return Err(Error::InvalidArgument("table term must vanish on the empty set".into()));
                }
            }
        }
        Ok(())
    }

    /// Mask of `S ∩ V_i` in support positions, from a ground-set mask.
    pub fn restrict(&self, ground_mask: u64) -> u64 {
        self.support
            .iter()
            .enumerate()
            .fold(0, |m, (p, &k)| if ground_mask >> k & 1 == 1 { m | 1 << p } else { m })
    }
}

impl SetFunction for SfmTerm {
    fn size(&self) -> usize {
        self.support.len()
    }

    fn eval(&self, mask: u64) -> f64 {
        match &self.kind {
            TermKind::Cut(edges) => edges
                .iter()
                .filter(|&&(u, v, _)| (mask >> u & 1) != (mask >> v & 1))
                .map(|e| e.2)
                .sum(),
            TermKind::Modular(w) => (0..w.len()).filter(|&k| mask >> k & 1 == 1).map(|k| w[k]).sum(),
            TermKind::Table(values) => values[mask as usize],
        }
    }
}

/// `F(S) = Σ_i F_i(S ∩ V_i)` over a ground set of `ground_set` elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmodularInstance {
    pub ground_set: usize,
    pub terms: Vec<SfmTerm>,
}

impl SubmodularInstance {
    pub fn new(ground_set: usize, terms: Vec<SfmTerm>) -> Result<Self> {
        let inst = Self { ground_set, terms };
        inst.validate()?;
        Ok(inst)
    }

    /// Checks supports and term data; deserialized instances should be
    /// validated before use.
    pub fn validate(&self) -> Result<()> {
        if self.ground_set == 0 || self.ground_set > 64 {
            return Err(Error::InvalidArgument(format!("ground set size {} outside 1..=64", self.ground_set)));
        }
        if self.terms.is_empty() {
            return Err(Error::InvalidArgument("instance has no terms".into()));
        }
        for t in &self.terms {
            t.validate()?;
            if t.support.iter().any(|&k| k >= self.ground_set) {
                return Err(Error::InvalidArgument("term support outside the ground set".into()));
            }
        }
        Ok(())
    }

    /// Random instance with `n_terms` table terms on supports of size
    /// `support_sizes.0..=support_sizes.1`, scaled so that every term and
    /// the total take values in `[-1, 1]`.
    ///
    /// Each term is a random cut plus a random modular part plus a concave
    /// function of the cardinality, so it is submodular.
    pub fn random(ground_set: usize, n_terms: usize, support_sizes: (usize, usize), seed: u64) -> Result<Self> {
        let (lo, hi) = support_sizes;
        if lo == 0 || lo > hi || hi > ground_set || hi > TABLE_LIMIT || n_terms == 0 {
            return Err(Error::InvalidArgument("invalid random instance shape".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tables = Vec::with_capacity(n_terms);
        let mut supports = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            let k = rng.random_range(lo..=hi);
            let mut support = sample(&mut rng, ground_set, k).into_vec();
            support.sort_unstable();
            let mut edges = Vec::new();
            for u in 0..k {
                for v in u + 1..k {
                    if rng.random::<f64>() < 0.5 {
                        edges.push((u, v, rng.random::<f64>()));
                    }
                }
            }
            let beta = rng.random::<f64>();
            // Offsetting each weight by about half of its element's cut and
            // concave marginals keeps minimizers away from ∅ and V.
            let weights: Vec<f64> = (0..k)
                .map(|p| {
                    let incident: f64 = edges.iter().filter(|e| e.0 == p || e.1 == p).map(|e| e.2).sum();
                    rng.random_range(-1.0..1.0) - 0.5 * (incident + beta)
                })
                .collect();
            let cut = SfmTerm { support: (0..k).collect(), kind: TermKind::Cut(edges) };
            let modular = SfmTerm { support: (0..k).collect(), kind: TermKind::Modular(weights) };
            let table: Vec<f64> = (0..1u64 << k)
                .map(|m| cut.eval(m) + modular.eval(m) + beta * (m.count_ones() as f64).sqrt())
                .collect();
            tables.push(table);
            supports.push(support);
        }
        let spread: f64 = tables.iter().map(|t| t.iter().fold(0.0f64, |a, v| a.max(v.abs()))).sum();
        let scale = if spread > 0.0 { 1.0 / spread } else { 1.0 };
        let terms = supports
            .into_iter()
            .zip(tables)
            .map(|(support, t)| SfmTerm { support, kind: TermKind::Table(t.into_iter().map(|v| v * scale).collect()) })
            .collect();
        Self::new(ground_set, terms)
    }

    /// `max_i (|V_i|)`.
    pub fn max_support(&self) -> usize {
        self.terms.iter().map(|t| t.support.len()).max().unwrap_or(0)
    }
}

impl SetFunction for SubmodularInstance {
    fn size(&self) -> usize {
        self.ground_set
    }

    fn eval(&self, mask: u64) -> f64 {
        self.terms.iter().map(|t| t.eval(t.restrict(mask))).sum()
    }
}

/// Members of a mask, ascending.
pub fn mask_to_set(mask: u64) -> Vec<usize> {
    (0..64).filter(|&k| mask >> k & 1 == 1).collect()
}

pub fn set_to_mask(set: &[usize]) -> u64 {
    set.iter().fold(0, |m, &k| m | 1 << k)
}

/// Exhaustive minimum; the first minimizing mask in increasing order wins,
/// so ties go to `∅`.
pub fn brute_force_min(f: &dyn SetFunction) -> Result<(Vec<usize>, f64)> {
    let n = f.size();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(format!("brute force over {n} elements (limit {BRUTE_FORCE_LIMIT})")));
    }
    let mut best = (0u64, f.eval(0));
    for mask in 1..1u64 << n {
        let v = f.eval(mask);
        if v < best.1 {
            best = (mask, v);
        }
    }
    Ok((mask_to_set(best.0), best.1))
}

/// Best threshold set of `x`: the minimum of `F` over `∅` and the prefixes
/// of the descending sort. Never worse than `f̂(x)`.
pub fn round_to_set(f: &dyn SetFunction, x: &[f64]) -> Result<(Vec<usize>, f64)> {
    if x.len() != f.size() {
        return Err(Error::DimensionMismatch { expected: f.size(), got: x.len() });
    }
    let p = LovaszPoint::new(x)?;
    let mut best = (0u64, f.eval(0));
    let mut mask = 0u64;
    for &k in p.order() {
        mask |= 1 << k;
        let v = f.eval(mask);
        if v < best.1 {
            best = (mask, v);
        }
    }
    Ok((mask_to_set(best.0), best.1))
}

/// Largest diminishing-returns violation `F(T+i) - F(T) - F(S+i) + F(S)`
/// over `trials` random triples `S ⊆ T`, `i ∉ T`; at most `0` up to
/// rounding for submodular `F`.
pub fn submodularity_violation(f: &dyn SetFunction, trials: usize, seed: u64) -> f64 {
    let n = f.size();
    if n < 1 {
        return 0.0;
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let i = rng.random_range(0..n);
        let t = rng.random::<u64>() & full & !(1 << i);
        let s = t & rng.random::<u64>();
        let gap = (f.eval(t | 1 << i) - f.eval(t)) - (f.eval(s | 1 << i) - f.eval(s));
        worst = worst.max(gap);
    }
    worst
}
