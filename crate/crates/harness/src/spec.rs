//! Problem descriptions and the generators that turn them into instances.

use std::sync::Arc;

use decompopt::oracles::{ConvexFunction, MaxAffine, OneNorm, SquaredDiff, SquaredNorm, Term};
use decompopt::sfm::SubmodularInstance;
use decompopt::{Error, Result, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A problem file: `{"kind": .., "parameters": {..}, "seed": .., "epsilon": .., "R": .., "r": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(flatten)]
    pub kind: ProblemKind,
    #[serde(default)]
    pub seed: u64,
    pub epsilon: f64,
    /// Trust-region radius around `θ0`; each kind has a default.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub outer_radius: Option<f64>,
    /// When set, per-block inner balls of this radius are searched for
    /// instead of taken from the construction.
    #[serde(rename = "r", default, skip_serializing_if = "Option::is_none")]
    pub inner_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum ProblemKind {
    /// Random decomposable submodular instance.
    Sfm(SfmParams),
    /// `(θ1-1)² + Σ_{i<n} (θi-θ(i+1))² + θn²`.
    ChainQuadratic { n: usize },
    /// `Σ_i max_k (a_ik·θ_{V_i} + b_ik)` with random pieces.
    PiecewiseLinear(PiecewiseParams),
    CustomEpigraph(CustomParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfmParams {
    pub ground_set: usize,
    pub terms: usize,
    pub support_min: usize,
    pub support_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseParams {
    pub dim: usize,
    pub terms: usize,
    pub pieces: usize,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomParams {
    pub dim: usize,
    pub terms: Vec<CustomTerm>,
    /// Defaults to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomTerm {
    pub support: Vec<usize>,
    pub lipschitz: f64,
    pub function: FunctionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionSpec {
    OneNorm { center: Vec<f64> },
    MaxAffine { slopes: Vec<Vec<f64>>, intercepts: Vec<f64> },
    SquaredNorm { center: Vec<f64>, scale: f64 },
    SquaredDiff { scale: f64 },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<Arc<dyn ConvexFunction>> {
        Ok(match self {
            FunctionSpec::OneNorm { center } => Arc::new(OneNorm { center: Vector::from_vec(center.clone()) }),
            FunctionSpec::MaxAffine { slopes, intercepts } => Arc::new(MaxAffine::new(
                slopes.iter().map(|s| Vector::from_vec(s.clone())).collect(),
                intercepts.clone(),
            )?),
            FunctionSpec::SquaredNorm { center, scale } => {
                Arc::new(SquaredNorm { center: Vector::from_vec(center.clone()), scale: *scale })
            }
            FunctionSpec::SquaredDiff { scale } => Arc::new(SquaredDiff { scale: *scale }),
        })
    }
}

/// `min Σ_i f_i(θ)` over `‖θ_{V_i} - θ0_{V_i}‖ <= R` (and the domain box).
#[derive(Clone)]
pub struct EpigraphInstance {
    pub terms: Vec<Term>,
    pub theta0: Vector,
    pub radius: f64,
    pub domain: Option<(f64, f64)>,
    pub optimum: Option<f64>,
}

impl EpigraphInstance {
    /// Largest term Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        self.terms.iter().map(|t| t.lipschitz).fold(0.0, f64::max)
    }
}

pub enum Generated {
    Sfm(SubmodularInstance),
    Epigraph(EpigraphInstance),
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/2), got {}", self.epsilon)));
        }
        if self.outer_radius.is_some_and(|r| !(r > 0.0)) || self.inner_radius.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::InvalidArgument("radii must be positive".into()));
        }
        Ok(())
    }
}

/// Deterministic instance for `spec`.
pub fn generate(spec: &ProblemSpec) -> Result<Generated> {
    spec.validate()?;
    match &spec.kind {
        ProblemKind::Sfm(p) => Ok(Generated::Sfm(SubmodularInstance::random(
            p.ground_set,
            p.terms,
            (p.support_min, p.support_max),
            spec.seed,
        )?)),
        ProblemKind::ChainQuadratic { n } => chain_quadratic(*n, spec.outer_radius).map(Generated::Epigraph),
        ProblemKind::PiecewiseLinear(p) => piecewise_linear(p, spec.seed, spec.outer_radius).map(Generated::Epigraph),
        ProblemKind::CustomEpigraph(p) => custom(p, spec.outer_radius).map(Generated::Epigraph),
    }
}

/// Minimizer `θk = 1 - k/(n+1)` and minimum `1/(n+1)` of the chain.
pub fn chain_optimum(n: usize) -> (Vector, f64) {
    let h = 1.0 / (n as f64 + 1.0);
    (Vector::from_fn(n, |k, _| 1.0 - (k + 1) as f64 * h), h)
}

/// Terms `(θ1-1)², (θ1-θ2)², .., (θ(n-1)-θn)², θn²` around `θ0 = 0`.
/// The default radius `sqrt(n/2)` exceeds the minimizer's norm, which is
/// about `sqrt(n/3)`.
fn chain_quadratic(n: usize, radius: Option<f64>) -> Result<EpigraphInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("chain needs n >= 1".into()));
    }
    let r = radius.unwrap_or((n as f64 / 2.0).sqrt());
    let mut terms = vec![Term {
        function: Arc::new(SquaredNorm { center: Vector::from_element(1, 1.0), scale: 1.0 }),
        support: vec![0],
        lipschitz: 2.0 * (r + 1.0),
    }];
    for i in 0..n - 1 {
        terms.push(Term { function: Arc::new(SquaredDiff { scale: 1.0 }), support: vec![i, i + 1], lipschitz: 4.0 * r });
    }
    terms.push(Term {
        function: Arc::new(SquaredNorm { center: Vector::zeros(1), scale: 1.0 }),
        support: vec![n - 1],
        lipschitz: 2.0 * r,
    });
    let (star, value) = chain_optimum(n);
    let optimum = (star.norm() <= r).then_some(value);
    Ok(EpigraphInstance { terms, theta0: Vector::zeros(n), radius: r, domain: None, optimum })
}

/// Supports are `support` consecutive coordinates (cyclically) starting at
/// random offsets; slopes and intercepts are uniform in `[-1, 1]`.
fn piecewise_linear(p: &PiecewiseParams, seed: u64, radius: Option<f64>) -> Result<EpigraphInstance> {
    if p.dim == 0 || p.terms == 0 || p.pieces == 0 || p.support == 0 || p.support > p.dim {
        return Err(Error::InvalidArgument("invalid piecewise-linear shape".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(p.terms);
    for _ in 0..p.terms {
        let start = rng.random_range(0..p.dim);
        let mut support: Vec<usize> = (0..p.support).map(|k| (start + k) % p.dim).collect();
        support.sort_unstable();
        let slopes: Vec<Vector> =
            (0..p.pieces).map(|_| Vector::from_fn(p.support, |_, _| rng.random_range(-1.0..1.0))).collect();
        let intercepts: Vec<f64> = (0..p.pieces).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lipschitz = slopes.iter().map(|s| s.norm()).fold(1e-3, f64::max);
        terms.push(Term { function: Arc::new(MaxAffine::new(slopes, intercepts)?), support, lipschitz });
    }
    Ok(EpigraphInstance {
        terms,
        theta0: Vector::zeros(p.dim),
        radius: radius.unwrap_or(1.0),
        domain: None,
        optimum: None,
    })
}

fn custom(p: &CustomParams, radius: Option<f64>) -> Result<EpigraphInstance> {
    let theta0 = match &p.theta0 {
        Some(v) if v.len() == p.dim => Vector::from_vec(v.clone()),
        Some(_) => return Err(Error::InvalidArgument("theta0 length differs from dim".into())),
        None => Vector::zeros(p.dim),
    };
    let mut terms = Vec::with_capacity(p.terms.len());
    for t in &p.terms {
        let function = t.function.build()?;
        if function.dim() != t.support.len() {
            return Err(Error::InvalidArgument("term function dimension differs from its support".into()));
        }
        terms.push(Term { function, support: t.support.clone(), lipschitz: t.lipschitz });
    }
    Ok(EpigraphInstance { terms, theta0, radius: radius.unwrap_or(1.0), domain: p.domain, optimum: p.optimum })
}
