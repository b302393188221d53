//! Hit-and-run sampling from uniform and exponential densities on convex
//! bodies, with parallel independent chains and batch-means error bars.

mod bodies;

pub use bodies::{chord_by_bisection, ConvexBody, PredicateBody, ProductBody};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{Matrix, Vector};

/// Target density on the body, up to normalization.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform,
    /// `exp(θ·x)`; the solver uses `θ = -t·c`.
    Exponential(Vector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Steps discarded per chain; defaults to `200·dim`.
    pub burn_in: Option<usize>,
    /// Samples kept in total across all chains.
    pub n_samples: usize,
    /// Steps between kept samples; defaults to `dim`.
    pub thinning: Option<usize>,
    pub seed: u64,
    pub chains: usize,
}

impl ChainConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { burn_in: None, n_samples, thinning: None, seed, chains: 4 }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = Some(burn_in);
        self
    }

    pub fn with_thinning(mut self, thinning: usize) -> Self {
        self.thinning = Some(thinning);
        self
    }

    pub fn with_chains(mut self, chains: usize) -> Self {
        self.chains = chains;
        self
    }
}

/// Consecutive near-zero chords tolerated before giving up.
const MAX_DEGENERATE: usize = 100;

/// Samples from every chain, concatenated in chain order.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub samples: Vec<Vector>,
    /// Number of samples contributed by each chain.
    pub chain_lengths: Vec<usize>,
    /// Last state of each chain, usable as a warm start.
    pub final_states: Vec<Vector>,
}

/// Sample mean and covariance with batch-means error bars.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub mean: Vector,
    pub covariance: Matrix,
    pub n: usize,
    /// Per-coordinate batch-means standard errors.
    pub stderr: Vector,
    /// Means of consecutive batches within each chain.
    pub batch_means: Vec<Vector>,
}

impl MomentEstimate {
    /// Batch-means standard error of `w·mean`.
    pub fn stderr_of(&self, w: &Vector) -> f64 {
        let vals: Vec<f64> = self.batch_means.iter().map(|m| w.dot(m)).collect();
        let k = vals.len();
        if k < 2 {
            return f64::INFINITY;
        }
        let mean = vals.iter().sum::<f64>() / k as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        (var / k as f64).sqrt()
    }

    /// Applies the affine map `x -> offset + M x` to the estimate.
    pub fn map_affine(&self, offset: &Vector, m: &Matrix) -> MomentEstimate {
        let batch_means = self.batch_means.iter().map(|b| offset + m * b).collect();
        finish(offset + m * &self.mean, m * &self.covariance * m.transpose(), self.n, batch_means)
    }
}

const BATCHES_PER_CHAIN: usize = 5;

impl SampleSet {
    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.len())
    }

    pub fn moments(&self) -> Result<MomentEstimate> {
        estimate_moments(&self.samples, &self.chain_lengths)
    }
}

fn finish(mean: Vector, covariance: Matrix, n: usize, batch_means: Vec<Vector>) -> MomentEstimate {
    let d = mean.len();
    let mut est = MomentEstimate { mean, covariance, n, stderr: Vector::zeros(d), batch_means };
    est.stderr = Vector::from_fn(d, |k, _| {
        let mut e = Vector::zeros(d);
        e[k] = 1.0;
        est.stderr_of(&e)
    });
    est
}

/// Sample mean, covariance (denominator `n - 1`) and batch-means errors.
/// `chain_lengths` splits `samples` into consecutive independent chains.
pub fn estimate_moments(samples: &[Vector], chain_lengths: &[usize]) -> Result<MomentEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidArgument("moment estimate needs at least two samples".into()));
    }
    if chain_lengths.iter().sum::<usize>() != n {
        return Err(Error::InvalidArgument("chain lengths do not cover the samples".into()));
    }
    let d = samples[0].len();
    let mut mean = Vector::zeros(d);
    for s in samples {
        check_dim(d, s.len())?;
        mean += s;
    }
    mean /= n as f64;
    let mut covariance = Matrix::zeros(d, d);
    for s in samples {
        let c = s - &mean;
        covariance.ger(1.0, &c, &c, 1.0);
    }
    covariance /= (n - 1) as f64;

    let mut batch_means = Vec::new();
    let mut start = 0;
    for &len in chain_lengths {
        let chain = &samples[start..start + len];
        start += len;
        let batches = BATCHES_PER_CHAIN.min(len);
        if batches == 0 {
            continue;
        }
        let size = len / batches;
        for b in 0..batches {
            let hi = if b + 1 == batches { len } else { (b + 1) * size };
            let slice = &chain[b * size..hi];
            let mut m = Vector::zeros(d);
            for s in slice {
                m += s;
            }
            batch_means.push(m / slice.len() as f64);
        }
    }
    Ok(finish(mean, covariance, n, batch_means))
}

/// Hit-and-run on `body` targeting `density`.
///
/// Chain `c` starts from `starts[c % starts.len()]`. When `directions` (a
/// `dim × k` matrix `P`) is given, directions are drawn as `P z` with `z`
/// standard normal in `R^k`; the symmetric direction law keeps the walk
/// reversible, and the chain stays in `start + range(P)`. Default burn-in
/// and thinning scale with `k`.
pub fn hit_and_run<B: ConvexBody + ?Sized>(
    body: &B,
    starts: &[Vector],
    density: &Density,
    cfg: &ChainConfig,
    directions: Option<&Matrix>,
) -> Result<SampleSet> {
    let d = body.dim();
    if starts.is_empty() || cfg.chains == 0 || cfg.n_samples == 0 {
        return Err(Error::InvalidArgument("need a start point, a chain and a sample".into()));
    }
    for s in starts {
        check_dim(d, s.len())?;
        if !body.contains(s.as_slice()) {
            return Err(Error::StartNotMember);
        }
    }
    if let Density::Exponential(g) = density {
        check_dim(d, g.len())?;
    }
    if let Some(p) = directions {
        check_dim(d, p.nrows())?;
        if p.ncols() == 0 {
            return Err(Error::InvalidArgument("direction matrix has no columns".into()));
        }
    }
    let k = directions.map_or(d, |p| p.ncols());
    let burn_in = cfg.burn_in.unwrap_or(200 * k);
    let thinning = cfg.thinning.unwrap_or(k).max(1);
    let per_chain = cfg.n_samples.div_ceil(cfg.chains);

    let chains: Vec<Result<(Vec<Vector>, Vector)>> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let take = per_chain.min(cfg.n_samples - (c * per_chain).min(cfg.n_samples));
            run_chain(body, &starts[c % starts.len()], density, directions, burn_in, thinning, take, &mut rng)
        })
        .collect();

    let mut samples = Vec::with_capacity(cfg.n_samples);
    let mut chain_lengths = Vec::with_capacity(cfg.chains);
    let mut final_states = Vec::with_capacity(cfg.chains);
    for chain in chains {
        let (s, last) = chain?;
        chain_lengths.push(s.len());
        samples.extend(s);
        final_states.push(last);
    }
    Ok(SampleSet { samples, chain_lengths, final_states })
}

#[allow(clippy::too_many_arguments)]
fn run_chain<B: ConvexBody + ?Sized>(
    body: &B,
    start: &Vector,
    density: &Density,
    directions: Option<&Matrix>,
    burn_in: usize,
    thinning: usize,
    take: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vector>, Vector)> {
    let d = body.dim();
    let k = directions.map_or(d, |p| p.ncols());
    let mut x = start.clone();
    let mut out = Vec::with_capacity(take);
    let mut degenerate = 0;
    let mut z = Vector::zeros(k);
    let mut dir = Vector::zeros(d);
    let mut candidate = Vector::zeros(d);
    let scale = 1.0 + x.norm();
    let total = burn_in + take * thinning;
    for step in 1..=total {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        match directions {
            Some(p) => dir.gemv(1.0, p, &z, 0.0),
            None => dir.copy_from(&z),
        }
        let (lo, hi) = body.chord(x.as_slice(), dir.as_slice())?;
        let width = (hi - lo) * dir.norm();
        if width <= 1e-13 * scale {
            degenerate += 1;
            if degenerate > MAX_DEGENERATE {
                return Err(Error::DegenerateChord { count: degenerate });
            }
        } else {
            degenerate = 0;
            let u: f64 = rng.random();
            let rate = match density {
                Density::Uniform => 0.0,
                Density::Exponential(theta) => -theta.dot(&dir),
            };
            let s = truncated_exponential(lo, hi, rate, u);
            candidate.copy_from(&x);
            candidate.axpy(s, &dir, 1.0);
            // Guard against rounding at the chord endpoints.
            if body.contains(candidate.as_slice()) {
                std::mem::swap(&mut x, &mut candidate);
            }
        }
        if step > burn_in && (step - burn_in).is_multiple_of(thinning) {
            out.push(x.clone());
        }
    }
    Ok((out, x))
}

/// Inverse CDF at `u` of the density `exp(-rate·s)` on `[lo, hi]`.
pub fn truncated_exponential(lo: f64, hi: f64, rate: f64, u: f64) -> f64 {
    let len = hi - lo;
    let k = rate * len;
    if k.abs() < 1e-12 {
        return lo + u * len;
    }
    let s = if rate > 0.0 {
        lo - (u * (-k).exp_m1()).ln_1p() / rate
    } else {
        hi - ((1.0 - u) * k.exp_m1()).ln_1p() / rate
    };
    s.clamp(lo, hi)
}

/// Mean of `exp(-rate·s)` on `[0, 1]`: `1/rate - 1/(e^rate - 1)`.
pub fn truncated_exponential_mean(rate: f64) -> f64 {
    if rate.abs() < 1e-8 {
        return 0.5 - rate / 12.0;
    }
    1.0 / rate - 1.0 / rate.exp_m1()
}
