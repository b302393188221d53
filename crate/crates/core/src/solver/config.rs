use crate::error::{Error, Result};
use crate::sampling::ChainConfig;

/// Sample budget for one family of barrier estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingBudget {
    /// Kept samples per estimate, across all chains.
    pub samples: usize,
    /// Cold-start burn-in per chain; defaults to `200·dim`.
    pub burn_in: Option<usize>,
    /// Burn-in when chains resume from the previous final states.
    pub warm_burn_in: Option<usize>,
    pub thinning: Option<usize>,
    pub chains: usize,
}

impl SamplingBudget {
    pub fn new(samples: usize) -> Self {
        Self { samples, burn_in: None, warm_burn_in: None, thinning: None, chains: 4 }
    }

    pub(crate) fn chain_config(&self, seed: u64, warm: bool, boost: usize, dim: usize) -> ChainConfig {
        let burn_in = if warm { self.warm_burn_in.or(Some(20 * dim)) } else { self.burn_in };
        ChainConfig {
            burn_in,
            n_samples: self.samples * boost,
            thinning: self.thinning,
            seed,
            chains: self.chains,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Target suboptimality is `epsilon·‖c‖·R`.
    pub epsilon: f64,
    pub eta: f64,
    /// Outer radius; defaults to the largest outer-ball radius.
    pub outer_radius: Option<f64>,
    /// Inner radius; defaults to the smallest seed-ball radius.
    pub inner_radius: Option<f64>,
    pub outer_sampling: SamplingBudget,
    pub polar_sampling: SamplingBudget,
    /// Standard errors of slack in both loop conditions.
    pub noise_slack: f64,
    /// Defaults to `50·m·ln(m·R/(ε·r))`.
    pub max_iterations: Option<usize>,
    pub finalize_steps: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            eta: 0.01,
            outer_radius: None,
            inner_radius: None,
            outer_sampling: SamplingBudget::new(4000),
            polar_sampling: SamplingBudget::new(4000),
            noise_slack: 3.0,
            max_iterations: None,
            finalize_steps: 50,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/2), got {}", self.epsilon)));
        }
        if !(self.eta > 0.0 && self.eta <= 0.25) {
            return Err(Error::InvalidArgument(format!("eta must lie in (0, 1/4], got {}", self.eta)));
        }
        if !(self.noise_slack >= 0.0) {
            return Err(Error::InvalidArgument("noise slack must be nonnegative".into()));
        }
        for b in [&self.outer_sampling, &self.polar_sampling] {
            if b.samples < 2 || b.chains == 0 {
                return Err(Error::InvalidArgument("sampling budgets need at least 2 samples and 1 chain".into()));
            }
        }
        Ok(())
    }
}

/// Decorrelated seed for the `k`-th sampling call of a run.
pub fn derive_seed(base: u64, k: u64) -> u64 {
    let mut z = base ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
