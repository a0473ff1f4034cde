use super::kernel::{mwg_sweep, Particle};
use crate::data::Dataset;
use crate::error::{Result, SpaError};
use crate::model::{GtPrior, ProposalScratch};
use crate::rng::{self, ids};

/// Settings for a single-scale validation chain.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedChainConfig {
    /// Number of retained states.
    pub samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub step_sd: f64,
    pub seed: u64,
}

impl Default for FixedChainConfig {
    fn default() -> Self {
        FixedChainConfig {
            samples: 100_000,
            burn_in: 2000,
            thin: 1,
            step_sd: 0.5,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcSamples {
    pub samples: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
}

impl McmcSamples {
    pub fn coefficient(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[j]).collect()
    }
}

/// Metropolis-within-Gibbs at a fixed prior, started from zero, with the
/// same kernel the SMC sampler uses for its moves.
pub fn fixed_b_mcmc(data: &Dataset, prior: &GtPrior, config: &FixedChainConfig) -> Result<McmcSamples> {
    if config.thin == 0 || config.samples == 0 {
        return Err(SpaError::invalid("need samples >= 1 and thin >= 1"));
    }
    if !(config.step_sd > 0.0) {
        return Err(SpaError::invalid("proposal sd must be > 0"));
    }
    let mut rng = rng::stream(config.seed, ids::FIXED_CHAIN);
    let mut state = Particle::new(data, vec![0.0; data.p()])?;
    let mut scratch = ProposalScratch::default();
    let mut accepted = 0usize;
    let mut sweeps = 0usize;
    let mut sweep = |state: &mut Particle| {
        accepted += mwg_sweep(state, data, prior, config.step_sd, &mut rng, &mut scratch);
        sweeps += 1;
        if sweeps % 64 == 0 {
            state.cache.refresh(data);
        }
    };
    for _ in 0..config.burn_in {
        sweep(&mut state);
    }
    let mut samples = Vec::with_capacity(config.samples);
    for _ in 0..config.samples {
        for _ in 0..config.thin {
            sweep(&mut state);
        }
        samples.push(state.beta.clone());
    }
    let proposed = sweeps * data.p();
    Ok(McmcSamples {
        samples,
        acceptance_rate: if proposed == 0 { 0.0 } else { accepted as f64 / proposed as f64 },
    })
}
