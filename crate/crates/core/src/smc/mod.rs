//! Sequential Monte Carlo over a decreasing prior-scale schedule.
//!
//! Each step reweights the particles from the previous target to the next
//! (the likelihood cancels, leaving a ratio of prior densities), accumulates
//! the evidence ratio, resamples when the effective sample size drops below
//! the threshold, and moves every particle with Metropolis-within-Gibbs
//! sweeps that leave the new target invariant.

mod io;
mod kernel;
mod mcmc;
mod particles;
mod sampler;
mod schedule;

pub use io::{read_run, write_run, RUN_FILE};
pub use kernel::{acceptance_probability, mwg_sweep, Particle};
pub use mcmc::{fixed_b_mcmc, FixedChainConfig, McmcSamples};
pub use particles::{ess, reweight, systematic_resample, systematic_resample_at, ParticleSystem, Reweight};
pub use sampler::{init_particles, run_sampler, run_sampler_with, smc_step, SmcConfig, SmcOutput, Snapshot, StepSummary};
pub use schedule::Schedule;
