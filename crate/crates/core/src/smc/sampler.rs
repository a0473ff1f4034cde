use rayon::prelude::*;

use super::kernel::{mwg_sweep, Particle};
use super::particles::{reweight, systematic_resample, ParticleSystem};
use super::schedule::Schedule;
use crate::data::Dataset;
use crate::error::{Result, SpaError};
use crate::model::{GtPrior, ProposalScratch};
use crate::rng::{self, ids};

/// Sampler settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SmcConfig {
    pub particles: usize,
    /// Metropolis-within-Gibbs sweeps per step.
    pub cycles: usize,
    /// Random-walk proposal standard deviation.
    pub step_sd: f64,
    /// Resample when ESS falls below this fraction of the particle count.
    pub ess_threshold_frac: f64,
    pub seed: u64,
    /// Sweeps discarded before collecting initial particles.
    pub burn_in: usize,
    /// Sweeps between collected initial particles.
    pub init_thin: usize,
    /// Retain full particle sets every `snapshot_every` steps (the last step
    /// is always kept).
    pub snapshot_every: usize,
}

impl Default for SmcConfig {
    fn default() -> Self {
        SmcConfig {
            particles: 8192,
            cycles: 5,
            step_sd: 0.5,
            ess_threshold_frac: 0.75,
            seed: 1,
            burn_in: 2000,
            init_thin: 5,
            snapshot_every: 1,
        }
    }
}

impl SmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 2 {
            return Err(SpaError::invalid("need at least 2 particles"));
        }
        if self.particles as u64 >= (1 << 32) - 1 {
            return Err(SpaError::invalid("too many particles"));
        }
        if self.cycles == 0 {
            return Err(SpaError::invalid("need at least one kernel cycle per step"));
        }
        if !(self.step_sd > 0.0) || !self.step_sd.is_finite() {
            return Err(SpaError::invalid("proposal sd must be > 0"));
        }
        if !(self.ess_threshold_frac > 0.0 && self.ess_threshold_frac <= 1.0) {
            return Err(SpaError::invalid("ESS threshold must lie in (0, 1]"));
        }
        if self.init_thin == 0 || self.snapshot_every == 0 {
            return Err(SpaError::invalid("thinning intervals must be >= 1"));
        }
        Ok(())
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSummary {
    pub t: usize,
    pub b: f64,
    /// ESS after reweighting, before any resampling.
    pub ess: f64,
    pub log_z_ratio_cum: f64,
    pub acceptance_rate: f64,
    pub resampled: bool,
}

/// Weighted particle set at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: usize,
    pub b: f64,
    pub betas: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Log-likelihood per particle, when known.
    pub loglik: Option<Vec<f64>>,
}

impl Snapshot {
    fn capture(system: &ParticleSystem) -> Self {
        Snapshot {
            t: system.t,
            b: system.b,
            betas: system.particles.iter().map(|p| p.beta.clone()).collect(),
            weights: system.weights.clone(),
            loglik: Some(system.particles.iter().map(|p| p.cache.loglik()).collect()),
        }
    }

    /// Samples of coefficient `j`.
    pub fn coefficient(&self, j: usize) -> Vec<f64> {
        self.betas.iter().map(|b| b[j]).collect()
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SmcOutput {
    pub a: f64,
    pub names: Vec<String>,
    pub steps: Vec<StepSummary>,
    pub snapshots: Vec<Snapshot>,
}

impl SmcOutput {
    pub fn snapshot(&self, t: usize) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.t == t)
    }

    /// Whether every step has a retained particle set.
    pub fn has_all_snapshots(&self) -> bool {
        self.snapshots.len() == self.steps.len()
            && self.snapshots.iter().zip(&self.steps).all(|(s, st)| s.t == st.t)
    }
}

/// Collect `N` states from one long Metropolis-within-Gibbs chain started at
/// zero: `burn_in` sweeps discarded, then one state every `init_thin`
/// sweeps. All weights start at `1/N`. Returns the system and the chain's
/// acceptance rate.
pub fn init_particles(data: &Dataset, prior: &GtPrior, config: &SmcConfig) -> Result<(ParticleSystem, f64)> {
    config.validate()?;
    let mut rng = rng::stream(config.seed, ids::INIT_CHAIN);
    let mut current = Particle::new(data, vec![0.0; data.p()])?;
    let mut scratch = ProposalScratch::default();
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    for _ in 0..config.burn_in {
        accepted += mwg_sweep(&mut current, data, prior, config.step_sd, &mut rng, &mut scratch);
        proposed += data.p();
    }
    let mut particles = Vec::with_capacity(config.particles);
    for _ in 0..config.particles {
        for _ in 0..config.init_thin {
            accepted += mwg_sweep(&mut current, data, prior, config.step_sd, &mut rng, &mut scratch);
            proposed += data.p();
        }
        current.cache.refresh(data);
        particles.push(current.clone());
    }
    let n = config.particles;
    let system = ParticleSystem {
        particles,
        weights: vec![1.0 / n as f64; n],
        log_z_ratio_cum: 0.0,
        t: 1,
        b: prior.b(),
    };
    Ok((system, ratio(accepted, proposed)))
}

fn ratio(accepted: usize, proposed: usize) -> f64 {
    if proposed == 0 {
        0.0
    } else {
        accepted as f64 / proposed as f64
    }
}

/// Advance the system from `b_{t−1}` to `b_next`: reweight, accumulate the
/// evidence ratio, resample if ESS is below threshold, then move every
/// particle with `cycles` sweeps targeting the new posterior.
pub fn smc_step(system: &mut ParticleSystem, data: &Dataset, a: f64, b_next: f64, config: &SmcConfig) -> Result<StepSummary> {
    let prev = GtPrior::from_rate(a, system.b)?;
    let next = GtPrior::from_rate(a, b_next)?;
    let t = system.t + 1;
    let rw = reweight(system, data, &next, &prev)?;
    system.log_z_ratio_cum += rw.log_z_increment;
    system.t = t;
    system.b = b_next;
    let ess = system.ess();
    let n = system.len();
    let resampled = ess < config.ess_threshold_frac * n as f64;
    if resampled {
        systematic_resample(system, &mut rng::resample_stream(config.seed, t));
    }
    let accepted: usize = system
        .particles
        .par_iter_mut()
        .enumerate()
        .map_init(ProposalScratch::default, |scratch, (i, particle)| {
            let mut rng = rng::particle_stream(config.seed, t, i);
            let mut acc = 0;
            for _ in 0..config.cycles {
                acc += mwg_sweep(particle, data, &next, config.step_sd, &mut rng, scratch);
            }
            particle.cache.refresh(data);
            acc
        })
        .sum();
    Ok(StepSummary {
        t,
        b: b_next,
        ess,
        log_z_ratio_cum: system.log_z_ratio_cum,
        acceptance_rate: ratio(accepted, n * config.cycles * data.p()),
        resampled,
    })
}

/// Initialize at `b_1` and run every step of the schedule.
pub fn run_sampler(data: &Dataset, a: f64, schedule: &Schedule, config: &SmcConfig) -> Result<SmcOutput> {
    run_sampler_with(data, a, schedule, config, |_| {})
}

/// [`run_sampler`] with a per-step callback, e.g. for progress reporting.
pub fn run_sampler_with(
    data: &Dataset,
    a: f64,
    schedule: &Schedule,
    config: &SmcConfig,
    mut on_step: impl FnMut(&StepSummary),
) -> Result<SmcOutput> {
    config.validate()?;
    let prior = GtPrior::from_rate(a, schedule.b(1))?;
    let (mut system, init_rate) = init_particles(data, &prior, config)?;
    let total = schedule.len();
    let keep = |t: usize| (t - 1) % config.snapshot_every == 0 || t == total;
    let first = StepSummary {
        t: 1,
        b: schedule.b(1),
        ess: system.ess(),
        log_z_ratio_cum: 0.0,
        acceptance_rate: init_rate,
        resampled: false,
    };
    on_step(&first);
    let mut steps = vec![first];
    let mut snapshots = vec![];
    if keep(1) {
        snapshots.push(Snapshot::capture(&system));
    }
    for t in 2..=total {
        let summary = smc_step(&mut system, data, a, schedule.b(t), config)?;
        on_step(&summary);
        steps.push(summary);
        if keep(t) {
            snapshots.push(Snapshot::capture(&system));
        }
    }
    Ok(SmcOutput {
        a,
        names: data.names().to_vec(),
        steps,
        snapshots,
    })
}
