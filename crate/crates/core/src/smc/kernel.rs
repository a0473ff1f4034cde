use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::Result;
use crate::model::{gt_log_density, log_likelihood, GtPrior, LinearPredictorCache, ProposalScratch};

/// A coefficient vector with its linear-predictor cache.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub beta: Vec<f64>,
    pub cache: LinearPredictorCache,
}

impl Particle {
    pub fn new(data: &Dataset, beta: Vec<f64>) -> Result<Self> {
        let (_, cache) = log_likelihood(data, &beta)?;
        Ok(Particle { beta, cache })
    }

    pub fn log_posterior(&self, data: &Dataset, prior: &GtPrior) -> f64 {
        let prior_term: f64 = (data.first_penalized()..self.beta.len())
            .map(|j| gt_log_density(self.beta[j], prior))
            .sum();
        self.cache.loglik() + prior_term
    }
}

/// Metropolis-Hastings acceptance probability for a symmetric proposal.
pub fn acceptance_probability(log_ratio: f64) -> f64 {
    if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

/// One Metropolis-within-Gibbs sweep over coordinates `0..p` in order, each
/// proposing `β_j + N(0, step_sd²)`. Returns the number of accepted moves.
///
/// Accepted moves update the cache's probabilities multiplicatively; callers
/// running many sweeps should [`LinearPredictorCache::refresh`] afterwards.
pub fn mwg_sweep<R: Rng + ?Sized>(
    particle: &mut Particle,
    data: &Dataset,
    prior: &GtPrior,
    step_sd: f64,
    rng: &mut R,
    scratch: &mut ProposalScratch,
) -> usize {
    let mut accepted = 0;
    for j in 0..particle.beta.len() {
        let z: f64 = rng.sample(StandardNormal);
        let current = particle.beta[j];
        let proposal = current + step_sd * z;
        let delta = proposal - current;
        let dll = particle.cache.propose(data, j, delta, scratch);
        let dprior = if data.is_penalized(j) {
            gt_log_density(proposal, prior) - gt_log_density(current, prior)
        } else {
            0.0
        };
        let log_ratio = dll + dprior;
        if log_ratio >= 0.0 || rng.gen::<f64>() < log_ratio.exp() {
            particle.cache.commit(data, j, delta, dll, scratch);
            particle.beta[j] = proposal;
            accepted += 1;
        }
    }
    accepted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{simulate_dataset, Effects, SimSpec};
    use crate::rng;

    fn dataset() -> Dataset {
        simulate_dataset(&SimSpec {
            n: 60,
            p: 3,
            block_size: 3,
            within_block_corr: 0.3,
            effects: Effects::Fixed(vec![(1, 0.8)]),
            seed: 3,
        })
        .unwrap()
        .0
    }

    #[test]
    fn zero_log_ratio_always_accepts() {
        assert_eq!(acceptance_probability(0.0), 1.0);
        assert_eq!(acceptance_probability(2.0), 1.0);
        assert!((acceptance_probability(-1.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejected_moves_leave_particle_untouched() {
        let data = dataset();
        let prior = GtPrior::new(4.0, 1e-9).unwrap();
        // A near-degenerate prior at zero rejects every move away from zero.
        let mut particle = Particle::new(&data, vec![0.0; 3]).unwrap();
        let before = particle.clone();
        let mut r = rng::stream(1, 0);
        let accepted = mwg_sweep(&mut particle, &data, &prior, 0.5, &mut r, &mut ProposalScratch::default());
        assert_eq!(accepted, 0);
        assert_eq!(particle, before);
    }

    #[test]
    fn cache_tracks_particle_through_sweeps() {
        let data = dataset();
        let prior = GtPrior::new(1.0, 0.5).unwrap();
        let mut particle = Particle::new(&data, vec![0.2, -0.1, 0.0]).unwrap();
        let mut r = rng::stream(2, 0);
        let mut scratch = ProposalScratch::default();
        let mut accepted = 0;
        for _ in 0..50 {
            accepted += mwg_sweep(&mut particle, &data, &prior, 0.5, &mut r, &mut scratch);
        }
        assert!(accepted > 0);
        let (ll, _) = log_likelihood(&data, &particle.beta).unwrap();
        assert!((particle.cache.loglik() - ll).abs() < 1e-9);
        particle.cache.refresh(&data);
        assert!((particle.cache.loglik() - ll).abs() < 1e-10);
    }
}
