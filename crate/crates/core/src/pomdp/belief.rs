use rand::Rng;
use thiserror::Error;

use super::DomainModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeliefError {
    #[error("belief has no particles")]
    Empty,
    #[error("particle weight {0} is negative or not finite")]
    InvalidWeight(f64),
    #[error("particle weights sum to zero")]
    AllWeightsZero,
    #[error("requested particle count is zero")]
    ZeroParticles,
}

/// Weighted particle approximation of a belief.
///
/// Weights are kept normalized: every constructor and update leaves them
/// summing to one.
#[derive(Debug, Clone)]
pub struct ParticleBelief<S> {
    states: Vec<S>,
    weights: Vec<f64>,
}

impl<S> ParticleBelief<S> {
    /// Equally weighted belief over `states`.
    pub fn uniform(states: Vec<S>) -> Result<Self, BeliefError> {
        if states.is_empty() {
            return Err(BeliefError::Empty);
        }
        let w = 1.0 / states.len() as f64;
        let weights = vec![w; states.len()];
        Ok(Self { states, weights })
    }

    /// Belief from unnormalized `(state, weight)` pairs.
    pub fn weighted(particles: Vec<(S, f64)>) -> Result<Self, BeliefError> {
        if particles.is_empty() {
            return Err(BeliefError::Empty);
        }
        let (states, weights): (Vec<S>, Vec<f64>) = particles.into_iter().unzip();
        for &w in &weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(BeliefError::InvalidWeight(w));
            }
        }
        let mut belief = Self { states, weights };
        belief.normalize()?;
        Ok(belief)
    }

    fn normalize(&mut self) -> Result<(), BeliefError> {
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(BeliefError::AllWeightsZero);
        }
        for w in &mut self.weights {
            *w /= total;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, f64)> {
        self.states.iter().zip(self.weights.iter().copied())
    }

    /// Kish effective sample size, `1 / Σ w²`.
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Index drawn proportionally to weight.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }

    pub fn into_states(self) -> Vec<S> {
        self.states
    }
}

/// Systematic resampling to `n_par` equally weighted particles.
///
/// Particle `i` appears either `floor(n_par·w_i)` or `ceil(n_par·w_i)` times.
pub fn resample<S: Clone, R: Rng + ?Sized>(
    belief: &ParticleBelief<S>,
    n_par: usize,
    rng: &mut R,
) -> Result<ParticleBelief<S>, BeliefError> {
    if n_par == 0 {
        return Err(BeliefError::ZeroParticles);
    }
    if belief.is_empty() {
        return Err(BeliefError::Empty);
    }
    let total: f64 = belief.weights.iter().sum();
    if !(total > 0.0) {
        return Err(BeliefError::AllWeightsZero);
    }
    let step = 1.0 / n_par as f64;
    let offset: f64 = rng.random::<f64>() * step;
    let last = belief.len() - 1;
    let mut states = Vec::with_capacity(n_par);
    let mut idx = 0;
    let mut cumulative = belief.weights[0] / total;
    for j in 0..n_par {
        let u = offset + j as f64 * step;
        while cumulative <= u && idx < last {
            idx += 1;
            cumulative += belief.weights[idx] / total;
        }
        states.push(belief.states[idx].clone());
    }
    Ok(ParticleBelief {
        states,
        weights: vec![step; n_par],
    })
}

/// Bayes particle update `b'(s') ∝ Z(o|a,s') Σ_s T(s'|a,s) b(s)`.
///
/// Each particle is pushed through the transition model once, reweighted by
/// the observation likelihood, and the result is resampled back to `n_par`
/// particles. Terminal particles are carried over without a transition.
pub fn belief_update<M, R>(
    belief: &ParticleBelief<M::State>,
    action: usize,
    observation: &M::Observation,
    model: &M,
    n_par: usize,
    rng: &mut R,
) -> Result<ParticleBelief<M::State>, BeliefError>
where
    M: DomainModel,
    R: Rng + ?Sized,
{
    let propagated = propagate(belief, action, observation, model, rng)?;
    resample(&propagated, n_par, rng)
}

/// The weighted, normalized particle set of [`belief_update`] before
/// resampling.
pub fn propagate<M, R>(
    belief: &ParticleBelief<M::State>,
    action: usize,
    observation: &M::Observation,
    model: &M,
    rng: &mut R,
) -> Result<ParticleBelief<M::State>, BeliefError>
where
    M: DomainModel,
    R: Rng + ?Sized,
{
    if belief.is_empty() {
        return Err(BeliefError::Empty);
    }
    let mut states = Vec::with_capacity(belief.len());
    let mut weights = Vec::with_capacity(belief.len());
    for (state, w) in belief.iter() {
        let next = if model.is_terminal(state) {
            state.clone()
        } else {
            model.sample_transition(state, action, rng)
        };
        let likelihood = model.observation_likelihood(observation, &next, action);
        debug_assert!(likelihood.is_finite() && likelihood >= 0.0);
        weights.push(w * likelihood);
        states.push(next);
    }
    let mut propagated = ParticleBelief { states, weights };
    propagated.normalize()?;
    Ok(propagated)
}
