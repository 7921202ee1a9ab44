//! Generic POMDP plumbing: the generative model contract the planner is
//! written against, weighted particle beliefs and the Bayes particle update.
//!
//! Nothing in here knows about vehicles. The intersection model in
//! [`crate::domain`] is one implementation of [`DomainModel`]; the test suite
//! carries a few toy ones.

mod belief;

pub use belief::{belief_update, propagate, resample, BeliefError, ParticleBelief};

use std::hash::Hash;

use rand::Rng;
use thiserror::Error;

/// Errors raised when building the small value types of this module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("action set is empty")]
    EmptyActionSet,
    #[error("action {0} is not a finite number")]
    NonFiniteAction(f64),
    #[error("action {0} appears more than once")]
    DuplicateAction(f64),
    #[error("discount factor {0} outside (0, 1]")]
    InvalidDiscount(f64),
}

/// Ordered, duplicate-free list of discrete actions.
///
/// Actions are addressed by index everywhere in the solver; the order given
/// at construction is the tie-break order.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    actions: Vec<f64>,
}

impl ActionSet {
    pub fn new(actions: Vec<f64>) -> Result<Self, ModelError> {
        if actions.is_empty() {
            return Err(ModelError::EmptyActionSet);
        }
        for (i, &a) in actions.iter().enumerate() {
            if !a.is_finite() {
                return Err(ModelError::NonFiniteAction(a));
            }
            if actions[..i].contains(&a) {
                return Err(ModelError::DuplicateAction(a));
            }
        }
        Ok(Self { actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Value of the action at `index`. Panics on an out-of-range index.
    pub fn value(&self, index: usize) -> f64 {
        self.actions[index]
    }

    pub fn values(&self) -> &[f64] {
        &self.actions
    }

    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.actions.iter().position(|&a| a == value)
    }

    /// Index of the action closest to `value`, lowest index on ties.
    pub fn nearest(&self, value: f64) -> usize {
        let mut best = 0;
        for (i, &a) in self.actions.iter().enumerate() {
            if (a - value).abs() < (self.actions[best] - value).abs() {
                best = i;
            }
        }
        best
    }
}

/// Discount factor γ in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Discount(f64);

impl Discount {
    pub fn new(gamma: f64) -> Result<Self, ModelError> {
        if gamma > 0.0 && gamma <= 1.0 {
            Ok(Self(gamma))
        } else {
            Err(ModelError::InvalidDiscount(gamma))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Discount {
    fn default() -> Self {
        Self(1.0)
    }
}

/// Generative POMDP model.
///
/// The solver only ever samples from the model; nothing requires the
/// transition or observation distributions in closed form except
/// [`DomainModel::observation_likelihood`], which weights particles.
///
/// Callers never ask for a transition out of a terminal state.
pub trait DomainModel {
    type State: Clone;
    type Observation: Clone;
    /// Discrete equivalence class of an observation. Belief-tree branching is
    /// keyed on this, so it should be coarse.
    type ObservationKey: Clone + Eq + Hash;

    fn action_set(&self) -> &ActionSet;

    fn sample_transition<R: Rng + ?Sized>(&self, state: &Self::State, action: usize, rng: &mut R) -> Self::State;

    fn sample_observation<R: Rng + ?Sized>(&self, next: &Self::State, action: usize, rng: &mut R) -> Self::Observation;

    /// Density (or mass) of `obs` given the post-transition state. Finite, ≥ 0.
    fn observation_likelihood(&self, obs: &Self::Observation, next: &Self::State, action: usize) -> f64;

    fn reward(&self, state: &Self::State, action: usize, next: &Self::State) -> f64;

    /// `Some(value)` for terminal states, where `value` is the exact
    /// remaining return; `None` otherwise.
    fn terminal_value(&self, state: &Self::State) -> Option<f64>;

    fn is_terminal(&self, state: &Self::State) -> bool {
        self.terminal_value(state).is_some()
    }

    /// Action used by heuristic rollouts past the search horizon.
    fn default_action(&self, state: &Self::State) -> usize;

    fn observation_key(&self, obs: &Self::Observation) -> Self::ObservationKey;
}
