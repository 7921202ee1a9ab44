//! Online belief-tree search.
//!
//! The tree is grown by sampling episodes from the root belief: each episode
//! walks down the tree choosing actions with UCB, samples a transition,
//! observation and reward from the model at every level, and ends either in a
//! terminal state or at the horizon, where the remaining return is estimated
//! with a short default-policy rollout. Q̂(b, a) is the mean discounted tail
//! return of the episodes that took `a` at `b`.
//!
//! Episodes are retained so that, after the real action and observation are
//! known, the matching subtree can be rebuilt under the new root and its
//! statistics recounted from the episodes that pass through it.

mod tree;
mod ucb;

pub use tree::{ActionStats, AdvanceReport, BeliefNode, BeliefTree, Episode, EpisodeStep, NodeId};
pub use ucb::{heuristic_value, ucb_score, ucb_select};

use thiserror::Error;

use crate::pomdp::{BeliefError, Discount};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("no episode visited the root; nothing to choose an action from")]
    NoEpisodes,
    #[error("action {0} has no visits at this node")]
    NoVisits(usize),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

/// Search parameters. Defaults are the tuned values used throughout the
/// experiments: N = 5, 3000 episodes, 300 particles, c = 20000, γ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Depth N of the optimization horizon.
    pub horizon: usize,
    /// Episodes sampled per planning step.
    pub episodes: usize,
    /// Particles kept in the root belief.
    pub particles: usize,
    /// UCB exploration coefficient, on the raw reward scale.
    pub ucb_c: f64,
    pub discount: Discount,
    /// Default-policy steps used to estimate the value past the horizon.
    pub lookahead_depth: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            horizon: 5,
            episodes: 3000,
            particles: 300,
            ucb_c: 20000.0,
            discount: Discount::default(),
            lookahead_depth: 3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: &str| Err(SolverError::InvalidConfig(msg.to_owned()));
        if self.horizon == 0 {
            return bad("horizon N must be positive");
        }
        if self.particles == 0 {
            return bad("particle count must be positive");
        }
        if !(self.ucb_c >= 0.0 && self.ucb_c.is_finite()) {
            return bad("UCB coefficient must be finite and non-negative");
        }
        if self.lookahead_depth == 0 {
            return bad("lookahead depth must be at least 1");
        }
        Ok(())
    }
}
