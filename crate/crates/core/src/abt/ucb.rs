use rand::Rng;

use super::{BeliefNode, SolverConfig};
use crate::pomdp::DomainModel;

/// `Q̂ + c·sqrt(ln(Σ_a |H(b,a)|) / |H(b,a)|)` for a visited action.
pub fn ucb_score(q: f64, visits: usize, total_visits: usize, c: f64) -> f64 {
    q + c * ((total_visits as f64).ln() / visits as f64).sqrt()
}

/// Action to descend with during episode sampling.
///
/// Untried actions come first, picked uniformly at random. Once every action
/// has been tried the UCB score decides, lowest index winning ties.
pub fn ucb_select<K, R: Rng + ?Sized>(node: &BeliefNode<K>, c: f64, rng: &mut R) -> usize {
    let stats = node.stats();
    let untried = stats.iter().filter(|s| s.visits() == 0).count();
    if untried > 0 {
        let pick = rng.random_range(0..untried);
        return stats
            .iter()
            .enumerate()
            .filter(|(_, s)| s.visits() == 0)
            .nth(pick)
            .map(|(i, _)| i)
            .expect("pick < untried");
    }
    let total: usize = stats.iter().map(|s| s.visits()).sum();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, s) in stats.iter().enumerate() {
        let score = ucb_score(s.mean(), s.visits(), total, c);
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

/// Value estimate past the horizon: roll the default action forward for
/// `lookahead_depth` steps, adding the exact terminal value if a terminal
/// state is reached on the way.
pub fn heuristic_value<M, R>(state: &M::State, model: &M, config: &SolverConfig, rng: &mut R) -> f64
where
    M: DomainModel,
    R: Rng + ?Sized,
{
    let gamma = config.discount.value();
    let mut total = 0.0;
    let mut weight = 1.0;
    let mut current = state.clone();
    for _ in 0..config.lookahead_depth {
        if let Some(v) = model.terminal_value(&current) {
            return total + weight * v;
        }
        let action = model.default_action(&current);
        let next = model.sample_transition(&current, action, rng);
        total += weight * model.reward(&current, action, &next);
        weight *= gamma;
        current = next;
    }
    if let Some(v) = model.terminal_value(&current) {
        total += weight * v;
    }
    total
}
