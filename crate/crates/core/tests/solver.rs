mod common;

use common::{Chain, RandomPomdp};
use crossing_core::abt::{heuristic_value, ucb_score, BeliefTree, SolverConfig};
use crossing_core::pomdp::{Discount, DomainModel, ParticleBelief};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chain_config(horizon: usize, episodes: usize) -> SolverConfig {
    SolverConfig {
        horizon,
        episodes,
        particles: 1,
        ucb_c: 5.0,
        discount: Discount::new(0.9).unwrap(),
        lookahead_depth: 3,
    }
}

#[test]
fn one_step_estimates_match_value_iteration() {
    let model = Chain::new();
    let config = chain_config(1, 4000);
    let exact = model.root_q(1, 1, 3, 0.9);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tree = BeliefTree::new(ParticleBelief::uniform(vec![1usize]).unwrap(), &model);
    let best = tree.plan(&model, &config, &mut rng).unwrap();
    for (a, q) in exact.iter().enumerate() {
        let estimate = tree.q_estimate(tree.root_id(), a).unwrap();
        assert!((estimate - q).abs() < 0.1, "action {a}: {estimate} vs {q}");
    }
    let argmax = if exact[0] >= exact[1] { 0 } else { 1 };
    assert_eq!(best, argmax);
}

#[test]
fn deterministic_rollout_matches_closed_form() {
    let mut model = Chain::new();
    model.slip = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for depth in 0..6 {
        let config = SolverConfig {
            lookahead_depth: depth,
            ..chain_config(1, 1)
        };
        for s in 0..5 {
            let got = heuristic_value(&s, &model, &config, &mut rng);
            assert!((got - model.rollout_value(s, depth, 0.9)).abs() < 1e-12);
        }
    }
}

#[test]
fn heuristic_stops_at_terminal_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let model = RandomPomdp::new(&mut rng);
    let config = SolverConfig {
        lookahead_depth: 4,
        ..SolverConfig::default()
    };
    let value = heuristic_value(&model.terminal, &model, &config, &mut rng);
    assert_eq!(value, model.terminal_value);
}

#[test]
fn advance_collapses_belief_onto_observed_state() {
    let model = Chain::new();
    let config = SolverConfig {
        particles: 20,
        ..chain_config(3, 300)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tree = BeliefTree::new(ParticleBelief::uniform(vec![2usize; 20]).unwrap(), &model);
    tree.plan(&model, &config, &mut rng).unwrap();
    tree.advance(1, &3, &model, &config, &mut rng, |o, _| {
        ParticleBelief::uniform(vec![*o; 20]).unwrap()
    })
    .unwrap();
    assert_eq!(tree.belief().len(), 20);
    assert!(tree.belief().states().iter().all(|&s| s == 3));
    assert!(tree.plan(&model, &config, &mut rng).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn root_visits_count_every_episode(seed in any::<u64>(), episodes in 1usize..200, horizon in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = RandomPomdp::new(&mut rng);
        let config = SolverConfig { horizon, episodes, particles: 4, ucb_c: 10.0, ..SolverConfig::default() };
        let start: Vec<usize> = (0..4).map(|i| i % (model.states - 1)).collect();
        let mut tree = BeliefTree::new(ParticleBelief::uniform(start).unwrap(), &model);
        let best = tree.plan(&model, &config, &mut rng).unwrap();
        prop_assert_eq!(tree.root().total_visits(), episodes);
        prop_assert_eq!(tree.episodes().len(), episodes);
        prop_assert!(best < model.action_set().len());
        for episode in tree.episodes() {
            prop_assert!(episode.len() <= horizon + 1);
        }
    }

    #[test]
    fn ucb_score_grows_with_c_and_q(
        q in -1e4f64..1e4,
        visits in 1usize..1000,
        extra in 0usize..1000,
        c in 0.0f64..1e4,
        dc in 0.0f64..1e3,
    ) {
        let total = visits + extra;
        let base = ucb_score(q, visits, total, c);
        prop_assert!(ucb_score(q, visits, total, c + dc) >= base);
        prop_assert!(ucb_score(q + 1.0, visits, total, c) > base);
        prop_assert!(ucb_score(q, visits + 1, total + 1, c) <= ucb_score(q, visits, total + 1, c));
    }
}
