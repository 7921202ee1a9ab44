//! Toy models and brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use crossing_core::domain::{OrientedRect, VehicleGeometry};
use crossing_core::pomdp::{ActionSet, DomainModel};
use crossing_core::topology::{parse_map, PathSet, PathSpline, Point};
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn scenario_path(name: &str) -> PathBuf {
    fixtures().join("scenarios").join(format!("{name}.json"))
}

/// Every path of every fixture map, tagged with the map name.
pub fn fixture_paths() -> Vec<(String, PathSpline)> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(fixtures().join("maps"))
        .expect("maps directory")
        .map(|e| e.expect("entry").path())
        .collect();
    entries.sort();
    for path in entries {
        let bytes = std::fs::read(&path).expect("map file");
        let graph = parse_map(&bytes).expect("fixture map parses");
        let set = PathSet::from_graph(&graph).expect("fixture paths fit");
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        for spline in set.paths() {
            out.push((name.clone(), spline.clone()));
        }
    }
    out
}

/// Two hidden states, one action, binary observation.
///
/// `T(1|0) = to_one[0]`, `T(1|1) = to_one[1]`, `Z(o=1|s') = see_one[s']`.
pub struct TwoState {
    pub actions: ActionSet,
    pub to_one: [f64; 2],
    pub see_one: [f64; 2],
}

impl TwoState {
    pub fn new() -> Self {
        Self {
            actions: ActionSet::new(vec![0.0]).unwrap(),
            to_one: [0.3, 0.8],
            see_one: [0.2, 0.9],
        }
    }

    /// Exact `P(s' = 1 | o)` after one step from a prior `P(s = 1) = prior`.
    pub fn posterior_one(&self, prior: f64, obs: usize) -> f64 {
        let predicted = (1.0 - prior) * self.to_one[0] + prior * self.to_one[1];
        let z = |s: usize| {
            if obs == 1 {
                self.see_one[s]
            } else {
                1.0 - self.see_one[s]
            }
        };
        let one = predicted * z(1);
        one / (one + (1.0 - predicted) * z(0))
    }
}

impl DomainModel for TwoState {
    type State = usize;
    type Observation = usize;
    type ObservationKey = usize;

    fn action_set(&self) -> &ActionSet {
        &self.actions
    }

    fn sample_transition<R: Rng + ?Sized>(&self, s: &usize, _: usize, rng: &mut R) -> usize {
        usize::from(rng.random::<f64>() < self.to_one[*s])
    }

    fn sample_observation<R: Rng + ?Sized>(&self, s: &usize, _: usize, rng: &mut R) -> usize {
        usize::from(rng.random::<f64>() < self.see_one[*s])
    }

    fn observation_likelihood(&self, o: &usize, s: &usize, _: usize) -> f64 {
        if *o == 1 {
            self.see_one[*s]
        } else {
            1.0 - self.see_one[*s]
        }
    }

    fn reward(&self, _: &usize, _: usize, _: &usize) -> f64 {
        0.0
    }

    fn terminal_value(&self, _: &usize) -> Option<f64> {
        None
    }

    fn default_action(&self, _: &usize) -> usize {
        0
    }

    fn observation_key(&self, o: &usize) -> usize {
        *o
    }
}

/// Fully observed five-state chain. Action 0 moves left, 1 moves right;
/// the move is reversed with probability `slip`. Entering state 0 pays
/// `edge_rewards[0]`, entering state 4 pays `edge_rewards[1]`.
///
/// From state 1 the defaults make moving left best for one step and under
/// a uniformly random policy, while moving right is optimal over the
/// horizon.
pub struct Chain {
    pub actions: ActionSet,
    pub slip: f64,
    pub edge_rewards: [f64; 2],
    pub default: usize,
}

pub const CHAIN_STATES: usize = 5;

impl Chain {
    pub fn new() -> Self {
        Self {
            actions: ActionSet::new(vec![-1.0, 1.0]).unwrap(),
            slip: 0.2,
            edge_rewards: [1.0, 2.0],
            default: 1,
        }
    }

    pub fn outcomes(&self, s: usize, a: usize) -> [(usize, f64); 2] {
        let step = |forward: bool| {
            let right = (a == 1) == forward;
            if right {
                (s + 1).min(CHAIN_STATES - 1)
            } else {
                s.saturating_sub(1)
            }
        };
        [(step(true), 1.0 - self.slip), (step(false), self.slip)]
    }

    pub fn step_reward(&self, next: usize) -> f64 {
        match next {
            0 => self.edge_rewards[0],
            n if n == CHAIN_STATES - 1 => self.edge_rewards[1],
            _ => 0.0,
        }
    }

    /// Expected discounted return of `depth` default-action steps.
    pub fn rollout_value(&self, s: usize, depth: usize, gamma: f64) -> f64 {
        if depth == 0 {
            return 0.0;
        }
        self.outcomes(s, self.default)
            .iter()
            .map(|&(n, p)| p * (self.step_reward(n) + gamma * self.rollout_value(n, depth - 1, gamma)))
            .sum()
    }

    /// Finite-horizon value iteration with the rollout value at the leaves:
    /// `Q(s0, a)` for every action at the root.
    pub fn root_q(&self, s0: usize, horizon: usize, lookahead: usize, gamma: f64) -> Vec<f64> {
        let mut value: Vec<f64> = (0..CHAIN_STATES)
            .map(|s| self.rollout_value(s, lookahead, gamma))
            .collect();
        let q = |value: &[f64], s: usize, a: usize| -> f64 {
            self.outcomes(s, a)
                .iter()
                .map(|&(n, p)| p * (self.step_reward(n) + gamma * value[n]))
                .sum()
        };
        for _ in 1..horizon {
            value = (0..CHAIN_STATES)
                .map(|s| (0..2).map(|a| q(&value, s, a)).fold(f64::NEG_INFINITY, f64::max))
                .collect();
        }
        (0..2).map(|a| q(&value, s0, a)).collect()
    }
}

impl DomainModel for Chain {
    type State = usize;
    type Observation = usize;
    type ObservationKey = usize;

    fn action_set(&self) -> &ActionSet {
        &self.actions
    }

    fn sample_transition<R: Rng + ?Sized>(&self, s: &usize, a: usize, rng: &mut R) -> usize {
        let [(forward, _), (back, _)] = self.outcomes(*s, a);
        if rng.random::<f64>() < self.slip {
            back
        } else {
            forward
        }
    }

    fn sample_observation<R: Rng + ?Sized>(&self, s: &usize, _: usize, _: &mut R) -> usize {
        *s
    }

    fn observation_likelihood(&self, o: &usize, s: &usize, _: usize) -> f64 {
        f64::from(u8::from(o == s))
    }

    fn reward(&self, _: &usize, _: usize, next: &usize) -> f64 {
        self.step_reward(*next)
    }

    fn terminal_value(&self, _: &usize) -> Option<f64> {
        None
    }

    fn default_action(&self, _: &usize) -> usize {
        self.default
    }

    fn observation_key(&self, o: &usize) -> usize {
        *o
    }
}

/// Small random POMDP: integer states, random per-(state, action) rewards,
/// noisy observations in a few buckets and a terminal state.
pub struct RandomPomdp {
    pub actions: ActionSet,
    pub states: usize,
    pub rewards: Vec<Vec<f64>>,
    pub terminal: usize,
    pub terminal_value: f64,
}

impl RandomPomdp {
    pub fn new<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let n_actions = rng.random_range(2..=4);
        let states = rng.random_range(3..=6);
        Self {
            actions: ActionSet::new((0..n_actions).map(|a| a as f64).collect()).unwrap(),
            states,
            rewards: (0..states)
                .map(|_| (0..n_actions).map(|_| rng.random_range(-10.0..10.0)).collect())
                .collect(),
            terminal: states - 1,
            terminal_value: rng.random_range(-50.0..50.0),
        }
    }
}

impl DomainModel for RandomPomdp {
    type State = usize;
    type Observation = usize;
    type ObservationKey = usize;

    fn action_set(&self) -> &ActionSet {
        &self.actions
    }

    fn sample_transition<R: Rng + ?Sized>(&self, s: &usize, a: usize, rng: &mut R) -> usize {
        (s + a + rng.random_range(0..2)) % self.states
    }

    fn sample_observation<R: Rng + ?Sized>(&self, s: &usize, _: usize, rng: &mut R) -> usize {
        (s + rng.random_range(0..2)) % 3
    }

    fn observation_likelihood(&self, o: &usize, s: &usize, _: usize) -> f64 {
        if *o == s % 3 || *o == (s + 1) % 3 {
            0.5
        } else {
            0.0
        }
    }

    fn reward(&self, s: &usize, a: usize, _: &usize) -> f64 {
        self.rewards[*s][a]
    }

    fn terminal_value(&self, s: &usize) -> Option<f64> {
        (*s == self.terminal).then_some(self.terminal_value)
    }

    fn default_action(&self, _: &usize) -> usize {
        0
    }

    fn observation_key(&self, o: &usize) -> usize {
        *o
    }
}

/// Brute-force nearest path position on a regular grid of path positions.
pub fn grid_projection(path: &PathSpline, point: Point, step: f64) -> (f64, f64) {
    let n = (path.length() / step).ceil() as usize;
    let mut best = (0.0, f64::INFINITY);
    for k in 0..=n {
        let p = (k as f64 * step).min(path.length());
        let q = path.position(p);
        let d = (q[0] - point[0]).hypot(q[1] - point[1]);
        if d < best.1 {
            best = (p, d);
        }
    }
    best
}

/// Signed distance of `point` to the boundary of `rect`, negative inside.
pub fn rect_signed_distance(rect: &OrientedRect, point: Point) -> f64 {
    let d = [point[0] - rect.center[0], point[1] - rect.center[1]];
    let along = d[0] * rect.heading[0] + d[1] * rect.heading[1];
    let across = -d[0] * rect.heading[1] + d[1] * rect.heading[0];
    let ex = along.abs() - rect.half_length;
    let ey = across.abs() - rect.half_width;
    if ex <= 0.0 && ey <= 0.0 {
        ex.max(ey)
    } else {
        ex.max(0.0).hypot(ey.max(0.0))
    }
}

/// Overlap decided by testing the points of a `cell`-spaced raster over the
/// common bounding box against both rectangles.
pub fn raster_overlap(a: &OrientedRect, b: &OrientedRect, cell: f64) -> bool {
    let bounds = |r: &OrientedRect| {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for c in r.corners() {
            for i in 0..2 {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i]);
            }
        }
        (lo, hi)
    };
    let ((lo_a, hi_a), (lo_b, hi_b)) = (bounds(a), bounds(b));
    let lo = [lo_a[0].max(lo_b[0]), lo_a[1].max(lo_b[1])];
    let hi = [hi_a[0].min(hi_b[0]), hi_a[1].min(hi_b[1])];
    if lo[0] > hi[0] || lo[1] > hi[1] {
        return false;
    }
    let nx = ((hi[0] - lo[0]) / cell).ceil() as usize;
    let ny = ((hi[1] - lo[1]) / cell).ceil() as usize;
    for i in 0..=nx {
        for j in 0..=ny {
            let p = [lo[0] + i as f64 * cell, lo[1] + j as f64 * cell];
            if rect_signed_distance(a, p) <= 0.0 && rect_signed_distance(b, p) <= 0.0 {
                return true;
            }
        }
    }
    false
}

/// `rect` with both half-extents grown by `margin` (shrunk when negative).
pub fn inflate(rect: &OrientedRect, margin: f64) -> OrientedRect {
    OrientedRect {
        half_length: rect.half_length + margin,
        half_width: rect.half_width + margin,
        ..*rect
    }
}

pub fn random_rect<R: Rng + ?Sized>(rng: &mut R) -> OrientedRect {
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let g = VehicleGeometry::new(rng.random_range(0.5..3.0), rng.random_range(1.0..6.0)).unwrap();
    OrientedRect::new(
        [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)],
        [angle.cos(), angle.sin()],
        &g,
    )
}
