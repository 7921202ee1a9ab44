use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use smallvec::SmallVec;

use super::{Intersection, JointState, ObservationNoise, VehicleState};
use crate::pomdp::{BeliefError, ParticleBelief};
use crate::topology::{PathSet, Point};

/// Measured pose of one other vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleObservation {
    pub position: Point,
    pub velocity: Point,
    /// Heading angle (rad).
    pub heading: f64,
}

impl VehicleObservation {
    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

/// Observations of the other vehicles, in roster order. The ego is not
/// included: its state is known.
pub type ObservationVector = SmallVec<[VehicleObservation; 4]>;

/// Discretized observation used to branch the belief tree.
pub type ObservationKey = SmallVec<[i32; 12]>;

const KEY_POSITION_CELL: f64 = 2.0;
const KEY_SPEED_CELL: f64 = 1.0;

/// Noise-free pose of a vehicle at its path position.
pub(crate) fn true_pose(state: &VehicleState, world: &Intersection) -> VehicleObservation {
    let point = world.path(state.path).eval(state.p);
    VehicleObservation {
        position: point.position,
        velocity: [state.v * point.heading[0], state.v * point.heading[1]],
        heading: point.heading[1].atan2(point.heading[0]),
    }
}

fn gaussian<R: Rng + ?Sized>(var: f64, rng: &mut R) -> f64 {
    if var > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        var.sqrt() * z
    } else {
        0.0
    }
}

/// Samples an observation of every other vehicle.
pub fn observe<R: Rng + ?Sized>(
    joint: &JointState,
    world: &Intersection,
    noise: &ObservationNoise,
    rng: &mut R,
) -> ObservationVector {
    joint
        .others
        .iter()
        .map(|s| {
            let mut o = true_pose(s, world);
            for c in 0..2 {
                o.position[c] += gaussian(noise.position_var, rng);
            }
            for c in 0..2 {
                o.velocity[c] += gaussian(noise.velocity_var, rng);
            }
            o.heading += gaussian(noise.heading_var, rng);
            o
        })
        .collect()
}

/// Unnormalized Gaussian likelihood of `obs` given the joint state: the
/// product over vehicles and coordinates of `exp(-r²/2σ²)`. Blocks with zero
/// variance are observed exactly and left out.
pub fn observation_likelihood(
    obs: &ObservationVector,
    joint: &JointState,
    world: &Intersection,
    noise: &ObservationNoise,
) -> f64 {
    if obs.len() != joint.others.len() {
        return 0.0;
    }
    let mut exponent = 0.0;
    for (o, s) in obs.iter().zip(&joint.others) {
        let pred = true_pose(s, world);
        if noise.position_var > 0.0 {
            let r2 = (o.position[0] - pred.position[0]).powi(2) + (o.position[1] - pred.position[1]).powi(2);
            exponent += r2 / (2.0 * noise.position_var);
        }
        if noise.velocity_var > 0.0 {
            let r2 = (o.velocity[0] - pred.velocity[0]).powi(2) + (o.velocity[1] - pred.velocity[1]).powi(2);
            exponent += r2 / (2.0 * noise.velocity_var);
        }
        if noise.heading_var > 0.0 {
            let mut dh = o.heading - pred.heading;
            dh = (dh + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            exponent += dh * dh / (2.0 * noise.heading_var);
        }
    }
    (-exponent).exp()
}

/// `(f1, f2)` for one path: `f1 = exp(-0.05·D⁴ + 1)` on the lateral distance
/// D to the path, `f2 = exp(3(α - 1))` on the cosine α between the observed
/// heading and the path heading at the projected point.
pub fn intention_features(obs: &VehicleObservation, path: &crate::topology::PathSpline) -> (f64, f64) {
    let (log_f1, log_f2) = log_features(obs, path);
    (log_f1.exp(), log_f2.exp())
}

fn log_features(obs: &VehicleObservation, path: &crate::topology::PathSpline) -> (f64, f64) {
    let proj = path.project(obs.position);
    let psi = path.heading(proj.p);
    let alpha = obs.heading.cos() * psi[0] + obs.heading.sin() * psi[1];
    (-0.05 * proj.distance.powi(4) + 1.0, 3.0 * (alpha - 1.0))
}

/// Intention distribution `P(μ) ∝ q(μ)·f1·f2` over all paths.
pub fn intention_distribution(obs: &VehicleObservation, paths: &PathSet) -> Vec<f64> {
    let logits: Vec<f64> = paths
        .paths()
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let (a, b) = log_features(obs, path);
            paths.overlap(i).ln() + a + b
        })
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Fresh belief from a single observation: each other vehicle's path is
/// drawn from its intention distribution, its position is the projection of
/// the observed position onto that path and its speed is the observed
/// velocity projected on the path heading, floored at 0.
pub fn spawn_particles<R: Rng + ?Sized>(
    ego: VehicleState,
    obs: &ObservationVector,
    world: &Intersection,
    n: usize,
    rng: &mut R,
) -> Result<ParticleBelief<JointState>, BeliefError> {
    if n == 0 {
        return Err(BeliefError::ZeroParticles);
    }
    let paths = world.paths();
    let per_vehicle: Vec<(WeightedIndex<f64>, Vec<(f64, f64)>)> = obs
        .iter()
        .map(|o| {
            let dist = intention_distribution(o, paths);
            let candidates = paths
                .paths()
                .iter()
                .map(|path| {
                    let p = path.project(o.position).p;
                    let psi = path.heading(p);
                    (p, (o.velocity[0] * psi[0] + o.velocity[1] * psi[1]).max(0.0))
                })
                .collect();
            (
                WeightedIndex::new(&dist).expect("intention weights are normalized"),
                candidates,
            )
        })
        .collect();
    let states = (0..n)
        .map(|_| {
            let others = per_vehicle.iter().map(|(dist, candidates)| {
                let path = dist.sample(rng);
                let (p, v) = candidates[path];
                VehicleState::new(p, v, path)
            });
            JointState::new(ego, others)
        })
        .collect();
    ParticleBelief::uniform(states)
}

/// Per vehicle: position cell (2 m) and speed cell (1 m/s).
pub fn observation_key(obs: &ObservationVector) -> ObservationKey {
    let mut key = ObservationKey::new();
    for o in obs {
        key.push((o.position[0] / KEY_POSITION_CELL).floor() as i32);
        key.push((o.position[1] / KEY_POSITION_CELL).floor() as i32);
        key.push((o.speed() / KEY_SPEED_CELL).floor() as i32);
    }
    key
}
