use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{interpolate_trace, PlannerConfig, Scenario, SimError};
use crate::abt::{BeliefTree, SolverError};
use crate::domain::{
    rects_overlap, reward, spawn_particles, step_vehicle, IntersectionModel, JointState, ObservationVector,
    OrientedRect, VehicleObservation, VehicleState,
};
use crate::pomdp::DomainModel;

const NO_NOISE: [[f64; 3]; 3] = [[0.0; 3]; 3];
const MAX_STEPS: f64 = 1e5;

/// One closed-loop step: the ego state when the action was chosen, the
/// action, and the reward of the resulting transition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub t: f64,
    pub action: f64,
    pub p: f64,
    pub v: f64,
    pub r_vel: f64,
    pub r_acc: f64,
    pub r_crash: f64,
    pub crashed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// `Δt·Σ_k r_k`.
    pub normalized_reward: f64,
    pub crashed: bool,
    pub reached_goal: bool,
    pub steps: usize,
    /// Wall-clock time of the whole run (s).
    pub wall_runtime: f64,
    pub log: Vec<StepRecord>,
}

/// One JSON object per step. Wall-clock time is not included, so the log
/// of a given run is reproducible byte for byte.
pub fn write_run_log(result: &RunResult) -> String {
    let mut out = String::new();
    for record in &result.log {
        out.push_str(&serde_json::to_string(record).expect("step records serialize"));
        out.push('\n');
    }
    out
}

fn noisy(value: f64, var: f64, rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    if var > 0.0 {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        value + var.sqrt() * z
    } else {
        value
    }
}

struct Planner {
    roster: Vec<usize>,
    model: IntersectionModel,
    tree: BeliefTree<IntersectionModel>,
}

/// Runs one closed-loop simulation until a crash, the goal or the scenario
/// horizon.
///
/// At every step the other vehicles present in their traces are observed
/// with noise, the belief is advanced (or rebuilt when the set of present
/// vehicles changes), the planner picks an acceleration and the ego moves
/// as a point mass. A crash is an overlap of the ego with a traced vehicle
/// at the end of the step.
pub fn run_simulation(scenario: &Scenario, config: &PlannerConfig, dt: f64, seed: u64) -> Result<RunResult, SimError> {
    config.validate()?;
    if !(dt > 0.0 && dt.is_finite()) || scenario.horizon / dt > MAX_STEPS {
        return Err(SimError::Config(format!(
            "time step {dt} must be positive with at most {MAX_STEPS} steps over the horizon"
        )));
    }
    let start = Instant::now();
    let world = &scenario.world;
    let noise = config.domain.noise.observation;
    let solver = config.solver;
    let ego_length = world.path(scenario.ego.path).length();
    let ego_geometry = scenario.ego.geometry;
    let goal = ego_length - 0.5 * ego_geometry.length;

    let mut obs_rng = ChaCha8Rng::seed_from_u64(seed);
    obs_rng.set_stream(1);
    let mut plan_rng = ChaCha8Rng::seed_from_u64(seed);
    plan_rng.set_stream(2);

    let mut ego = VehicleState::new(scenario.ego.p0, scenario.ego.v0, scenario.ego.path);
    let max_steps = (scenario.horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let mut planner: Option<Planner> = None;
    let mut last_action = 0;
    let mut total = 0.0;
    let mut log = Vec::new();
    let (mut crashed, mut reached_goal) = (false, false);

    for k in 0..max_steps {
        let t = k as f64 * dt;
        let roster: Vec<usize> = (0..scenario.vehicles.len())
            .filter(|&i| scenario.vehicles[i].present_at(t))
            .collect();
        let obs: ObservationVector = roster
            .iter()
            .map(|&i| {
                let s = interpolate_trace(&scenario.vehicles[i].samples, t).expect("vehicle is present");
                VehicleObservation {
                    position: [
                        noisy(s.position[0], noise.position_var, &mut obs_rng),
                        noisy(s.position[1], noise.position_var, &mut obs_rng),
                    ],
                    velocity: [
                        noisy(s.velocity[0], noise.velocity_var, &mut obs_rng),
                        noisy(s.velocity[1], noise.velocity_var, &mut obs_rng),
                    ],
                    heading: noisy(s.heading[1].atan2(s.heading[0]), noise.heading_var, &mut obs_rng),
                }
            })
            .collect();

        let current = ego;
        let regenerate = |o: &ObservationVector, rng: &mut ChaCha8Rng| {
            spawn_particles(current, o, world, solver.particles, rng).expect("particle count is positive")
        };
        match &mut planner {
            Some(p) if p.roster == roster => {
                p.tree
                    .advance(last_action, &obs, &p.model, &solver, &mut plan_rng, regenerate)?;
            }
            _ => {
                let geometries = std::iter::once(ego_geometry)
                    .chain(roster.iter().map(|&i| scenario.vehicles[i].geometry))
                    .collect();
                let model =
                    IntersectionModel::new(world.clone(), geometries, config.domain, config.actions.clone(), dt)?;
                let belief =
                    spawn_particles(ego, &obs, world, solver.particles, &mut plan_rng).map_err(SolverError::from)?;
                let tree = BeliefTree::new(belief, &model);
                planner = Some(Planner { roster, model, tree });
            }
        }
        let p = planner.as_mut().expect("planner initialized above");
        let action = match p.tree.plan(&p.model, &solver, &mut plan_rng) {
            Ok(a) => a,
            // Every root particle is terminal: nothing to search over.
            Err(SolverError::NoEpisodes) => p.model.default_action(&p.tree.belief().states()[0]),
            Err(e) => return Err(e.into()),
        };
        last_action = action;
        let accel = config.actions.value(action);
        let next = step_vehicle(&ego, accel, dt, ego_length, &NO_NOISE, &mut plan_rng);

        let t_next = (k + 1) as f64 * dt;
        let ego_point = world.path(next.path).eval(next.p);
        let ego_rect = OrientedRect::new(ego_point.position, ego_point.heading, &ego_geometry);
        crashed = scenario.vehicles.iter().any(|veh| {
            interpolate_trace(&veh.samples, t_next)
                .is_some_and(|s| rects_overlap(&ego_rect, &OrientedRect::new(s.position, s.heading, &veh.geometry)))
        });
        let terms = reward(&JointState::new(next, []), accel, crashed, world, &config.domain.reward);
        total += terms.total();
        log.push(StepRecord {
            k,
            t,
            action: accel,
            p: ego.p,
            v: ego.v,
            r_vel: terms.velocity,
            r_acc: terms.accel,
            r_crash: terms.crash,
            crashed,
        });
        ego = next;
        if crashed {
            break;
        }
        if ego.p >= goal {
            reached_goal = true;
            break;
        }
    }

    Ok(RunResult {
        normalized_reward: dt * total,
        crashed,
        reached_goal,
        steps: log.len(),
        wall_runtime: start.elapsed().as_secs_f64(),
        log,
    })
}
