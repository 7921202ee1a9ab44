use std::sync::Arc;

use rand::Rng;

use super::{
    collision_check, desired_velocity, find_leader, idm_accel, observation_key, observation_likelihood, observe,
    reward, step_vehicle, terminal_status, DomainError, DomainParams, IdmParams, Intersection, JointState,
    ObservationKey, ObservationVector, TerminalStatus, VehicleGeometry,
};
use crate::pomdp::{ActionSet, DomainModel};

const NO_NOISE: [[f64; 3]; 3] = [[0.0; 3]; 3];

/// The intersection POMDP: ego acceleration actions, IDM-driven other
/// vehicles with hidden paths, and noisy pose observations.
#[derive(Debug, Clone)]
pub struct IntersectionModel {
    world: Arc<Intersection>,
    geometries: Vec<VehicleGeometry>,
    params: DomainParams,
    actions: ActionSet,
    dt: f64,
}

impl IntersectionModel {
    /// `geometries[0]` is the ego, `geometries[i]` the i-th other vehicle.
    pub fn new(
        world: Arc<Intersection>,
        geometries: Vec<VehicleGeometry>,
        params: DomainParams,
        actions: ActionSet,
        dt: f64,
    ) -> Result<Self, DomainError> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(DomainError::InvalidParameter(format!("time step {dt}")));
        }
        if geometries.is_empty() {
            return Err(DomainError::InvalidParameter("no ego geometry".into()));
        }
        Ok(Self {
            world,
            geometries,
            params,
            actions,
            dt,
        })
    }

    pub fn world(&self) -> &Arc<Intersection> {
        &self.world
    }

    pub fn geometries(&self) -> &[VehicleGeometry] {
        &self.geometries
    }

    pub fn params(&self) -> &DomainParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn status(&self, state: &JointState) -> TerminalStatus {
        terminal_status(state, &self.world, &self.geometries)
    }

    /// IDM parameters for other vehicle `index` at its current position.
    fn idm_for(&self, state: &JointState, index: usize) -> IdmParams {
        let s = state.vehicle(index);
        let desired_speed = self
            .params
            .others_desired_speed
            .unwrap_or_else(|| desired_velocity(s.p, self.world.path(s.path), &self.params.reward));
        IdmParams {
            desired_speed: desired_speed.max(1e-3),
            ..self.params.idm
        }
    }
}

impl DomainModel for IntersectionModel {
    type State = JointState;
    type Observation = ObservationVector;
    type ObservationKey = ObservationKey;

    fn action_set(&self) -> &ActionSet {
        &self.actions
    }

    /// The ego follows the commanded acceleration exactly; the others follow
    /// the IDM with respect to the current state, plus the dynamics noise.
    fn sample_transition<R: Rng + ?Sized>(&self, state: &JointState, action: usize, rng: &mut R) -> JointState {
        let mut next = state.clone();
        for i in 1..state.vehicle_count() {
            let s = state.vehicle(i);
            let leader = find_leader(state, i, &self.world, &self.geometries);
            let accel = idm_accel(s.v, leader, &self.idm_for(state, i), self.params.noise.idm_std, rng);
            let length = self.world.path(s.path).length();
            next.others[i - 1] = step_vehicle(s, accel, self.dt, length, &self.params.noise.dynamics, rng);
        }
        let ego_length = self.world.path(state.ego.path).length();
        next.ego = step_vehicle(
            &state.ego,
            self.actions.value(action),
            self.dt,
            ego_length,
            &NO_NOISE,
            rng,
        );
        next
    }

    fn sample_observation<R: Rng + ?Sized>(&self, next: &JointState, _: usize, rng: &mut R) -> ObservationVector {
        observe(next, &self.world, &self.params.noise.observation, rng)
    }

    fn observation_likelihood(&self, obs: &ObservationVector, next: &JointState, _: usize) -> f64 {
        observation_likelihood(obs, next, &self.world, &self.params.noise.observation)
    }

    fn reward(&self, _: &JointState, action: usize, next: &JointState) -> f64 {
        let crashed = collision_check(next, &self.world, &self.geometries);
        reward(
            next,
            self.actions.value(action),
            crashed,
            &self.world,
            &self.params.reward,
        )
        .total()
    }

    /// `−R_crash` for a crash, 0 at the goal. A crash reached by a transition
    /// is therefore charged twice during search: once in the step reward and
    /// once as the terminal value.
    fn terminal_value(&self, state: &JointState) -> Option<f64> {
        match self.status(state) {
            TerminalStatus::Running => None,
            TerminalStatus::Crash => Some(-self.params.reward.crash_weight),
            TerminalStatus::Goal => Some(0.0),
        }
    }

    /// Coast.
    fn default_action(&self, _: &JointState) -> usize {
        self.actions.nearest(0.0)
    }

    fn observation_key(&self, obs: &ObservationVector) -> ObservationKey {
        observation_key(obs)
    }
}
