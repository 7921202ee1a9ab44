//! The intersection POMDP.
//!
//! Every vehicle is reduced to `[p, v, μ]`: its arc-length position along
//! path μ and its longitudinal speed. The ego's path is known; the other
//! vehicles' paths are hidden and tracked by the particle filter. Other
//! vehicles accelerate according to the intelligent driver model, the ego
//! according to the chosen action.

mod collision;
mod dynamics;
mod model;
mod observation;
mod reward;

pub use collision::{collision_check, rects_overlap, terminal_status, OrientedRect, TerminalStatus};
pub use dynamics::{
    desired_velocity, find_leader, idm_accel, idm_desired_gap, step_vehicle, Intersection, Leader,
    LEADER_LATERAL_LIMIT, LEADER_LOOKAHEAD, MIN_LEADER_GAP,
};
pub use model::IntersectionModel;
pub use observation::{
    intention_distribution, intention_features, observation_key, observation_likelihood, observe, spawn_particles,
    ObservationKey, ObservationVector, VehicleObservation,
};
pub use reward::{reward, RewardTerms};

use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("path index {0} out of range")]
    UnknownPath(usize),
}

/// `[p, v, μ]` of one vehicle. `path` is the 0-based index of μ in the
/// [`PathSet`](crate::topology::PathSet).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub p: f64,
    pub v: f64,
    pub path: usize,
}

impl VehicleState {
    pub fn new(p: f64, v: f64, path: usize) -> Self {
        Self { p, v, path }
    }
}

/// Ego plus the other vehicles, in a fixed order for a whole episode.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub ego: VehicleState,
    pub others: SmallVec<[VehicleState; 4]>,
}

impl JointState {
    pub fn new(ego: VehicleState, others: impl IntoIterator<Item = VehicleState>) -> Self {
        Self {
            ego,
            others: others.into_iter().collect(),
        }
    }

    /// Vehicle by index: 0 is the ego, `i ≥ 1` is `others[i - 1]`.
    pub fn vehicle(&self, index: usize) -> &VehicleState {
        if index == 0 {
            &self.ego
        } else {
            &self.others[index - 1]
        }
    }

    /// Ego and others, ego first.
    pub fn vehicles(&self) -> impl Iterator<Item = &VehicleState> {
        std::iter::once(&self.ego).chain(self.others.iter())
    }

    pub fn vehicle_count(&self) -> usize {
        self.others.len() + 1
    }
}

/// Bounding rectangle size (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleGeometry {
    pub width: f64,
    pub length: f64,
}

impl VehicleGeometry {
    pub fn new(width: f64, length: f64) -> Result<Self, DomainError> {
        if width > 0.0 && length > 0.0 && width.is_finite() && length.is_finite() {
            Ok(Self { width, length })
        } else {
            Err(DomainError::InvalidParameter(format!(
                "vehicle geometry {width}×{length} must be positive"
            )))
        }
    }
}

/// Intelligent driver model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmParams {
    /// Desired speed v_des (m/s).
    pub desired_speed: f64,
    /// Time headway τ (s).
    pub time_headway: f64,
    /// Acceleration exponent δ.
    pub exponent: f64,
    /// Minimum gap d_min (m).
    pub min_gap: f64,
    /// Maximum acceleration a_max (m/s², positive).
    pub max_accel: f64,
    /// Maximum deceleration a_min (m/s², negative).
    pub min_accel: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            desired_speed: 8.0,
            time_headway: 2.0,
            exponent: 4.0,
            min_gap: 1.0,
            max_accel: 1.0,
            min_accel: -2.0,
        }
    }
}

impl IdmParams {
    pub fn validate(&self) -> Result<(), DomainError> {
        let ok = self.desired_speed > 0.0
            && self.time_headway >= 0.0
            && self.exponent > 0.0
            && self.min_gap >= 0.0
            && self.max_accel > 0.0
            && self.min_accel < 0.0;
        if ok {
            Ok(())
        } else {
            Err(DomainError::InvalidParameter(format!("IDM parameters {self:?}")))
        }
    }
}

/// Reward weights and speed limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    /// R_vel.
    pub velocity_weight: f64,
    /// R_acc.
    pub accel_weight: f64,
    /// R_crash.
    pub crash_weight: f64,
    /// a_lat,max (m/s²).
    pub max_lateral_accel: f64,
    /// v_lim (m/s).
    pub speed_limit: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            velocity_weight: 100.0,
            accel_weight: 1.0,
            crash_weight: 10_000.0,
            max_lateral_accel: 0.5,
            speed_limit: 8.0,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<(), DomainError> {
        let vals = [
            self.velocity_weight,
            self.accel_weight,
            self.crash_weight,
            self.max_lateral_accel,
            self.speed_limit,
        ];
        if vals.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(DomainError::InvalidParameter(format!("reward parameters {self:?}")))
        }
    }
}

/// Per-coordinate observation noise variances.
///
/// Position and velocity are 2-D; each coordinate gets the same variance.
/// A zero variance means that block is observed exactly and it is left out
/// of the likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationNoise {
    pub position_var: f64,
    pub velocity_var: f64,
    pub heading_var: f64,
}

impl Default for ObservationNoise {
    fn default() -> Self {
        Self {
            position_var: 1e-2,
            velocity_var: 1e-2,
            heading_var: 0.0,
        }
    }
}

/// Dynamics and observation noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Covariance Q of the additive noise on `[p, v, μ]`. Only the `(p, v)`
    /// block is used; the intention never changes.
    pub dynamics: [[f64; 3]; 3],
    pub observation: ObservationNoise,
    /// Standard deviation σ_ω1 of the IDM acceleration noise (m/s²).
    pub idm_std: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            dynamics: [[0.0; 3]; 3],
            observation: ObservationNoise::default(),
            idm_std: 1.0,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<(), DomainError> {
        let o = &self.observation;
        let q = &self.dynamics;
        let psd_2x2 = q[0][0] >= 0.0
            && q[1][1] >= 0.0
            && (q[0][1] - q[1][0]).abs() < 1e-12
            && q[0][0] * q[1][1] - q[0][1] * q[1][0] >= -1e-12;
        let ok =
            psd_2x2 && o.position_var >= 0.0 && o.velocity_var >= 0.0 && o.heading_var >= 0.0 && self.idm_std >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(DomainError::InvalidParameter(format!("noise parameters {self:?}")))
        }
    }
}

/// Everything the intersection model needs besides geometry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DomainParams {
    pub idm: IdmParams,
    pub reward: RewardParams,
    pub noise: NoiseParams,
    /// Desired speed of the other vehicles in the IDM. `None` uses the
    /// curvature-aware desired velocity at each vehicle's own position.
    pub others_desired_speed: Option<f64>,
}

impl DomainParams {
    pub fn validate(&self) -> Result<(), DomainError> {
        self.idm.validate()?;
        self.reward.validate()?;
        self.noise.validate()?;
        if let Some(v) = self.others_desired_speed {
            if !(v > 0.0) {
                return Err(DomainError::InvalidParameter(format!(
                    "others' desired speed {v} must be positive"
                )));
            }
        }
        Ok(())
    }
}
