use serde::Deserialize;

use super::SimError;
use crate::abt::SolverConfig;
use crate::domain::{DomainParams, ObservationNoise};
use crate::pomdp::{ActionSet, Discount};

/// Scalar parameters that can be swept by name.
pub const SWEEPABLE_PARAMS: &[&str] = &[
    "N",
    "c",
    "n_ep",
    "n_par",
    "gamma",
    "lookahead",
    "sigma_omega1",
    "tau",
    "delta",
    "d_min",
    "a_max",
    "a_min",
    "R_acc",
    "R_vel",
    "R_crash",
    "a_lat_max",
    "v_lim",
    "v_des_others",
];

/// Solver, domain and action-set settings of one planner.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub solver: SolverConfig,
    pub domain: DomainParams,
    pub actions: ActionSet,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            domain: DomainParams::default(),
            actions: ActionSet::new(vec![-2.0, -1.0, 0.0, 1.0]).expect("default action set is valid"),
        }
    }
}

/// Overrides read from a JSON config file. Every key is optional; absent
/// keys keep their defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct ConfigFile {
    pub action_set: Option<Vec<f64>>,
    pub c: Option<f64>,
    pub N: Option<usize>,
    pub n_ep: Option<usize>,
    pub n_par: Option<usize>,
    pub gamma: Option<f64>,
    pub lookahead: Option<usize>,
    pub Q: Option<[[f64; 3]; 3]>,
    /// Diagonal of R: position, velocity and heading variance.
    pub R: Option<[f64; 3]>,
    pub sigma_omega1: Option<f64>,
    pub tau: Option<f64>,
    pub delta: Option<f64>,
    pub d_min: Option<f64>,
    pub a_max: Option<f64>,
    pub a_min: Option<f64>,
    pub R_acc: Option<f64>,
    pub R_vel: Option<f64>,
    pub R_crash: Option<f64>,
    pub a_lat_max: Option<f64>,
    pub v_lim: Option<f64>,
    /// Fixed IDM desired speed for the other vehicles; curvature-aware when
    /// absent.
    pub v_des_others: Option<f64>,
}

impl ConfigFile {
    pub fn from_json(bytes: &[u8]) -> Result<Self, SimError> {
        serde_json::from_slice(bytes).map_err(|e| SimError::Config(e.to_string()))
    }

    /// Applies the overrides on top of `base` and validates the result.
    pub fn apply(&self, base: &PlannerConfig) -> Result<PlannerConfig, SimError> {
        let mut cfg = base.clone();
        let err = |e: &dyn std::fmt::Display| SimError::Config(e.to_string());
        if let Some(a) = &self.action_set {
            cfg.actions = ActionSet::new(a.clone()).map_err(|e| err(&e))?;
        }
        let s = &mut cfg.solver;
        if let Some(v) = self.c {
            s.ucb_c = v;
        }
        if let Some(v) = self.N {
            s.horizon = v;
        }
        if let Some(v) = self.n_ep {
            s.episodes = v;
        }
        if let Some(v) = self.n_par {
            s.particles = v;
        }
        if let Some(v) = self.gamma {
            s.discount = Discount::new(v).map_err(|e| err(&e))?;
        }
        if let Some(v) = self.lookahead {
            s.lookahead_depth = v;
        }
        let d = &mut cfg.domain;
        if let Some(q) = self.Q {
            d.noise.dynamics = q;
        }
        if let Some([p, v, h]) = self.R {
            d.noise.observation = ObservationNoise {
                position_var: p,
                velocity_var: v,
                heading_var: h,
            };
        }
        let fields = [
            (self.sigma_omega1, &mut d.noise.idm_std),
            (self.tau, &mut d.idm.time_headway),
            (self.delta, &mut d.idm.exponent),
            (self.d_min, &mut d.idm.min_gap),
            (self.a_max, &mut d.idm.max_accel),
            (self.a_min, &mut d.idm.min_accel),
            (self.R_acc, &mut d.reward.accel_weight),
            (self.R_vel, &mut d.reward.velocity_weight),
            (self.R_crash, &mut d.reward.crash_weight),
            (self.a_lat_max, &mut d.reward.max_lateral_accel),
            (self.v_lim, &mut d.reward.speed_limit),
        ];
        for (value, slot) in fields {
            if let Some(v) = value {
                *slot = v;
            }
        }
        if self.v_des_others.is_some() {
            d.others_desired_speed = self.v_des_others;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl PlannerConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self, SimError> {
        ConfigFile::from_json(bytes)?.apply(&Self::default())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.solver.validate().map_err(|e| SimError::Config(e.to_string()))?;
        if self.solver.episodes == 0 {
            return Err(SimError::Config("n_ep must be positive".into()));
        }
        self.domain.validate().map_err(|e| SimError::Config(e.to_string()))
    }

    /// Copy with one named scalar parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self, SimError> {
        if !SWEEPABLE_PARAMS.contains(&name) {
            return Err(SimError::Config(format!(
                "unknown parameter {name}; expected one of {}",
                SWEEPABLE_PARAMS.join(", ")
            )));
        }
        let number = if value.fract() == 0.0 && value.abs() < 9.0e15 {
            serde_json::Value::from(value as i64)
        } else {
            serde_json::Value::from(value)
        };
        let json = serde_json::json!({ name: number });
        let file: ConfigFile =
            serde_json::from_value(json).map_err(|e| SimError::Config(format!("{name} = {value}: {e}")))?;
        file.apply(self)
    }

    /// Current value of a named scalar parameter.
    pub fn param(&self, name: &str) -> Option<f64> {
        let s = &self.solver;
        let d = &self.domain;
        Some(match name {
            "N" => s.horizon as f64,
            "c" => s.ucb_c,
            "n_ep" => s.episodes as f64,
            "n_par" => s.particles as f64,
            "gamma" => s.discount.value(),
            "lookahead" => s.lookahead_depth as f64,
            "sigma_omega1" => d.noise.idm_std,
            "tau" => d.idm.time_headway,
            "delta" => d.idm.exponent,
            "d_min" => d.idm.min_gap,
            "a_max" => d.idm.max_accel,
            "a_min" => d.idm.min_accel,
            "R_acc" => d.reward.accel_weight,
            "R_vel" => d.reward.velocity_weight,
            "R_crash" => d.reward.crash_weight,
            "a_lat_max" => d.reward.max_lateral_accel,
            "v_lim" => d.reward.speed_limit,
            "v_des_others" => d.others_desired_speed?,
            _ => return None,
        })
    }
}
