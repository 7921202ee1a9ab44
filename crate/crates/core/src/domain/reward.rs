use super::{desired_velocity, Intersection, JointState, RewardParams};

/// The three reward components of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardTerms {
    pub velocity: f64,
    pub accel: f64,
    pub crash: f64,
}

impl RewardTerms {
    pub fn total(&self) -> f64 {
        self.velocity + self.accel + self.crash
    }
}

/// Reward for reaching `next` with ego acceleration `accel`.
///
/// With `Δv = v_des − v` at the ego's new position the velocity term is
/// `−R_vel·Δv` for `Δv ≥ 1` and `−R_vel·Δv²` otherwise, so overspeeding is
/// penalized quadratically.
pub fn reward(
    next: &JointState,
    accel: f64,
    crashed: bool,
    world: &Intersection,
    params: &RewardParams,
) -> RewardTerms {
    let ego = &next.ego;
    let dv = desired_velocity(ego.p, world.path(ego.path), params) - ego.v;
    let velocity = if dv >= 1.0 {
        -params.velocity_weight * dv
    } else {
        -params.velocity_weight * dv * dv
    };
    RewardTerms {
        velocity,
        accel: -params.accel_weight * accel * accel,
        crash: if crashed { -params.crash_weight } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::VehicleState;
    use crate::topology::{fit_spline, PathSet};

    fn world() -> Intersection {
        let s = fit_spline(&[[0.0, 0.0], [100.0, 0.0]]).unwrap();
        Intersection::new(PathSet::new(vec![s], vec![vec!["a".into()]]))
    }

    fn at_speed(v: f64) -> JointState {
        JointState::new(VehicleState::new(10.0, v, 0), [])
    }

    #[test]
    fn examples() {
        let w = world();
        let p = RewardParams::default();
        let r = reward(&at_speed(6.0), 1.0, false, &w, &p);
        assert_eq!(r.total(), -201.0);
        let r = reward(&at_speed(8.0), 0.0, false, &w, &p);
        assert_eq!(r.total(), 0.0);
        let r = reward(&at_speed(7.5), 0.0, false, &w, &p);
        assert_eq!(r.velocity, -25.0);
        let r = reward(&at_speed(9.0), -2.0, false, &w, &p);
        assert_eq!(r.total(), -104.0);
    }

    #[test]
    fn crash_term() {
        let w = world();
        let p = RewardParams::default();
        let r = reward(&at_speed(8.0), 0.0, true, &w, &p);
        assert_eq!(r.crash, -10_000.0);
        assert_eq!(r.total(), -10_000.0);
    }

    #[test]
    fn velocity_term_continuous_at_one() {
        let w = world();
        let p = RewardParams::default();
        let below = reward(&at_speed(7.0 + 1e-9), 0.0, false, &w, &p).velocity;
        let at = reward(&at_speed(7.0), 0.0, false, &w, &p).velocity;
        assert!((below - at).abs() < 1e-6);
    }
}
