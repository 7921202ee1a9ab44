use rand::Rng;
use rand_distr::StandardNormal;

use super::collision::departed;
use super::{IdmParams, JointState, RewardParams, VehicleGeometry, VehicleState};
use crate::topology::{PathSet, PathSpline};

/// A vehicle counts as a leader only if its centre projects onto the
/// follower's path within this lateral distance (m).
pub const LEADER_LATERAL_LIMIT: f64 = 1.5;
/// Leaders further ahead than this along the path are ignored (m).
pub const LEADER_LOOKAHEAD: f64 = 100.0;
/// Floor on the bumper-to-bumper leader gap (m).
pub const MIN_LEADER_GAP: f64 = 0.1;

/// Spacing of the precomputed cross-path projection tables (m).
const RELATION_STEP: f64 = 0.25;

/// Where points of one path land on another.
#[derive(Debug, Clone)]
enum Relation {
    /// Same path: the projection is the identity.
    Identity,
    /// The paths never come within the leader lateral limit.
    Disjoint,
    /// `(p on target, lateral distance)` for points every
    /// [`RELATION_STEP`] metres along the source path.
    Sampled(Vec<(f64, f64)>),
}

/// Path set plus the cross-path projection tables used by the leader search.
#[derive(Debug, Clone)]
pub struct Intersection {
    paths: PathSet,
    // relations[target][source]
    relations: Vec<Vec<Relation>>,
}

fn bounding_box(path: &PathSpline) -> [f64; 4] {
    let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    let n = (path.length() / RELATION_STEP).ceil() as usize;
    for k in 0..=n {
        let q = path.position(k as f64 * RELATION_STEP);
        bb[0] = bb[0].min(q[0]);
        bb[1] = bb[1].min(q[1]);
        bb[2] = bb[2].max(q[0]);
        bb[3] = bb[3].max(q[1]);
    }
    bb
}

impl Intersection {
    pub fn new(paths: PathSet) -> Self {
        let boxes: Vec<[f64; 4]> = paths.paths().iter().map(bounding_box).collect();
        let margin = LEADER_LATERAL_LIMIT + 1.0;
        let relations = (0..paths.len())
            .map(|target| {
                (0..paths.len())
                    .map(|source| {
                        if target == source {
                            return Relation::Identity;
                        }
                        let (a, b) = (&boxes[target], &boxes[source]);
                        if a[0] - margin > b[2] || b[0] - margin > a[2] || a[1] - margin > b[3] || b[1] - margin > a[3]
                        {
                            return Relation::Disjoint;
                        }
                        let src = paths.path(source);
                        let dst = paths.path(target);
                        let n = (src.length() / RELATION_STEP).ceil() as usize;
                        let samples: Vec<(f64, f64)> = (0..=n)
                            .map(|k| {
                                let proj = dst.project(src.position(k as f64 * RELATION_STEP));
                                (proj.p, proj.distance)
                            })
                            .collect();
                        if samples.iter().all(|s| s.1 >= LEADER_LATERAL_LIMIT) {
                            Relation::Disjoint
                        } else {
                            Relation::Sampled(samples)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { paths, relations }
    }

    pub fn paths(&self) -> &PathSet {
        &self.paths
    }

    pub fn path(&self, index: usize) -> &PathSpline {
        self.paths.path(index)
    }

    /// Position on `target` and lateral offset of the point at `p` on
    /// `source`, or `None` when the two paths never come close.
    pub fn relate(&self, source: usize, p: f64, target: usize) -> Option<(f64, f64)> {
        match &self.relations[target][source] {
            Relation::Identity => Some((p, 0.0)),
            Relation::Disjoint => None,
            Relation::Sampled(samples) => {
                let k = ((p / RELATION_STEP).round().max(0.0) as usize).min(samples.len() - 1);
                Some(samples[k])
            }
        }
    }
}

/// Point-mass step along the path.
///
/// `p' = p + vΔt + ½aΔt²`, `v' = v + aΔt`, plus Gaussian noise with the
/// `(p, v)` block of `q`. A vehicle braking to a stop within the step stays
/// stopped: it never reverses. `p'` is clamped to `[0, path_length]` and the
/// intention is unchanged.
pub fn step_vehicle<R: Rng + ?Sized>(
    state: &VehicleState,
    accel: f64,
    dt: f64,
    path_length: f64,
    q: &[[f64; 3]; 3],
    rng: &mut R,
) -> VehicleState {
    debug_assert!(dt > 0.0);
    let (mut p, mut v);
    if state.v + accel * dt >= 0.0 {
        p = state.p + state.v * dt + 0.5 * accel * dt * dt;
        v = state.v + accel * dt;
    } else {
        // Stops after t* = -v/a and stays put.
        p = state.p - state.v * state.v / (2.0 * accel);
        v = 0.0;
    }
    if q[0][0] != 0.0 || q[1][1] != 0.0 {
        let l00 = q[0][0].sqrt();
        let l10 = if l00 > 0.0 { q[1][0] / l00 } else { 0.0 };
        let l11 = (q[1][1] - l10 * l10).max(0.0).sqrt();
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        p += l00 * z0;
        v += l10 * z0 + l11 * z1;
    }
    VehicleState {
        p: p.clamp(0.0, path_length),
        v: v.max(0.0),
        path: state.path,
    }
}

/// Speed and bumper-to-bumper gap of the vehicle ahead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leader {
    pub speed: f64,
    pub gap: f64,
}

/// Desired dynamic gap
/// `d* = d_min + max(0, vτ + v(v − v_lead) / (2√(a_max |a_min|)))`.
pub fn idm_desired_gap(v: f64, v_lead: f64, params: &IdmParams) -> f64 {
    let dynamic =
        v * params.time_headway + v * (v - v_lead) / (2.0 * (params.max_accel * params.min_accel.abs()).sqrt());
    params.min_gap + dynamic.max(0.0)
}

/// IDM acceleration `a_max·ρ + ω`, clamped to `[a_min, a_max]`, with
/// `ρ = 1 − (v/v_des)^δ − (d*/d_lead)²` and `ω ~ N(0, σ²)`.
pub fn idm_accel<R: Rng + ?Sized>(v: f64, leader: Option<Leader>, params: &IdmParams, sigma: f64, rng: &mut R) -> f64 {
    let ratio = v / params.desired_speed;
    let free = if params.exponent == 4.0 {
        ratio.powi(4)
    } else {
        ratio.powf(params.exponent)
    };
    let interaction = match leader {
        Some(l) => (idm_desired_gap(v, l.speed, params) / l.gap).powi(2),
        None => 0.0,
    };
    let mut u = params.max_accel * (1.0 - free - interaction);
    if sigma > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        u += sigma * z;
    }
    u.clamp(params.min_accel, params.max_accel)
}

/// Nearest vehicle ahead of vehicle `index` (0 = ego) on its own path.
///
/// A candidate's centre must project onto the follower's path within
/// [`LEADER_LATERAL_LIMIT`] and land between 0 and [`LEADER_LOOKAHEAD`] metres
/// ahead. The gap is the path distance minus both half-lengths, floored at
/// [`MIN_LEADER_GAP`].
pub fn find_leader(
    joint: &JointState,
    index: usize,
    world: &Intersection,
    geometries: &[VehicleGeometry],
) -> Option<Leader> {
    let me = joint.vehicle(index);
    let mut best: Option<(f64, usize)> = None;
    for (j, other) in joint.vehicles().enumerate() {
        if j == index || departed(other, world) {
            continue;
        }
        let Some((p_on_mine, lateral)) = world.relate(other.path, other.p, me.path) else {
            continue;
        };
        let ahead = p_on_mine - me.p;
        if lateral < LEADER_LATERAL_LIMIT
            && ahead > 0.0
            && ahead <= LEADER_LOOKAHEAD
            && best.is_none_or(|(d, _)| ahead < d)
        {
            best = Some((ahead, j));
        }
    }
    best.map(|(ahead, j)| {
        let half = 0.5 * (geometries[index].length + geometries[j].length);
        Leader {
            speed: joint.vehicle(j).v,
            gap: (ahead - half).max(MIN_LEADER_GAP),
        }
    })
}

/// `min(sqrt(a_lat,max / κ), v_lim)` at position `p` of `path`.
pub fn desired_velocity(p: f64, path: &PathSpline, params: &RewardParams) -> f64 {
    let kappa = path.curvature(p);
    if kappa > 0.0 {
        (params.max_lateral_accel / kappa).sqrt().min(params.speed_limit)
    } else {
        params.speed_limit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::fit_spline;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const NO_NOISE: [[f64; 3]; 3] = [[0.0; 3]; 3];

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    fn straight_world() -> Intersection {
        let s = fit_spline(&[[0.0, 0.0], [200.0, 0.0]]).unwrap();
        Intersection::new(PathSet::new(vec![s], vec![vec!["a".into()]]))
    }

    #[test]
    fn uniform_motion() {
        let s = step_vehicle(&VehicleState::new(0.0, 8.0, 0), 0.0, 1.0, 100.0, &NO_NOISE, &mut rng());
        assert_eq!(s, VehicleState::new(8.0, 8.0, 0));
    }

    #[test]
    fn braking_step() {
        let s = step_vehicle(&VehicleState::new(0.0, 8.0, 0), -2.0, 0.5, 100.0, &NO_NOISE, &mut rng());
        assert_eq!(s, VehicleState::new(3.75, 7.0, 0));
    }

    #[test]
    fn no_reversing() {
        let s = step_vehicle(&VehicleState::new(5.0, 0.0, 0), -1.0, 1.0, 100.0, &NO_NOISE, &mut rng());
        assert_eq!(s, VehicleState::new(5.0, 0.0, 0));
        // Stops within the step: 1 m/s at -2 m/s² covers 0.25 m.
        let s = step_vehicle(&VehicleState::new(5.0, 1.0, 0), -2.0, 1.0, 100.0, &NO_NOISE, &mut rng());
        assert_eq!(s, VehicleState::new(5.25, 0.0, 0));
    }

    #[test]
    fn position_clamped_to_path() {
        let s = step_vehicle(&VehicleState::new(99.0, 8.0, 0), 0.0, 1.0, 100.0, &NO_NOISE, &mut rng());
        assert_eq!(s.p, 100.0);
    }

    #[test]
    fn dynamics_noise_has_configured_variance() {
        let q = [[0.04, 0.0, 0.0], [0.0, 0.09, 0.0], [0.0, 0.0, 0.0]];
        let mut r = rng();
        let n = 20_000;
        let (mut sp, mut sv) = (0.0, 0.0);
        for _ in 0..n {
            let s = step_vehicle(&VehicleState::new(50.0, 5.0, 0), 0.0, 1.0, 100.0, &q, &mut r);
            sp += (s.p - 55.0).powi(2);
            sv += (s.v - 5.0).powi(2);
        }
        assert!((sp / n as f64 - 0.04).abs() < 0.004);
        assert!((sv / n as f64 - 0.09).abs() < 0.009);
    }

    #[test]
    fn idm_free_road() {
        let params = IdmParams::default();
        assert_eq!(idm_accel(0.0, None, &params, 0.0, &mut rng()), params.max_accel);
        assert_eq!(idm_accel(params.desired_speed, None, &params, 0.0, &mut rng()), 0.0);
    }

    #[test]
    fn idm_following_at_desired_gap() {
        let params = IdmParams::default();
        assert_eq!(idm_desired_gap(8.0, 8.0, &params), 17.0);
        let leader = Leader { speed: 8.0, gap: 17.0 };
        assert_eq!(
            idm_accel(8.0, Some(leader), &params, 0.0, &mut rng()),
            -params.max_accel
        );
    }

    #[test]
    fn idm_output_clamped() {
        let params = IdmParams::default();
        let leader = Leader { speed: 0.0, gap: 0.1 };
        assert_eq!(idm_accel(8.0, Some(leader), &params, 0.0, &mut rng()), params.min_accel);
        let mut r = rng();
        for _ in 0..1000 {
            let u = idm_accel(4.0, None, &params, 5.0, &mut r);
            assert!((params.min_accel..=params.max_accel).contains(&u));
        }
    }

    #[test]
    fn leader_selection() {
        let world = straight_world();
        let geo = [VehicleGeometry::new(2.0, 4.0).unwrap(); 3];
        let alone = JointState::new(VehicleState::new(10.0, 5.0, 0), []);
        assert_eq!(find_leader(&alone, 0, &world, &geo), None);

        let ahead = JointState::new(VehicleState::new(10.0, 5.0, 0), [VehicleState::new(30.0, 3.0, 0)]);
        let l = find_leader(&ahead, 0, &world, &geo).unwrap();
        assert_eq!(l, Leader { speed: 3.0, gap: 16.0 });
        // The vehicle ahead has nobody in front of it.
        assert_eq!(find_leader(&ahead, 1, &world, &geo), None);

        let touching = JointState::new(VehicleState::new(10.0, 5.0, 0), [VehicleState::new(12.0, 3.0, 0)]);
        assert_eq!(find_leader(&touching, 0, &world, &geo).unwrap().gap, MIN_LEADER_GAP);
    }

    #[test]
    fn leader_on_other_path_within_lateral_limit() {
        let a = fit_spline(&[[0.0, 0.0], [100.0, 0.0]]).unwrap();
        let near = fit_spline(&[[0.0, 1.0], [100.0, 1.0]]).unwrap();
        let far = fit_spline(&[[0.0, 5.0], [100.0, 5.0]]).unwrap();
        let world = Intersection::new(PathSet::new(
            vec![a, near, far],
            vec![vec!["a".into()], vec!["n".into()], vec!["f".into()]],
        ));
        let geo = [VehicleGeometry::new(2.0, 4.0).unwrap(); 3];
        let joint = JointState::new(
            VehicleState::new(10.0, 5.0, 0),
            [VehicleState::new(40.0, 2.0, 1), VehicleState::new(20.0, 2.0, 2)],
        );
        let l = find_leader(&joint, 0, &world, &geo).unwrap();
        assert!((l.gap - 26.0).abs() < 0.2, "{l:?}");
        assert_eq!(l.speed, 2.0);
    }

    #[test]
    fn desired_velocity_examples() {
        let params = RewardParams::default();
        let straight = fit_spline(&[[0.0, 0.0], [50.0, 0.0]]).unwrap();
        assert_eq!(desired_velocity(10.0, &straight, &params), 8.0);
        // Circle of radius 2: κ = 0.5 → sqrt(0.5 / 0.5) = 1.
        let circle: Vec<[f64; 2]> = (0..=180)
            .map(|k| {
                let a = (k as f64).to_radians();
                [2.0 * a.cos(), 2.0 * a.sin()]
            })
            .collect();
        let c = fit_spline(&circle).unwrap();
        assert!((desired_velocity(c.length() / 2.0, &c, &params) - 1.0).abs() < 0.01);
    }
}
