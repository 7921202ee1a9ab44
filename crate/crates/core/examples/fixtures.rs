//! Regenerates the bundled maps and scenarios under `fixtures/`.
//!
//! Maps are dense polylines built from straight segments, circular arcs and
//! quintic Hermite blends. Traffic traces are noise-free IDM rollouts along the
//! fitted paths with the curvature-aware desired speed, sampled every 0.1 s.
//!
//! Run with `cargo run -p crossing-core --example fixtures`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crossing_core::domain::{
    desired_velocity, find_leader, idm_accel, step_vehicle, IdmParams, Intersection, JointState, RewardParams,
    VehicleGeometry, VehicleState,
};
use crossing_core::topology::{parse_map, PathSet, Point};

const STEP: f64 = 1.0;
const SAMPLE_DT: f64 = 0.1;
const SUBSTEPS: usize = 4;

fn line(a: Point, b: Point) -> Vec<Point> {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    let n = (len / STEP).ceil().max(1.0) as usize;
    (0..=n)
        .map(|k| {
            let u = k as f64 / n as f64;
            [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]
        })
        .collect()
}

fn arc(center: Point, r: f64, from: f64, to: f64) -> Vec<Point> {
    let n = ((to - from).abs() * r / STEP).ceil().max(2.0) as usize;
    (0..=n)
        .map(|k| {
            let a = from + (to - from) * k as f64 / n as f64;
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect()
}

/// Quintic Hermite blend from `p0` (unit direction `d0`, signed curvature
/// `k0`) to `p1` (direction `d1`, curvature `k1`), so the curvature is
/// continuous at both joints. The tangent lengths are picked from a grid to
/// minimize the bending energy. Returns a dense polyline.
fn blend(p0: Point, d0: Point, k0: f64, p1: Point, d1: Point, k1: f64) -> Vec<Point> {
    let chord = (p1[0] - p0[0]).hypot(p1[1] - p0[1]);
    let curve = |m0: f64, m1: f64, t: f64| -> Point {
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let h = [
            1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
            t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
            0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
            0.5 * t3 - t4 + 0.5 * t5,
            -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
            10.0 * t3 - 15.0 * t4 + 6.0 * t5,
        ];
        let v0 = [m0 * d0[0], m0 * d0[1]];
        let v1 = [m1 * d1[0], m1 * d1[1]];
        // Second derivative m²·k·n with n the left normal.
        let a0 = [-m0 * m0 * k0 * d0[1], m0 * m0 * k0 * d0[0]];
        let a1 = [-m1 * m1 * k1 * d1[1], m1 * m1 * k1 * d1[0]];
        let c = |i: usize| h[0] * p0[i] + h[1] * v0[i] + h[2] * a0[i] + h[3] * a1[i] + h[4] * v1[i] + h[5] * p1[i];
        [c(0), c(1)]
    };
    let samples =
        |m0: f64, m1: f64, n: usize| -> Vec<Point> { (0..=n).map(|i| curve(m0, m1, i as f64 / n as f64)).collect() };
    // Bending energy ∫κ² ds.
    let energy = |points: &[Point]| -> f64 {
        points
            .windows(3)
            .map(|w| {
                let (a, b) = (
                    [w[1][0] - w[0][0], w[1][1] - w[0][1]],
                    [w[2][0] - w[1][0], w[2][1] - w[1][1]],
                );
                let turn = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
                let ds = 0.5 * (a[0].hypot(a[1]) + b[0].hypot(b[1]));
                turn * turn / ds
            })
            .sum()
    };
    let mut best = (f64::INFINITY, chord, chord);
    for i in 4..=32 {
        for j in 4..=32 {
            let (m0, m1) = (chord * i as f64 / 16.0, chord * j as f64 / 16.0);
            let value = energy(&samples(m0, m1, 200));
            if value < best.0 {
                best = (value, m0, m1);
            }
        }
    }
    samples(best.1, best.2, 400)
}

/// Resamples a polyline at equal arc-length spacing of about `STEP`.
fn uniform(points: &[Point]) -> Vec<Point> {
    let mut cumulative = vec![0.0];
    for w in points.windows(2) {
        let d = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
        cumulative.push(cumulative.last().unwrap() + d);
    }
    let total = *cumulative.last().unwrap();
    let n = (total / STEP).round().max(1.0) as usize;
    let mut j = 0;
    (0..=n)
        .map(|k| {
            let s = total * k as f64 / n as f64;
            while j + 2 < cumulative.len() && cumulative[j + 1] < s {
                j += 1;
            }
            let u = ((s - cumulative[j]) / (cumulative[j + 1] - cumulative[j])).clamp(0.0, 1.0);
            [
                points[j][0] + u * (points[j + 1][0] - points[j][0]),
                points[j][1] + u * (points[j + 1][1] - points[j][1]),
            ]
        })
        .collect()
}

fn join(parts: &[Vec<Point>]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for part in parts {
        for &p in part {
            if out
                .last()
                .is_none_or(|q: &Point| (q[0] - p[0]).hypot(q[1] - p[1]) > 1e-9)
            {
                out.push(p);
            }
        }
    }
    out
}

fn round(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[derive(Default)]
struct MapBuilder {
    nodes: BTreeMap<String, Point>,
    lanes: BTreeMap<String, (Vec<String>, Vec<String>)>,
    entrances: Vec<String>,
    exits: Vec<String>,
}

impl MapBuilder {
    /// Adds a lane; its end points become shared nodes named after
    /// `start`/`end` so that consecutive lanes connect exactly.
    fn lane(&mut self, id: &str, start: &str, end: &str, points: Vec<Point>, successors: &[&str]) {
        let mut names = Vec::with_capacity(points.len());
        let last = points.len() - 1;
        for (k, p) in points.iter().enumerate() {
            let name = match k {
                0 => start.to_owned(),
                k if k == last => end.to_owned(),
                k => format!("{id}.{k}"),
            };
            let p = [round(p[0]), round(p[1])];
            if let Some(existing) = self.nodes.get(&name) {
                assert!(
                    (existing[0] - p[0]).hypot(existing[1] - p[1]) < 1e-3,
                    "node {name} placed twice at different points"
                );
            } else {
                self.nodes.insert(name.clone(), p);
            }
            names.push(name);
        }
        self.lanes.insert(
            id.to_owned(),
            (names, successors.iter().map(|s| (*s).to_owned()).collect()),
        );
    }

    fn to_json(&self) -> Value {
        let nodes: serde_json::Map<String, Value> = self
            .nodes
            .iter()
            .map(|(k, p)| (k.clone(), json!([p[0], p[1]])))
            .collect();
        let lanes: serde_json::Map<String, Value> = self
            .lanes
            .iter()
            .map(|(k, (n, s))| (k.clone(), json!({"nodes": n, "successors": s})))
            .collect();
        json!({"nodes": nodes, "lanes": lanes, "entrances": self.entrances, "exits": self.exits})
    }
}

fn straight_map() -> MapBuilder {
    let mut m = MapBuilder::default();
    m.lane("main", "start", "end", line([0.0, 0.0], [120.0, 0.0]), &[]);
    m.entrances.push("main".into());
    m.exits.push("main".into());
    m
}

/// Half circle of radius 20 between two short straights.
fn circle_map() -> MapBuilder {
    let mut m = MapBuilder::default();
    let r = 20.0;
    let pts = join(&[
        line([0.0, -10.0], [0.0, 0.0]),
        arc([r, 0.0], r, PI, 0.0),
        line([2.0 * r, 0.0], [2.0 * r, -10.0]),
    ]);
    m.lane("loop", "a", "b", pts, &[]);
    m.entrances.push("loop".into());
    m.exits.push("loop".into());
    m
}

const RING_RADIUS: f64 = 20.0;
const ARM_OFFSET: f64 = 2.0;
const ARM_LENGTH: f64 = 62.0;
const EXIT_LENGTH: f64 = 1.0;
const BLEND: f64 = 18.0;
const MERGE_ANGLE: f64 = 35.0 * PI / 180.0;

/// Four-arm roundabout, counter-clockwise circulation, right-hand traffic.
fn roundabout_map() -> MapBuilder {
    let mut m = MapBuilder::default();
    let arms = [("S", -FRAC_PI_2), ("E", 0.0), ("N", FRAC_PI_2), ("W", PI)];
    let r = RING_RADIUS;
    let ring = |a: f64| [r * a.cos(), r * a.sin()];
    let tangent = |a: f64| [-a.sin(), a.cos()];
    for (i, &(name, theta)) in arms.iter().enumerate() {
        let (next, next_theta) = arms[(i + 1) % 4];
        let next_theta = if next_theta < theta {
            next_theta + 2.0 * PI
        } else {
            next_theta
        };
        let u = [theta.cos(), theta.sin()];
        // Right-hand side when driving inwards.
        let right = [-u[1], u[0]];
        let at = |dist: f64, side: f64| [u[0] * dist + right[0] * side, u[1] * dist + right[1] * side];

        let merge = ring(theta + MERGE_ANGLE);
        let entry_end = at(r + BLEND, ARM_OFFSET);
        let t_in = tangent(theta + MERGE_ANGLE);
        let entry = uniform(&join(&[
            line(at(r + ARM_LENGTH, ARM_OFFSET), entry_end),
            blend(entry_end, [-u[0], -u[1]], 0.0, merge, t_in, 1.0 / r),
        ]));
        m.lane(
            &format!("in_{name}"),
            &format!("{name}_start"),
            &format!("{name}_merge"),
            entry,
            &[&format!("ring_{name}")],
        );

        let diverge = ring(theta - MERGE_ANGLE);
        let exit_start = at(r + BLEND, -ARM_OFFSET);
        let t_out = tangent(theta - MERGE_ANGLE);
        let exit = uniform(&join(&[
            blend(diverge, t_out, 1.0 / r, exit_start, u, 0.0),
            line(exit_start, at(r + BLEND + EXIT_LENGTH, -ARM_OFFSET)),
        ]));
        m.lane(
            &format!("out_{name}"),
            &format!("{name}_diverge"),
            &format!("{name}_end"),
            exit,
            &[],
        );

        // Short arc between this arm's diverge and merge points.
        m.lane(
            &format!("pass_{name}"),
            &format!("{name}_diverge"),
            &format!("{name}_merge"),
            arc([0.0, 0.0], r, theta - MERGE_ANGLE, theta + MERGE_ANGLE),
            &[&format!("ring_{name}")],
        );
        // Long arc from this merge to the next arm's diverge.
        m.lane(
            &format!("ring_{name}"),
            &format!("{name}_merge"),
            &format!("{next}_diverge"),
            arc([0.0, 0.0], r, theta + MERGE_ANGLE, next_theta - MERGE_ANGLE),
            &[&format!("out_{next}"), &format!("pass_{next}")],
        );
        m.entrances.push(format!("in_{name}"));
        m.exits.push(format!("out_{name}"));
    }
    m
}

const LANE: f64 = 1.75;
const BOX: f64 = 12.0;
const MAJOR_LENGTH: f64 = 90.0;
const MINOR_LENGTH: f64 = 70.0;

/// T junction: major road west–east, minor road joining from the south.
fn threeway_map() -> MapBuilder {
    let mut m = MapBuilder::default();
    let (l, j) = (LANE, BOX);
    // Approaches.
    m.lane(
        "in_W",
        "W_start",
        "W_box",
        line([-MAJOR_LENGTH, -l], [-j, -l]),
        &["W_E", "W_S"],
    );
    m.lane(
        "in_E",
        "E_start",
        "E_box",
        line([MAJOR_LENGTH, l], [j, l]),
        &["E_W", "E_S"],
    );
    m.lane(
        "in_S",
        "S_start",
        "S_box",
        line([l, -MINOR_LENGTH], [l, -j]),
        &["S_E", "S_W"],
    );
    // Departures.
    m.lane("out_E", "E_exit", "E_end", line([j, -l], [j + EXIT_LENGTH, -l]), &[]);
    m.lane("out_W", "W_exit", "W_end", line([-j, l], [-MAJOR_LENGTH, l]), &[]);
    m.lane("out_S", "S_exit", "S_end", line([-l, -j], [-l, -MINOR_LENGTH]), &[]);
    // Connectors.
    m.lane("W_E", "W_box", "E_exit", line([-j, -l], [j, -l]), &["out_E"]);
    m.lane("E_W", "E_box", "W_exit", line([j, l], [-j, l]), &["out_W"]);
    let rt = j - l;
    let lt = j + l;
    m.lane("W_S", "W_box", "S_exit", arc([-j, -j], rt, FRAC_PI_2, 0.0), &["out_S"]);
    m.lane("S_E", "S_box", "E_exit", arc([j, -j], rt, PI, FRAC_PI_2), &["out_E"]);
    m.lane("E_S", "E_box", "S_exit", arc([j, -j], lt, FRAC_PI_2, PI), &["out_S"]);
    m.lane("S_W", "S_box", "W_exit", arc([-j, -j], lt, 0.0, FRAC_PI_2), &["out_W"]);
    m.entrances.extend(["in_E", "in_S", "in_W"].map(String::from));
    m.exits.extend(["out_E", "out_S", "out_W"].map(String::from));
    m
}

/// Parse-only fixture: a T junction without geometry detail.
fn tjunction_map() -> MapBuilder {
    let mut m = MapBuilder::default();
    m.lane("a_in", "a0", "c", line([-30.0, 0.0], [0.0, 0.0]), &["to_b", "to_d"]);
    m.lane("b_in", "b0", "c2", line([30.0, 2.0], [2.0, 2.0]), &["to_a"]);
    m.lane("d_in", "d0", "c", line([0.0, -30.0], [0.0, 0.0]), &["to_b"]);
    m.lane("to_b", "c", "b1", line([0.0, 0.0], [30.0, -2.0]), &[]);
    m.lane("to_d", "c", "d1", line([0.0, 0.0], [-1.0, -30.0]), &[]);
    m.lane("to_a", "c2", "a1", line([2.0, 2.0], [-30.0, 2.0]), &[]);
    m.entrances.extend(["a_in", "b_in", "d_in"].map(String::from));
    m.exits.extend(["to_a", "to_b", "to_d"].map(String::from));
    m
}

struct Traffic<'a> {
    lanes: &'a [&'a str],
    appear: f64,
    p0: f64,
    v0: f64,
    /// Lateral acceleration bound behind the curvature speed profile.
    a_lat_max: f64,
}

fn lanes(ids: &[&str]) -> Vec<String> {
    ids.iter().map(|s| (*s).to_owned()).collect()
}

/// Noise-free IDM rollout of all vehicles together; each vehicle's trace
/// runs from its appearance until it reaches the end of its path or the
/// horizon.
fn traces(paths: &PathSet, traffic: &[Traffic], horizon: f64) -> Vec<Value> {
    let world = Intersection::new(paths.clone());
    let geometry = VehicleGeometry::new(2.0, 4.0).unwrap();
    let index: Vec<usize> = traffic
        .iter()
        .map(|t| paths.find_by_lanes(&lanes(t.lanes)).expect("traffic path exists"))
        .collect();
    let mut states: Vec<Option<VehicleState>> = vec![None; traffic.len()];
    let mut done = vec![false; traffic.len()];
    let mut samples: Vec<Vec<Value>> = vec![Vec::new(); traffic.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let steps = (horizon / SAMPLE_DT).round() as usize;
    let h = SAMPLE_DT / SUBSTEPS as f64;
    for k in 0..=steps {
        let t = k as f64 * SAMPLE_DT;
        for (i, tr) in traffic.iter().enumerate() {
            if states[i].is_none() && !done[i] && t + 1e-9 >= tr.appear {
                states[i] = Some(VehicleState::new(tr.p0, tr.v0, index[i]));
            }
        }
        for (i, s) in states.iter().enumerate() {
            if let Some(s) = s {
                let pt = paths.path(s.path).eval(s.p);
                samples[i].push(json!([
                    round(t),
                    round(pt.position[0]),
                    round(pt.position[1]),
                    round(s.v * pt.heading[0]),
                    round(s.v * pt.heading[1]),
                    round(pt.heading[0]),
                    round(pt.heading[1]),
                ]));
            }
        }
        for _ in 0..SUBSTEPS {
            let active: Vec<usize> = (0..traffic.len()).filter(|&i| states[i].is_some()).collect();
            if active.is_empty() {
                break;
            }
            let joint = JointState::new(
                states[active[0]].unwrap(),
                active[1..].iter().map(|&i| states[i].unwrap()),
            );
            let geos = vec![geometry; active.len()];
            let mut next = Vec::with_capacity(active.len());
            for (slot, &i) in active.iter().enumerate() {
                let s = states[i].unwrap();
                let leader = find_leader(&joint, slot, &world, &geos);
                let reward = RewardParams {
                    max_lateral_accel: traffic[i].a_lat_max,
                    ..RewardParams::default()
                };
                let params = IdmParams {
                    desired_speed: desired_velocity(s.p, paths.path(s.path), &reward),
                    ..IdmParams::default()
                };
                let a = idm_accel(s.v, leader, &params, 0.0, &mut rng);
                let len = paths.path(s.path).length();
                next.push(step_vehicle(&s, a, h, len, &[[0.0; 3]; 3], &mut rng));
            }
            for (&i, n) in active.iter().zip(next) {
                if n.p >= paths.path(n.path).length() {
                    states[i] = None;
                    done[i] = true;
                } else {
                    states[i] = Some(n);
                }
            }
        }
    }
    samples
        .into_iter()
        .map(|s| json!({"w": 2.0, "l": 4.0, "samples": s}))
        .collect()
}

fn write(path: &Path, value: &Value) {
    let text = serde_json::to_string_pretty(value).unwrap() + "\n";
    std::fs::write(path, text).unwrap();
    println!("wrote {}", path.display());
}

fn map_paths(map: &MapBuilder) -> PathSet {
    let bytes = serde_json::to_vec(&map.to_json()).unwrap();
    PathSet::from_graph(&parse_map(&bytes).unwrap()).unwrap()
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let maps = root.join("maps");
    let scenarios = root.join("scenarios");
    std::fs::create_dir_all(&maps).unwrap();
    std::fs::create_dir_all(&scenarios).unwrap();

    for (name, map) in [
        ("straight", straight_map()),
        ("circle", circle_map()),
        ("tjunction", tjunction_map()),
    ] {
        write(&maps.join(format!("{name}.json")), &map.to_json());
    }

    write(
        &scenarios.join("straight.json"),
        &json!({
            "map": "../maps/straight.json",
            "ego": {"path": ["main"], "p0": 0.0, "v0": 8.0, "w": 2.0, "l": 4.0},
            "vehicles": [],
            "horizon": 20.0,
        }),
    );

    let roundabout = roundabout_map();
    write(&maps.join("roundabout.json"), &roundabout.to_json());
    let paths = map_paths(&roundabout);
    let horizon = 30.0;
    let to_north: &[&str] = &["in_W", "ring_W", "pass_S", "ring_S", "pass_E", "ring_E", "out_N"];
    let traffic = [
        Traffic {
            lanes: to_north,
            appear: 0.0,
            p0: 62.0,
            v0: 3.16,
            a_lat_max: 0.55,
        },
        Traffic {
            lanes: to_north,
            appear: 0.0,
            p0: 50.0,
            v0: 3.16,
            a_lat_max: 0.55,
        },
    ];
    write(
        &scenarios.join("roundabout.json"),
        &json!({
            "map": "../maps/roundabout.json",
            "ego": {"path": ["in_S", "ring_S", "out_E"], "p0": 20.0, "v0": 8.0, "w": 2.0, "l": 4.0},
            "vehicles": traces(&paths, &traffic, horizon),
            "horizon": horizon,
        }),
    );

    let threeway = threeway_map();
    write(&maps.join("threeway.json"), &threeway.to_json());
    let paths = map_paths(&threeway);
    let horizon = 25.0;
    let traffic = [Traffic {
        lanes: &["in_W", "W_S", "out_S"],
        appear: 0.0,
        p0: 0.0,
        v0: 8.0,
        a_lat_max: 0.5,
    }];
    write(
        &scenarios.join("threeway.json"),
        &json!({
            "map": "../maps/threeway.json",
            "ego": {"path": ["in_S", "S_E", "out_E"], "p0": 20.0, "v0": 8.0, "w": 2.0, "l": 4.0},
            "vehicles": traces(&paths, &traffic, horizon),
            "horizon": horizon,
        }),
    );
}
