use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::SimError;
use crate::domain::{Intersection, VehicleGeometry};
use crate::topology::{parse_map, PathSet, Point};

/// Ego path reference: a 0-based index into the enumerated path set or the
/// exact lane sequence.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PathRef {
    Index(usize),
    Lanes(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EgoFile {
    path: PathRef,
    p0: f64,
    v0: f64,
    w: f64,
    l: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleFile {
    w: f64,
    l: f64,
    samples: Vec<[f64; 7]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    map: String,
    ego: EgoFile,
    #[serde(default)]
    vehicles: Vec<VehicleFile>,
    horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoSpec {
    pub path: usize,
    pub p0: f64,
    pub v0: f64,
    pub geometry: VehicleGeometry,
}

/// One trace sample: time, position, velocity and unit heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub position: Point,
    pub velocity: Point,
    pub heading: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracedVehicle {
    pub geometry: VehicleGeometry,
    pub samples: Vec<TraceSample>,
}

impl TracedVehicle {
    pub fn present_at(&self, t: f64) -> bool {
        let first = self.samples.first().map_or(f64::INFINITY, |s| s.t);
        let last = self.samples.last().map_or(f64::NEG_INFINITY, |s| s.t);
        first <= t && t <= last
    }
}

/// A validated scenario with its map already discretized.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub world: Arc<Intersection>,
    pub ego: EgoSpec,
    pub vehicles: Vec<TracedVehicle>,
    /// Simulated duration limit (s).
    pub horizon: f64,
}

fn normalize(h: Point) -> Option<Point> {
    let n = h[0].hypot(h[1]);
    (n > 0.0 && n.is_finite()).then(|| [h[0] / n, h[1] / n])
}

/// Parses a scenario. The `map` entry is resolved against `base_dir`.
pub fn load_scenario(bytes: &[u8], base_dir: &Path) -> Result<Scenario, SimError> {
    let file: ScenarioFile = serde_json::from_slice(bytes).map_err(|e| SimError::Parse(e.to_string()))?;
    let map_path = base_dir.join(&file.map);
    let map_bytes = std::fs::read(&map_path).map_err(|e| SimError::Io {
        path: map_path.display().to_string(),
        message: e.to_string(),
    })?;
    let graph = parse_map(&map_bytes)?;
    let paths = PathSet::from_graph(&graph)?;

    let path = match &file.ego.path {
        PathRef::Index(i) if *i < paths.len() => *i,
        PathRef::Index(i) => return Err(SimError::UnknownPath(i.to_string())),
        PathRef::Lanes(lanes) => paths
            .find_by_lanes(lanes)
            .ok_or_else(|| SimError::UnknownPath(lanes.join(",")))?,
    };
    let geometry = |w: f64, l: f64| VehicleGeometry::new(w, l).map_err(|e| SimError::Parse(e.to_string()));
    let length = paths.path(path).length();
    if !(file.ego.p0 >= 0.0 && file.ego.p0 <= length && file.ego.v0 >= 0.0 && file.ego.v0.is_finite()) {
        return Err(SimError::Parse(format!(
            "ego start p0={} v0={} outside path of length {length:.2}",
            file.ego.p0, file.ego.v0
        )));
    }
    let ego = EgoSpec {
        path,
        p0: file.ego.p0,
        v0: file.ego.v0,
        geometry: geometry(file.ego.w, file.ego.l)?,
    };
    if !(file.horizon > 0.0 && file.horizon.is_finite()) {
        return Err(SimError::Parse(format!("horizon {} must be positive", file.horizon)));
    }

    let mut vehicles = Vec::with_capacity(file.vehicles.len());
    for (v, vf) in file.vehicles.iter().enumerate() {
        if vf.samples.is_empty() {
            return Err(SimError::Parse(format!("vehicle {v} has no samples")));
        }
        let mut samples = Vec::with_capacity(vf.samples.len());
        for (i, s) in vf.samples.iter().enumerate() {
            if s.iter().any(|x| !x.is_finite()) {
                return Err(SimError::Parse(format!("vehicle {v} sample {i} is not finite")));
            }
            if i > 0 && s[0] <= vf.samples[i - 1][0] {
                return Err(SimError::NonMonotoneTrace { vehicle: v, index: i });
            }
            let heading = normalize([s[5], s[6]])
                .ok_or_else(|| SimError::Parse(format!("vehicle {v} sample {i} has a zero heading")))?;
            samples.push(TraceSample {
                t: s[0],
                position: [s[1], s[2]],
                velocity: [s[3], s[4]],
                heading,
            });
        }
        vehicles.push(TracedVehicle {
            geometry: geometry(vf.w, vf.l)?,
            samples,
        });
    }

    Ok(Scenario {
        world: Arc::new(Intersection::new(paths)),
        ego,
        vehicles,
        horizon: file.horizon,
    })
}

pub fn load_scenario_file(path: &Path) -> Result<Scenario, SimError> {
    let bytes = std::fs::read(path).map_err(|e| SimError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_scenario(&bytes, path.parent().unwrap_or(Path::new(".")))
}

/// Pose at time `t`, or `None` outside the trace span.
///
/// Position and velocity are interpolated linearly; the heading is
/// interpolated linearly and renormalized.
pub fn interpolate_trace(trace: &[TraceSample], t: f64) -> Option<TraceSample> {
    let first = trace.first()?;
    let last = trace.last()?;
    if t < first.t || t > last.t {
        return None;
    }
    let i = trace.partition_point(|s| s.t <= t);
    if i == 0 {
        return Some(*first);
    }
    let a = &trace[i - 1];
    if a.t == t || i == trace.len() {
        return Some(*a);
    }
    let b = &trace[i];
    let u = (t - a.t) / (b.t - a.t);
    let lerp = |x: Point, y: Point| [x[0] + u * (y[0] - x[0]), x[1] + u * (y[1] - x[1])];
    Some(TraceSample {
        t,
        position: lerp(a.position, b.position),
        velocity: lerp(a.velocity, b.velocity),
        // Opposite headings midway: keep the earlier one.
        heading: normalize(lerp(a.heading, b.heading)).unwrap_or(a.heading),
    })
}
