use super::{Intersection, JointState, VehicleGeometry, VehicleState};
use crate::topology::Point;

/// Rectangle centred at `center`, long side along the unit vector `heading`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub center: Point,
    pub heading: Point,
    pub half_length: f64,
    pub half_width: f64,
}

impl OrientedRect {
    pub fn new(center: Point, heading: Point, geometry: &VehicleGeometry) -> Self {
        Self {
            center,
            heading,
            half_length: 0.5 * geometry.length,
            half_width: 0.5 * geometry.width,
        }
    }

    pub fn of_vehicle(state: &VehicleState, world: &Intersection, geometry: &VehicleGeometry) -> Self {
        let point = world.path(state.path).eval(state.p);
        Self::new(point.position, point.heading, geometry)
    }

    fn normal(&self) -> Point {
        [-self.heading[1], self.heading[0]]
    }

    /// Half-extent of the projection onto the unit vector `axis`.
    fn radius(&self, axis: Point) -> f64 {
        let n = self.normal();
        self.half_length * dot(self.heading, axis).abs() + self.half_width * dot(n, axis).abs()
    }

    pub fn corners(&self) -> [Point; 4] {
        let [hx, hy] = self.heading;
        let [nx, ny] = self.normal();
        let (l, w) = (self.half_length, self.half_width);
        let [cx, cy] = self.center;
        [
            [cx + l * hx + w * nx, cy + l * hy + w * ny],
            [cx + l * hx - w * nx, cy + l * hy - w * ny],
            [cx - l * hx - w * nx, cy - l * hy - w * ny],
            [cx - l * hx + w * nx, cy - l * hy + w * ny],
        ]
    }
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Separating-axis test on the four edge normals. Touching counts as overlap.
pub fn rects_overlap(a: &OrientedRect, b: &OrientedRect) -> bool {
    let d = [b.center[0] - a.center[0], b.center[1] - a.center[1]];
    [a.heading, a.normal(), b.heading, b.normal()]
        .into_iter()
        .all(|axis| dot(d, axis).abs() <= a.radius(axis) + b.radius(axis))
}

/// A vehicle parked at the end of its path has left the intersection.
pub(crate) fn departed(state: &VehicleState, world: &Intersection) -> bool {
    state.p >= world.path(state.path).length()
}

/// Whether the ego overlaps any other vehicle still in the intersection.
/// `geometries[0]` is the ego.
pub fn collision_check(joint: &JointState, world: &Intersection, geometries: &[VehicleGeometry]) -> bool {
    let ego = OrientedRect::of_vehicle(&joint.ego, world, &geometries[0]);
    let reach = ego.half_length + ego.half_width;
    joint.others.iter().enumerate().any(|(i, other)| {
        if departed(other, world) {
            return false;
        }
        let rect = OrientedRect::of_vehicle(other, world, &geometries[i + 1]);
        let dx = rect.center[0] - ego.center[0];
        let dy = rect.center[1] - ego.center[1];
        let r = reach + rect.half_length + rect.half_width;
        dx * dx + dy * dy <= r * r && rects_overlap(&ego, &rect)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalStatus {
    Running,
    Crash,
    Goal,
}

/// Crash dominates goal. The goal is reached once the ego's front bumper
/// is at the end of its path.
pub fn terminal_status(joint: &JointState, world: &Intersection, geometries: &[VehicleGeometry]) -> TerminalStatus {
    if collision_check(joint, world, geometries) {
        TerminalStatus::Crash
    } else if joint.ego.p >= world.path(joint.ego.path).length() - 0.5 * geometries[0].length {
        TerminalStatus::Goal
    } else {
        TerminalStatus::Running
    }
}
