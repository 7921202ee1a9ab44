//! Intersection topology: lane maps, the finite set of entrance→exit paths,
//! and their arc-length spline parameterization.
//!
//! Each path μ is a planar curve φ_μ(p) over its arc length p ∈ [0, d_μ],
//! with unit heading ψ_μ(p), curvature κ_μ(p) and a nearest-point inverse
//! ε_μ(x).

mod map;
mod overlap;
mod spline;

pub use map::{enumerate_paths, parse_map, Lane, LaneGraph, Route};
pub use overlap::{overlap_coefficients, PathSet, OVERLAP_LATERAL_THRESHOLD};
pub use spline::{fit_spline, PathPoint, PathSpline, Projection, RESAMPLE_SPACING};

use thiserror::Error;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("malformed map: {0}")]
    Parse(String),
    #[error("{from} refers to unknown id {to}")]
    DanglingReference { from: String, to: String },
    #[error("entrance {0} cannot reach any exit")]
    UnreachableExit(String),
    #[error("lane {0} has fewer than two nodes")]
    ShortLane(String),
    #[error("polyline has fewer than two distinct points")]
    DegeneratePolyline,
    #[error("map yields no entrance-to-exit path")]
    NoPaths,
}
