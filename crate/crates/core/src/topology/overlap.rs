use super::{enumerate_paths, fit_spline, LaneGraph, PathSpline, TopologyError};

/// Two paths are taken to overlap at a point when the other path passes
/// within this lateral distance (m).
pub const OVERLAP_LATERAL_THRESHOLD: f64 = 0.5;

/// Grid used for overlap coefficients when building a [`PathSet`] (m).
const DEFAULT_OVERLAP_GRID: f64 = 1.0;

/// Overlap coefficient q(μ) of every path.
///
/// q(μ) is the inverse of the mean number of paths (μ itself included) that
/// pass within [`OVERLAP_LATERAL_THRESHOLD`] of points sampled every `grid`
/// metres along μ. A path sharing no geometry gets 1; two identical paths
/// get 1/2 each.
pub fn overlap_coefficients(paths: &[PathSpline], grid: f64) -> Vec<f64> {
    assert!(grid > 0.0, "overlap grid must be positive");
    paths
        .iter()
        .map(|path| {
            let n = (path.length() / grid).floor() as usize;
            let mut total = 0usize;
            for k in 0..=n {
                let point = path.position(k as f64 * grid);
                total += paths
                    .iter()
                    .filter(|other| other.project(point).distance <= OVERLAP_LATERAL_THRESHOLD)
                    .count();
            }
            (n + 1) as f64 / total as f64
        })
        .collect()
}

/// The discretized intersection: every path μ with its lane sequence and
/// overlap coefficient. Paths are indexed 0..m in canonical lane-id order.
#[derive(Debug, Clone)]
pub struct PathSet {
    splines: Vec<PathSpline>,
    lanes: Vec<Vec<String>>,
    overlap: Vec<f64>,
}

impl PathSet {
    pub fn from_graph(graph: &LaneGraph) -> Result<Self, TopologyError> {
        let routes = enumerate_paths(graph);
        if routes.is_empty() {
            return Err(TopologyError::NoPaths);
        }
        let splines = routes
            .iter()
            .map(|r| fit_spline(&r.points))
            .collect::<Result<Vec<_>, _>>()?;
        let lanes = routes.into_iter().map(|r| r.lanes).collect();
        Ok(Self::new(splines, lanes))
    }

    /// Builds a set from already-fitted splines; `lanes[i]` labels path i.
    pub fn new(splines: Vec<PathSpline>, lanes: Vec<Vec<String>>) -> Self {
        assert_eq!(splines.len(), lanes.len());
        assert!(!splines.is_empty(), "a path set needs at least one path");
        let overlap = overlap_coefficients(&splines, DEFAULT_OVERLAP_GRID);
        Self {
            splines,
            lanes,
            overlap,
        }
    }

    pub fn len(&self) -> usize {
        self.splines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splines.is_empty()
    }

    pub fn path(&self, index: usize) -> &PathSpline {
        &self.splines[index]
    }

    pub fn paths(&self) -> &[PathSpline] {
        &self.splines
    }

    pub fn lanes(&self, index: usize) -> &[String] {
        &self.lanes[index]
    }

    /// Index of the path with exactly this lane sequence.
    pub fn find_by_lanes(&self, lanes: &[String]) -> Option<usize> {
        self.lanes.iter().position(|l| l == lanes)
    }

    pub fn overlap(&self, index: usize) -> f64 {
        self.overlap[index]
    }

    pub fn overlaps(&self) -> &[f64] {
        &self.overlap
    }
}
