use super::{Point, TopologyError};

/// Knot spacing of the arc-length refit.
pub const RESAMPLE_SPACING: f64 = 0.5;

/// Spacing of the coarse scan in [`PathSpline::project`].
const PROJECT_COARSE_STEP: f64 = 1.0;
/// Width at which the bracket refinement in [`PathSpline::project`] stops.
const PROJECT_TOLERANCE: f64 = 1e-7;

// 5-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Position, unit heading and unsigned curvature at one path position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub position: Point,
    pub heading: Point,
    pub curvature: f64,
}

/// Nearest point on a path: its path position and the distance to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub p: f64,
    pub distance: f64,
}

/// Planar path as two natural cubic splines x(p), y(p) over arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpline {
    knots: Vec<f64>,
    // Per segment: value, first, second and third-order coefficients.
    x: Vec<[f64; 4]>,
    y: Vec<[f64; 4]>,
}

/// Natural cubic spline coefficients through `(knots[i], values[i])`.
fn natural_coefficients(knots: &[f64], values: &[f64]) -> Vec<[f64; 4]> {
    let n = knots.len();
    debug_assert!(n >= 2 && values.len() == n);
    let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    // Second derivatives m[0..n], m[0] = m[n-1] = 0; Thomas algorithm on the
    // interior system.
    let mut m = vec![0.0; n];
    if n > 2 {
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((values[i + 2] - values[i + 1]) / h[i + 1] - (values[i + 1] - values[i]) / h[i]);
        }
        for i in 1..k {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
        }
    }
    (0..n - 1)
        .map(|i| {
            let dy = values[i + 1] - values[i];
            [
                values[i],
                dy / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0,
                m[i] / 2.0,
                (m[i + 1] - m[i]) / (6.0 * h[i]),
            ]
        })
        .collect()
}

fn poly(c: &[f64; 4], u: f64) -> f64 {
    c[0] + u * (c[1] + u * (c[2] + u * c[3]))
}

fn poly_d1(c: &[f64; 4], u: f64) -> f64 {
    c[1] + u * (2.0 * c[2] + 3.0 * u * c[3])
}

fn poly_d2(c: &[f64; 4], u: f64) -> f64 {
    2.0 * c[2] + 6.0 * u * c[3]
}

fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Fits an arc-length parameterized spline through a polyline.
///
/// The polyline is first interpolated over cumulative chord length; that
/// curve is then resampled every [`RESAMPLE_SPACING`] metres of true arc
/// length and refit, so the final parameter is arc length to within a few
/// per mille. Consecutive duplicate points are dropped.
pub fn fit_spline(polyline: &[Point]) -> Result<PathSpline, TopologyError> {
    let mut points: Vec<Point> = Vec::with_capacity(polyline.len());
    for &p in polyline {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(TopologyError::DegeneratePolyline);
        }
        if points.last().is_none_or(|&q| distance(p, q) > 1e-9) {
            points.push(p);
        }
    }
    if points.len() < 2 {
        return Err(TopologyError::DegeneratePolyline);
    }
    let mut chord = Vec::with_capacity(points.len());
    chord.push(0.0);
    for w in points.windows(2) {
        chord.push(chord.last().unwrap() + distance(w[0], w[1]));
    }
    let first = PathSpline::through(&chord, &points);
    if points.len() == 2 {
        // A chord-length straight segment is already arc-length parameterized.
        return Ok(first);
    }

    let seg_lengths: Vec<f64> = (0..first.segments())
        .map(|i| first.segment_arc_length(i, first.knots[i + 1]))
        .collect();
    let mut cumulative = Vec::with_capacity(seg_lengths.len() + 1);
    cumulative.push(0.0);
    for l in &seg_lengths {
        cumulative.push(cumulative.last().unwrap() + l);
    }
    let total = *cumulative.last().unwrap();

    let mut targets: Vec<f64> = Vec::new();
    let mut s = 0.0;
    while s < total - 0.5 * RESAMPLE_SPACING {
        targets.push(s);
        s = targets.len() as f64 * RESAMPLE_SPACING;
    }
    targets.push(total);

    let mut samples = Vec::with_capacity(targets.len());
    let mut seg = 0;
    for (j, &target) in targets.iter().enumerate() {
        if j == 0 {
            samples.push(points[0]);
            continue;
        }
        if j == targets.len() - 1 {
            samples.push(*points.last().unwrap());
            continue;
        }
        while seg + 1 < seg_lengths.len() && cumulative[seg + 1] < target {
            seg += 1;
        }
        let t = first.invert_arc_length(seg, target - cumulative[seg], seg_lengths[seg]);
        samples.push(first.position(t));
    }
    Ok(PathSpline::through(&targets, &samples))
}

impl PathSpline {
    fn through(knots: &[f64], points: &[Point]) -> Self {
        let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
        Self {
            knots: knots.to_vec(),
            x: natural_coefficients(knots, &xs),
            y: natural_coefficients(knots, &ys),
        }
    }

    /// Total length d.
    pub fn length(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn segments(&self) -> usize {
        self.knots.len() - 1
    }

    fn locate(&self, p: f64) -> (usize, f64) {
        let p = p.clamp(0.0, self.length());
        let i = self
            .knots
            .partition_point(|&k| k <= p)
            .saturating_sub(1)
            .min(self.segments() - 1);
        (i, p - self.knots[i])
    }

    /// φ(p), clamped to the path ends.
    pub fn position(&self, p: f64) -> Point {
        let (i, u) = self.locate(p);
        [poly(&self.x[i], u), poly(&self.y[i], u)]
    }

    /// First derivative (x'(p), y'(p)); unit length up to the arc-length fit
    /// error.
    pub fn derivative(&self, p: f64) -> Point {
        let (i, u) = self.locate(p);
        [poly_d1(&self.x[i], u), poly_d1(&self.y[i], u)]
    }

    /// ψ(p), the unit heading.
    pub fn heading(&self, p: f64) -> Point {
        let d = self.derivative(p);
        let n = d[0].hypot(d[1]);
        [d[0] / n, d[1] / n]
    }

    /// Position, heading and unsigned curvature at `p`. Positions outside
    /// `[0, d]` are clamped to the nearest end.
    pub fn eval(&self, p: f64) -> PathPoint {
        let (i, u) = self.locate(p);
        let (cx, cy) = (&self.x[i], &self.y[i]);
        let (dx, dy) = (poly_d1(cx, u), poly_d1(cy, u));
        let (ddx, ddy) = (poly_d2(cx, u), poly_d2(cy, u));
        let speed = dx.hypot(dy);
        PathPoint {
            position: [poly(cx, u), poly(cy, u)],
            heading: [dx / speed, dy / speed],
            curvature: (dx * ddy - dy * ddx).abs() / speed.powi(3),
        }
    }

    pub fn curvature(&self, p: f64) -> f64 {
        self.eval(p).curvature
    }

    fn speed(&self, i: usize, u: f64) -> f64 {
        poly_d1(&self.x[i], u).hypot(poly_d1(&self.y[i], u))
    }

    /// Arc length of segment `i` from its start knot to parameter `t`.
    fn segment_arc_length(&self, i: usize, t: f64) -> f64 {
        let span = t - self.knots[i];
        // Two Gauss–Legendre panels per segment.
        let half = span / 4.0;
        let mut total = 0.0;
        for panel in 0..2 {
            let mid = half * (2 * panel + 1) as f64;
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                total += w * self.speed(i, mid + half * x);
            }
        }
        total * half
    }

    /// Parameter inside segment `i` at which arc length `s` (from the segment
    /// start) is reached.
    fn invert_arc_length(&self, i: usize, s: f64, seg_len: f64) -> f64 {
        let (lo, hi) = (self.knots[i], self.knots[i + 1]);
        let mut t = lo + (s / seg_len).clamp(0.0, 1.0) * (hi - lo);
        for _ in 0..8 {
            let f = self.segment_arc_length(i, t) - s;
            let step = f / self.speed(i, t - lo);
            t = (t - step).clamp(lo, hi);
            if step.abs() < 1e-12 {
                break;
            }
        }
        t
    }

    /// Nearest point ε(x) on the path.
    ///
    /// Scans the path every metre, then refines every local minimum of the
    /// scan by bracket shrinking over its neighbouring samples.
    pub fn project(&self, point: Point) -> Projection {
        let d = self.length();
        let n = (d / PROJECT_COARSE_STEP).ceil() as usize;
        let sample_at = |k: usize| (k as f64 * PROJECT_COARSE_STEP).min(d);
        let dist2 = |p: f64| {
            let q = self.position(p);
            (q[0] - point[0]).powi(2) + (q[1] - point[1]).powi(2)
        };
        let coarse: Vec<f64> = (0..=n).map(|k| dist2(sample_at(k))).collect();

        let mut minima: Vec<usize> = (0..=n)
            .filter(|&k| (k == 0 || coarse[k] <= coarse[k - 1]) && (k == n || coarse[k] <= coarse[k + 1]))
            .collect();
        minima.sort_by(|&a, &b| coarse[a].total_cmp(&coarse[b]).then(a.cmp(&b)));
        minima.truncate(3);

        let mut best = Projection {
            p: 0.0,
            distance: f64::INFINITY,
        };
        for k in minima {
            let mut lo = sample_at(k.saturating_sub(1));
            let mut hi = sample_at((k + 1).min(n));
            // Golden-section bracket shrinking.
            let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
            let mut a = hi - inv_phi * (hi - lo);
            let mut b = lo + inv_phi * (hi - lo);
            let (mut fa, mut fb) = (dist2(a), dist2(b));
            while hi - lo > PROJECT_TOLERANCE {
                if fa <= fb {
                    hi = b;
                    b = a;
                    fb = fa;
                    a = hi - inv_phi * (hi - lo);
                    fa = dist2(a);
                } else {
                    lo = a;
                    a = b;
                    fa = fb;
                    b = lo + inv_phi * (hi - lo);
                    fb = dist2(b);
                }
            }
            let candidates = [(lo + hi) / 2.0, sample_at(k)];
            for p in candidates {
                let dist = dist2(p).sqrt();
                if dist < best.distance {
                    best = Projection { p, distance: dist };
                }
            }
        }
        best
    }
}
