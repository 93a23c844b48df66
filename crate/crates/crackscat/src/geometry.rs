//! Piecewise-linear crack geometry: parametrization over [0, 2pi] and the
//! corner-graded quadrature mesh used by the Nystrom solver.
//!
//! The crack with corners P_0..P_N is parametrized segment-by-segment by
//! affine interpolation, with parameter t in [0, 2pi) and segment l covering
//! t in [2 l pi / N, 2 (l+1) pi / N]. Knots are graded toward every segment
//! endpoint (tips and interior corners) by the substitution w(s), whose
//! derivative vanishes to order p there; this restores the quadrature order
//! lost to the endpoint singularities of the density.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Point = [f64; 2];

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("crack needs at least 2 corners, got {0}")]
    TooFewCorners(usize),
    #[error("segment {0} is degenerate (consecutive corners coincide)")]
    DegenerateSegment(usize),
    #[error("polyline self-intersects (segments {0} and {1})")]
    SelfIntersection(usize, usize),
    #[error("knot count 2n = {two_n} is not divisible by the segment count {segments}")]
    KnotCountMismatch { two_n: usize, segments: usize },
    #[error("grading exponent p = {0} must be >= 2")]
    GradingExponent(f64),
}

/// Open polyline crack given by ordered corners (tips first and last).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Crack {
    pub corners: Vec<Point>,
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Proper segment intersection test (shared polyline joints excluded by the
/// caller).
fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| -> bool {
        cross(sub(q, p), sub(r, p)).abs() < 1e-14
            && r[0] >= p[0].min(q[0]) - 1e-14
            && r[0] <= p[0].max(q[0]) + 1e-14
            && r[1] >= p[1].min(q[1]) - 1e-14
            && r[1] <= p[1].max(q[1]) + 1e-14
    };
    on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b)
}

impl Crack {
    pub fn new(corners: Vec<Point>) -> Result<Self, GeometryError> {
        if corners.len() < 2 {
            return Err(GeometryError::TooFewCorners(corners.len()));
        }
        for (l, w) in corners.windows(2).enumerate() {
            if norm(sub(w[1], w[0])) == 0.0 {
                return Err(GeometryError::DegenerateSegment(l));
            }
        }
        let n = corners.len() - 1;
        for i in 0..n {
            for j in i + 2..n {
                if segments_intersect(corners[i], corners[i + 1], corners[j], corners[j + 1]) {
                    return Err(GeometryError::SelfIntersection(i, j));
                }
            }
        }
        Ok(Self { corners })
    }

    /// Number of straight segments N.
    pub fn segments(&self) -> usize {
        self.corners.len() - 1
    }

    /// Segment index of parameter t in [0, 2pi).
    pub fn segment_of(&self, t: f64) -> usize {
        let n = self.segments();
        (((t * n as f64) / (2.0 * PI)) as usize).min(n - 1)
    }

    /// Position x(t): affine interpolation of the segment's corners.
    pub fn position(&self, t: f64) -> Point {
        let n = self.segments() as f64;
        let lam = t * n / (2.0 * PI);
        let l = self.segment_of(t);
        let loc = lam - l as f64;
        let a = self.corners[l];
        let b = self.corners[l + 1];
        [
            (1.0 - loc) * a[0] + loc * b[0],
            (1.0 - loc) * a[1] + loc * b[1],
        ]
    }

    /// Tangent vector x'(t) = (N / 2pi)(P_{l+1} - P_l), constant per segment.
    pub fn tangent(&self, t: f64) -> Point {
        let n = self.segments() as f64;
        let l = self.segment_of(t);
        let d = sub(self.corners[l + 1], self.corners[l]);
        [n / (2.0 * PI) * d[0], n / (2.0 * PI) * d[1]]
    }

    /// Total polyline length.
    pub fn length(&self) -> f64 {
        self.corners
            .windows(2)
            .map(|w| norm(sub(w[1], w[0])))
            .sum()
    }

    /// Largest distance from `p` to a corner.
    pub fn max_corner_distance(&self, p: Point) -> f64 {
        self.corners
            .iter()
            .map(|&c| norm(sub(c, p)))
            .fold(0.0, f64::max)
    }

    /// Distance from a point to the polyline.
    pub fn distance_to(&self, p: Point) -> f64 {
        self.corners
            .windows(2)
            .map(|w| {
                let ab = sub(w[1], w[0]);
                let ap = sub(p, w[0]);
                let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1]))
                    .clamp(0.0, 1.0);
                norm(sub(p, [w[0][0] + t * ab[0], w[0][1] + t * ab[1]]))
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Grading parameters: exponent p >= 2 and half knot count n (the mesh has 2n
/// knots, 2n/N per segment).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GradingParams {
    pub p: f64,
    pub n: usize,
}

impl GradingParams {
    pub fn new(p: f64, n: usize) -> Result<Self, GeometryError> {
        if !(p >= 2.0) {
            return Err(GeometryError::GradingExponent(p));
        }
        Ok(Self { p, n })
    }
}

/// Cubic blending polynomial v(s) of the grading substitution.
pub fn grading_v(s: f64, p: f64) -> f64 {
    (1.0 / p - 0.5) * ((PI - s) / PI).powi(3) + (s - PI) / (p * PI) + 0.5
}

fn grading_v_prime(s: f64, p: f64) -> f64 {
    -(3.0 / PI) * (1.0 / p - 0.5) * ((PI - s) / PI).powi(2) + 1.0 / (p * PI)
}

/// Grading substitution w~(s) = 2pi v(s)^p / (v(s)^p + v(2pi - s)^p) on
/// [0, 2pi] and its derivative. Strictly increasing bijection with
/// w~'(0) = w~'(2pi) = 0 to order p.
pub fn grading_function(s: f64, p: f64) -> (f64, f64) {
    let vs = grading_v(s, p);
    let vt = grading_v(2.0 * PI - s, p);
    let dvs = grading_v_prime(s, p);
    let dvt = -grading_v_prime(2.0 * PI - s, p);
    let (a, b) = (vs.powf(p), vt.powf(p));
    let w = 2.0 * PI * a / (a + b);
    let num = vs.powf(p - 1.0) * dvs * b - a * vt.powf(p - 1.0) * dvt;
    let wp = 2.0 * PI * p * num / ((a + b) * (a + b));
    (w, wp)
}

/// Quadrature mesh: 2n knots, graded toward tips and interior corners.
#[derive(Clone, Debug)]
pub struct GradedMesh {
    pub crack: Crack,
    /// half knot count (the global grid is s_j = pi/(2n) + j pi/n)
    pub n: usize,
    /// parameter abscissae before grading
    pub s: Vec<f64>,
    /// graded parameters t_j = w(s_j)
    pub t: Vec<f64>,
    /// w'(s_j) > 0
    pub wprime: Vec<f64>,
    /// knot positions x(t_j)
    pub x: Vec<Point>,
    /// tangents x'(t_j)
    pub xp: Vec<Point>,
    /// speeds |x'(t_j)| (the diagonal of D_Gamma)
    pub speed: Vec<f64>,
    /// unit normals nu = (x2', -x1') / |x'|
    pub nu: Vec<Point>,
    /// segment index per knot
    pub segment: Vec<usize>,
}

/// Build the graded mesh for a crack. The per-segment substitution maps each
/// segment onto itself: w(s) = (2 l pi + w~(N s - 2 l pi)) / N.
pub fn build_mesh(crack: &Crack, params: GradingParams) -> Result<GradedMesh, GeometryError> {
    let nseg = crack.segments();
    let two_n = 2 * params.n;
    if two_n % nseg != 0 {
        return Err(GeometryError::KnotCountMismatch {
            two_n,
            segments: nseg,
        });
    }
    let n = params.n;
    let mut mesh = GradedMesh {
        crack: crack.clone(),
        n,
        s: Vec::with_capacity(two_n),
        t: Vec::with_capacity(two_n),
        wprime: Vec::with_capacity(two_n),
        x: Vec::with_capacity(two_n),
        xp: Vec::with_capacity(two_n),
        speed: Vec::with_capacity(two_n),
        nu: Vec::with_capacity(two_n),
        segment: Vec::with_capacity(two_n),
    };
    for j in 0..two_n {
        let s = PI / (2.0 * n as f64) + j as f64 * PI / n as f64;
        let l = ((s * nseg as f64 / (2.0 * PI)) as usize).min(nseg - 1);
        let loc = nseg as f64 * s - 2.0 * l as f64 * PI;
        let (wt, wpr) = grading_function(loc, params.p);
        let t = (2.0 * l as f64 * PI + wt) / nseg as f64;
        let x = crack.position(t);
        let xp = crack.tangent(t);
        let sp = norm(xp);
        mesh.s.push(s);
        mesh.t.push(t);
        mesh.wprime.push(wpr);
        mesh.x.push(x);
        mesh.xp.push(xp);
        mesh.speed.push(sp);
        mesh.nu.push([xp[1] / sp, -xp[0] / sp]);
        mesh.segment.push(l);
    }
    Ok(mesh)
}

/// Convenience: mesh with `knots_per_segment` knots on each segment.
pub fn mesh_with_knots_per_segment(
    crack: &Crack,
    knots_per_segment: usize,
    p: f64,
) -> Result<GradedMesh, GeometryError> {
    let nseg = crack.segments();
    let two_n = knots_per_segment * nseg;
    assert!(two_n % 2 == 0, "knots_per_segment * segments must be even");
    build_mesh(crack, GradingParams::new(p, two_n / 2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example_crack() -> Crack {
        Crack::new(vec![[1.0, 3.0], [3.0, 1.0], [2.0, 0.0]]).unwrap()
    }

    #[test]
    fn parametrization_hits_corners_and_midpoints() {
        let cr = example_crack();
        let m = cr.position(PI / 2.0);
        assert_relative_eq!(m[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(m[1], 2.0, epsilon = 1e-14);
        let c = cr.position(PI);
        assert_relative_eq!(c[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(c[1], 1.0, epsilon = 1e-14);
        let tp = cr.tangent(0.3);
        assert_relative_eq!(tp[0], 2.0 / PI, epsilon = 1e-14);
        assert_relative_eq!(tp[1], -2.0 / PI, epsilon = 1e-14);
    }

    #[test]
    fn parametrization_continuous_at_joints() {
        let cr = example_crack();
        let eps = 1e-12;
        let a = cr.position(PI - eps);
        let b = cr.position(PI + eps);
        assert!(norm(sub(a, b)) < 1e-10);
    }

    #[test]
    fn grading_endpoint_identities() {
        for &p in &[2.0, 3.0, 4.0] {
            let (w0, wp0) = grading_function(0.0, p);
            assert_relative_eq!(w0, 0.0, epsilon = 1e-14);
            assert_relative_eq!(wp0, 0.0, epsilon = 1e-14);
            let (wpi, _) = grading_function(PI, p);
            assert_relative_eq!(wpi, PI, epsilon = 1e-12);
            let (w2pi, wp2pi) = grading_function(2.0 * PI, p);
            assert_relative_eq!(w2pi, 2.0 * PI, epsilon = 1e-12);
            assert_relative_eq!(wp2pi, 0.0, epsilon = 1e-12);
            // symmetry w(s) + w(2pi - s) = 2pi
            let s = 0.3;
            let (a, _) = grading_function(s, p);
            let (b, _) = grading_function(2.0 * PI - s, p);
            assert_relative_eq!(a + b, 2.0 * PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn grading_is_monotone() {
        let p = 3.0;
        let mut prev = -1.0;
        for i in 0..=1000 {
            let s = 2.0 * PI * i as f64 / 1000.0;
            let (w, wp) = grading_function(s, p);
            assert!(w >= prev, "w~ not monotone at s={s}");
            assert!(wp >= -1e-15, "w~' negative at s={s}");
            prev = w;
        }
    }

    #[test]
    fn mesh_knots_avoid_corners_and_match_counts() {
        let cr = example_crack();
        let mesh = build_mesh(&cr, GradingParams::new(3.0, 8).unwrap()).unwrap();
        assert_eq!(mesh.x.len(), 16);
        assert_eq!(mesh.segment.iter().filter(|&&l| l == 0).count(), 8);
        for &t in &mesh.t {
            assert!(t > 0.0 && t < 2.0 * PI);
            assert!((t - PI).abs() > 1e-10, "knot at the interior corner");
        }
        for (nu, xp) in mesh.nu.iter().zip(&mesh.xp) {
            assert_relative_eq!(norm(*nu), 1.0, epsilon = 1e-14);
            assert!((nu[0] * xp[0] + nu[1] * xp[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn wprime_vanishing_rate_matches_grading_order() {
        // min_j w'(s_j) ~ (pi/2n)^{p-1} for p = 3: slope of log(min w')
        // against log(n) should be ~ -(p-1) = -2
        let cr = example_crack();
        let mut pts = Vec::new();
        for &n in &[8usize, 16, 32, 64] {
            let mesh = build_mesh(&cr, GradingParams::new(3.0, n).unwrap()).unwrap();
            let wmin = mesh.wprime.iter().cloned().fold(f64::INFINITY, f64::min);
            pts.push(((n as f64).ln(), wmin.ln()));
        }
        let slope = (pts.last().unwrap().1 - pts[0].1) / (pts.last().unwrap().0 - pts[0].0);
        assert!(
            (slope + 2.0).abs() < 0.15,
            "grading decay slope {slope}, want ~ -2"
        );
    }

    #[test]
    fn polyline_length_matches_tangent_integral() {
        let cr = example_crack();
        // piecewise-constant |x'|: integral = sum over segments of
        // |x'| * (2pi/N)
        let nseg = cr.segments();
        let mut total = 0.0;
        for l in 0..nseg {
            let t = (2.0 * l as f64 + 1.0) * PI / nseg as f64;
            total += norm(cr.tangent(t)) * 2.0 * PI / nseg as f64;
        }
        assert_relative_eq!(total, cr.length(), epsilon = 1e-12);
    }

    #[test]
    fn invalid_cracks_rejected() {
        assert!(Crack::new(vec![[0.0, 0.0]]).is_err());
        assert!(Crack::new(vec![[0.0, 0.0], [0.0, 0.0]]).is_err());
        // self-intersecting Z shape
        assert!(Crack::new(vec![[0.0, 0.0], [2.0, 0.0], [1.0, 1.0], [1.0, -1.0]]).is_err());
        // three segments: 2n = 14 knots cannot be split evenly
        let cr = Crack::new(vec![[1.0, 3.0], [3.0, 1.0], [2.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(build_mesh(&cr, GradingParams::new(3.0, 7).unwrap()).is_err());
        assert!(GradingParams::new(1.5, 8).is_err());
    }
}
