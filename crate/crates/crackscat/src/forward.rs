//! Nystrom forward solver: single-layer boundary integral equation on the
//! crack, solved on the graded mesh with logarithmic-kernel splitting, plus
//! scattered-field and far-field evaluation.
//!
//! The total field U = u^i + S[phi] vanishes on the sound-soft crack, giving
//! the first-kind equation 2 S[phi] = -2 u^i on Gamma. The density phi has
//! endpoint singularities, so the product W Psi (grading derivative times
//! density samples) is used as the discrete unknown throughout and the
//! grading derivative is never inverted.

use crate::geometry::{GradedMesh, Point};
use crate::linalg::{CMat, Lu, SingularSystem};
use crate::specfun::{self, EULER_GAMMA};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Incident wave: plane wave e^{ik x.d} or point source Phi_k(x, y0).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Incident {
    PlaneWave { d: Point },
    PointSource { y0: Point },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IncidentField {
    pub k: f64,
    #[serde(flatten)]
    pub incident: Incident,
}

impl IncidentField {
    pub fn plane(k: f64, d: Point) -> Self {
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        assert!(n > 0.0, "plane-wave direction must be nonzero");
        Self {
            k,
            incident: Incident::PlaneWave {
                d: [d[0] / n, d[1] / n],
            },
        }
    }

    pub fn point_source(k: f64, y0: Point) -> Self {
        Self {
            k,
            incident: Incident::PointSource { y0 },
        }
    }

    /// Field value at a point.
    pub fn value(&self, x: Point) -> Complex64 {
        match self.incident {
            Incident::PlaneWave { d } => {
                Complex64::from_polar(1.0, self.k * (x[0] * d[0] + x[1] * d[1]))
            }
            Incident::PointSource { y0 } => specfun::fundamental_solution(self.k, x, y0),
        }
    }

    /// Normal derivative at a point with unit normal nu.
    pub fn normal_derivative(&self, x: Point, nu: Point) -> Complex64 {
        match self.incident {
            Incident::PlaneWave { d } => {
                Complex64::new(0.0, self.k * (nu[0] * d[0] + nu[1] * d[1])) * self.value(x)
            }
            Incident::PointSource { y0 } => {
                let dx = [x[0] - y0[0], x[1] - y0[1]];
                let r = dx[0].hypot(dx[1]);
                Complex64::new(0.0, -0.25 * self.k) * specfun::hankel1(1, self.k * r)
                    * ((nu[0] * dx[0] + nu[1] * dx[1]) / r)
            }
        }
    }

    /// Far-field pattern of the incident source itself (point sources only);
    /// used by mixed-reciprocity checks and the point-source indicator.
    pub fn source_farfield(&self, xhat: Point) -> Option<Complex64> {
        match self.incident {
            Incident::PointSource { y0 } => Some(specfun::point_source_farfield(self.k, xhat, y0)),
            Incident::PlaneWave { .. } => None,
        }
    }
}

/// Trigonometric quadrature weights R_j(s_i) for the logarithmic kernel.
/// They depend only on (i - j) mod 2n; `quad_r` returns that vector.
pub fn quad_r(n: usize) -> Vec<f64> {
    let two_n = 2 * n;
    let mut r = vec![0.0; two_n];
    for (d, rd) in r.iter_mut().enumerate() {
        let ds = d as f64 * PI / n as f64;
        let mut acc = 0.0;
        for m in 1..n {
            acc += (m as f64 * ds).cos() / m as f64;
        }
        *rd = -(2.0 * PI / n as f64) * acc - (PI / (n as f64 * n as f64)) * (n as f64 * ds).cos();
    }
    r
}

/// ln(4 sin^2((s_i - s_j)/2)) depends only on (i - j) mod 2n as well.
fn log_weights(n: usize) -> Vec<f64> {
    let two_n = 2 * n;
    let mut l = vec![0.0; two_n];
    for (d, ld) in l.iter_mut().enumerate().skip(1) {
        let ds = d as f64 * PI / n as f64;
        *ld = (4.0 * (ds / 2.0).sin().powi(2)).ln();
    }
    l
}

/// Assemble the Nystrom system matrix for the single-layer equation.
///
/// Off-diagonal: M = (i/2) H_0^{(1)}(k r) |x'(t_j)| split as
/// M = M_1 ln(4 sin^2((s_i-s_j)/2)) + M_2 with M_1 = -(1/2pi) J_0(k r) |x'|.
/// Diagonal: M_1 = -(1/2pi)|x'|, and M_2 carries the Euler-constant term plus
/// the grading correction 2 M_1 ln w'(s_i).
pub fn assemble_system(mesh: &GradedMesh, k: f64) -> CMat {
    let two_n = mesh.x.len();
    let n = mesh.n;
    let r_w = quad_r(n);
    let logs = log_weights(n);
    let mut a = CMat::zeros(two_n, two_n);
    for i in 0..two_n {
        for j in 0..two_n {
            let d = (i + two_n - j) % two_n;
            if i == j {
                let sp = mesh.speed[i];
                let m1 = -sp / (2.0 * PI);
                let m2 = Complex64::new(
                    -EULER_GAMMA / PI - (k * sp / 2.0).ln() / PI,
                    0.5,
                ) * sp
                    + 2.0 * m1 * mesh.wprime[i].ln();
                *a.at_mut(i, j) = r_w[0] * m1 + (PI / n as f64) * m2;
            } else {
                let dx = mesh.x[i][0] - mesh.x[j][0];
                let dy = mesh.x[i][1] - mesh.x[j][1];
                let dist = dx.hypot(dy);
                let h0 = specfun::hankel1(0, k * dist);
                let sp = mesh.speed[j];
                let m = Complex64::new(0.0, 0.5) * h0 * sp;
                let m1 = -h0.re * sp / (2.0 * PI); // J_0 = Re H_0^{(1)}
                let m2 = m - m1 * logs[d];
                *a.at_mut(i, j) = r_w[d] * m1 + (PI / n as f64) * m2;
            }
        }
    }
    a
}

/// Discrete density solution: the vector W Psi at the mesh knots.
#[derive(Clone, Debug)]
pub struct DensitySolution {
    pub mesh: GradedMesh,
    pub incident: IncidentField,
    pub wpsi: Vec<Complex64>,
}

/// Solve the boundary integral equation for the given incident field.
pub fn solve_density(
    mesh: &GradedMesh,
    incident: IncidentField,
) -> Result<DensitySolution, SingularSystem> {
    let a = assemble_system(mesh, incident.k);
    let rhs: Vec<Complex64> = mesh.x.iter().map(|&x| -2.0 * incident.value(x)).collect();
    let wpsi = Lu::factor(a)?.solve(&rhs);
    Ok(DensitySolution {
        mesh: mesh.clone(),
        incident,
        wpsi,
    })
}

/// Far-field pattern at the given unit directions:
/// gamma (pi/n) sum_j e^{-ik xhat.x_j} |x'(t_j)| (W Psi)_j.
pub fn farfield(sol: &DensitySolution, directions: &[Point]) -> Vec<Complex64> {
    let k = sol.incident.k;
    let gamma = specfun::farfield_prefactor(k);
    let w = PI / sol.mesh.n as f64;
    directions
        .iter()
        .map(|&xh| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &x) in sol.mesh.x.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -k * (xh[0] * x[0] + xh[1] * x[1]));
                acc += phase * sol.mesh.speed[j] * sol.wpsi[j];
            }
            gamma * w * acc
        })
        .collect()
}

/// Scattered field at points off the crack (single-layer potential).
///
/// Quadrature accuracy degrades within ~2 knot spacings of the crack; use
/// `is_near_field` to flag such evaluation points.
pub fn scattered_field(sol: &DensitySolution, pts: &[Point]) -> Vec<Complex64> {
    let k = sol.incident.k;
    let w = PI / sol.mesh.n as f64;
    pts.iter()
        .map(|&p| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &x) in sol.mesh.x.iter().enumerate() {
                acc += specfun::fundamental_solution(k, p, x) * sol.mesh.speed[j] * sol.wpsi[j];
            }
            w * acc
        })
        .collect()
}

/// True when a point is too close to the crack for the field quadrature.
pub fn is_near_field(mesh: &GradedMesh, p: Point) -> bool {
    let mut max_spacing = 0.0_f64;
    for w in mesh.x.windows(2) {
        let d = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
        max_spacing = max_spacing.max(d);
    }
    mesh.crack.distance_to(p) < 2.0 * max_spacing
}

/// Generate far-field data on `num_dirs` directions spanning the aperture
/// [theta0, theta1); full circle when theta1 - theta0 = 2pi (endpoint
/// excluded), closed arc otherwise (endpoint included).
pub fn direction_grid(theta0: f64, theta1: f64, num_dirs: usize) -> Vec<Point> {
    let full = ((theta1 - theta0) - 2.0 * PI).abs() < 1e-12;
    let denom = if full { num_dirs } else { num_dirs - 1 } as f64;
    (0..num_dirs)
        .map(|p| {
            let th = theta0 + (theta1 - theta0) * p as f64 / denom;
            [th.cos(), th.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mesh_with_knots_per_segment, Crack};
    use approx::assert_relative_eq;

    fn example_crack() -> Crack {
        Crack::new(vec![[1.0, 3.0], [3.0, 1.0], [2.0, 0.0]]).unwrap()
    }

    #[test]
    fn zero_incident_gives_zero_density_and_fields() {
        // solve with an explicit zero right-hand side through the raw system
        let mesh = mesh_with_knots_per_segment(&example_crack(), 16, 3.0).unwrap();
        let a = assemble_system(&mesh, 2.0);
        let rhs = vec![Complex64::new(0.0, 0.0); mesh.x.len()];
        let wpsi = Lu::factor(a).unwrap().solve(&rhs);
        assert!(wpsi.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn kernel_diagonal_formulas() {
        // unit-speed straight crack: corners (0,0) -> (2pi, 0), so |x'| = 1
        let cr = Crack::new(vec![[0.0, 0.0], [2.0 * PI, 0.0]]).unwrap();
        let mesh = mesh_with_knots_per_segment(&cr, 16, 3.0).unwrap();
        let k = 1.0;
        let a = assemble_system(&mesh, k);
        let n = mesh.n;
        let r0 = quad_r(n)[0];
        let i0 = 3usize;
        let sp = mesh.speed[i0];
        assert_relative_eq!(sp, 1.0, epsilon = 1e-14);
        let m1 = -1.0 / (2.0 * PI);
        let m2 = Complex64::new(-EULER_GAMMA / PI - (0.5f64).ln() / PI, 0.5)
            + 2.0 * m1 * mesh.wprime[i0].ln();
        let want = r0 * m1 + (PI / n as f64) * m2;
        assert!((a.at(i0, i0) - want).norm() < 1e-14);
    }

    #[test]
    fn kernel_symmetry_up_to_speed_factor() {
        let mesh = mesh_with_knots_per_segment(&example_crack(), 16, 3.0).unwrap();
        let k = 2.0;
        let a = assemble_system(&mesh, k);
        for &(i, j) in &[(3usize, 17usize), (5, 30), (1, 12)] {
            let lhs = a.at(i, j) / mesh.speed[j];
            let rhs = a.at(j, i) / mesh.speed[i];
            assert!((lhs - rhs).norm() < 1e-12, "asymmetry at ({i},{j})");
        }
    }

    #[test]
    fn dirichlet_trace_vanishes_near_crack() {
        // u = u^i + u^s vanishes on the crack face, so approaching it along
        // the normal gives |u(x + eps nu)| ~ eps |dnu u|: the trace halves
        // with eps and stays small at eps = 0.05
        let cr = example_crack();
        let mesh = mesh_with_knots_per_segment(&cr, 64, 3.0).unwrap();
        let inc = IncidentField::plane(2.0, [1.0, 0.0]);
        let sol = solve_density(&mesh, inc).unwrap();
        for &t in &[0.5 * PI, 1.5 * PI] {
            let x = cr.position(t);
            let xp = cr.tangent(t);
            let sp = xp[0].hypot(xp[1]);
            let nu = [xp[1] / sp, -xp[0] / sp];
            let probe = |eps: f64| {
                let p = [x[0] + eps * nu[0], x[1] + eps * nu[1]];
                (inc.value(p) + scattered_field(&sol, &[p])[0]).norm()
            };
            let (u2, u1, u05) = (probe(0.2), probe(0.1), probe(0.05));
            assert!(u05 < 0.25, "|u| = {u05} too large at eps = 0.05");
            for &(big, small) in &[(u2, u1), (u1, u05)] {
                let ratio = small / big;
                assert!(
                    (0.35..0.65).contains(&ratio),
                    "trace decay ratio {ratio} not ~ 1/2"
                );
            }
        }
    }

    #[test]
    fn density_mirror_symmetry_on_straight_crack() {
        // crack on the x-axis, normally incident plane wave: the density is
        // symmetric under reflection t -> 2pi - t
        let cr = Crack::new(vec![[-1.0, 0.0], [1.0, 0.0]]).unwrap();
        let mesh = mesh_with_knots_per_segment(&cr, 32, 3.0).unwrap();
        let sol = solve_density(&mesh, IncidentField::plane(2.0, [0.0, 1.0])).unwrap();
        let m = sol.wpsi.len();
        for j in 0..m / 2 {
            let a = sol.wpsi[j];
            let b = sol.wpsi[m - 1 - j];
            assert!((a - b).norm() < 1e-10 * a.norm().max(1e-12));
        }
    }

    #[test]
    fn farfield_asymptotics_of_scattered_field() {
        let mesh = mesh_with_knots_per_segment(&example_crack(), 32, 3.0).unwrap();
        let k = 2.0;
        let sol = solve_density(&mesh, IncidentField::plane(k, [1.0, 0.0])).unwrap();
        let xh = [0.6, 0.8];
        let ff = farfield(&sol, &[xh])[0];
        let r = 1e3;
        let us = scattered_field(&sol, &[[r * xh[0], r * xh[1]]])[0];
        let asym = us * r.sqrt() * Complex64::from_polar(1.0, -k * r);
        assert!(
            (asym - ff).norm() < 5.0 / r,
            "asymptotics violated: {} vs {}",
            asym,
            ff
        );
    }

    #[test]
    fn reciprocity_spot_check() {
        let mesh = mesh_with_knots_per_segment(&example_crack(), 32, 3.0).unwrap();
        let k = 2.0;
        for &(t1, t2) in &[(0.3, 1.9), (2.5, 5.1)] {
            let xh = [f64::cos(t1), f64::sin(t1)];
            let d = [f64::cos(t2), f64::sin(t2)];
            let a = farfield(
                &solve_density(&mesh, IncidentField::plane(k, d)).unwrap(),
                &[xh],
            )[0];
            let b = farfield(
                &solve_density(&mesh, IncidentField::plane(k, [-xh[0], -xh[1]])).unwrap(),
                &[[-d[0], -d[1]]],
            )[0];
            assert!((a - b).norm() < 1e-6 * a.norm().max(1.0));
        }
    }

    #[test]
    fn mixed_reciprocity_point_source_vs_plane_wave() {
        // w^inf(xhat, y0) = gamma u^s(y0, -xhat)
        let mesh = mesh_with_knots_per_segment(&example_crack(), 32, 3.0).unwrap();
        let k = 2.0;
        let y0 = [2.0, -1.0];
        let th = 0.7_f64;
        let xh = [th.cos(), th.sin()];
        let ps = solve_density(&mesh, IncidentField::point_source(k, y0)).unwrap();
        let lhs = farfield(&ps, &[xh])[0];
        let pw = solve_density(&mesh, IncidentField::plane(k, [-xh[0], -xh[1]])).unwrap();
        let us = scattered_field(&pw, &[y0])[0];
        let rhs = specfun::farfield_prefactor(k) * us;
        assert!((lhs - rhs).norm() < 1e-3 * lhs.norm());
    }

    #[test]
    fn optical_theorem_sign() {
        // sound-soft scatterer: Im u^inf(d, d) >= 0 up to discretization error
        let mesh = mesh_with_knots_per_segment(&example_crack(), 32, 3.0).unwrap();
        for &th in &[0.0, 0.7, 2.1, 4.0] {
            let d = [f64::cos(th), f64::sin(th)];
            let sol = solve_density(&mesh, IncidentField::plane(2.0, d)).unwrap();
            let v = farfield(&sol, &[d])[0];
            assert!(v.im >= -1e-4, "Im u_inf(d,d) = {} < 0", v.im);
        }
    }

    #[test]
    fn farfield_linearity_in_incident_field() {
        // density and far field are linear in the boundary data: solving with
        // the sum of two incident fields equals the sum of solutions
        let mesh = mesh_with_knots_per_segment(&example_crack(), 16, 3.0).unwrap();
        let k = 2.0;
        let inc1 = IncidentField::plane(k, [1.0, 0.0]);
        let inc2 = IncidentField::point_source(k, [5.0, 1.0]);
        let a = assemble_system(&mesh, k);
        let lu = Lu::factor(a).unwrap();
        let rhs: Vec<Complex64> = mesh
            .x
            .iter()
            .map(|&x| -2.0 * (inc1.value(x) + inc2.value(x)))
            .collect();
        let wpsi_sum = lu.solve(&rhs);
        let s1 = solve_density(&mesh, inc1).unwrap();
        let s2 = solve_density(&mesh, inc2).unwrap();
        for i in 0..wpsi_sum.len() {
            let want = s1.wpsi[i] + s2.wpsi[i];
            assert!((wpsi_sum[i] - want).norm() < 1e-10 * want.norm().max(1e-12));
        }
    }
}
