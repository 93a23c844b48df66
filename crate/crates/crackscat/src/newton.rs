//! Regularized Newton iteration on the crack corner positions.
//!
//! The Frechet derivative of the corner-to-far-field map is evaluated by
//! solving a jump boundary value problem on the current crack: the normal
//! traces of the total field give the Dirichlet jump of the derivative field,
//! a regularized second-kind solve gives its Neumann jump, and the far field
//! follows from the combined double/single-layer representation. Each Newton
//! step applies a Tikhonov-regularized real update to all corners, followed
//! by a tangential search over the two tips (the derivative alone does not
//! determine tip motion along the crack line).
//!
//! As everywhere else, W Psi / W X1 / W X2 are the discrete unknowns; the
//! grading derivative W is never inverted.

use crate::forward::{self, DensitySolution, IncidentField};
use crate::geometry::{mesh_with_knots_per_segment, Crack, GradedMesh, Point};
use crate::linalg::{tikhonov_solve_real, CMat, Lu};
use crate::specfun;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NewtonError {
    #[error("forward solve failed: {0}")]
    Forward(#[from] crate::linalg::SingularSystem),
    #[error("crack geometry became invalid and could not be repaired: {0}")]
    Geometry(#[from] crate::geometry::GeometryError),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Tikhonov parameter of the corner update
    pub alpha: f64,
    /// regularization of the jump-system solve inside the derivative
    pub alpha0: f64,
    pub max_iters: usize,
    /// quadrature knots per crack segment (2n = knots * segments / ... must be even)
    pub knots_per_segment: usize,
}

/// Kernel matrices of the jump problem with the quadrature rule applied:
/// H (normal derivative of the single layer, scaled) and L (double layer),
/// each as R o K1 + (pi/n) K2 with the usual logarithmic splitting. On a
/// piecewise-linear crack both diagonals vanish (x'' = 0).
pub fn hl_matrices(mesh: &GradedMesh, k: f64) -> (CMat, CMat) {
    let m = mesh.x.len();
    let n = mesh.n;
    let r_w = forward::quad_r(n);
    let mut h = CMat::zeros(m, m);
    let mut l = CMat::zeros(m, m);
    let pion = PI / n as f64;
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let e = [mesh.x[j][0] - mesh.x[i][0], mesh.x[j][1] - mesh.x[i][1]];
            let r = e[0].hypot(e[1]);
            // x2'(t_i) e1 - x1'(t_i) e2 and the tau-sided analogue
            let cross_t = mesh.xp[i][1] * e[0] - mesh.xp[i][0] * e[1];
            let cross_tau = mesh.xp[j][1] * e[0] - mesh.xp[j][0] * e[1];
            let h1r = specfun::hankel1(1, k * r) / r;
            let j1r = h1r.re; // J_1 = Re H_1^{(1)}
            let d = (i + m - j) % m;
            let ds = d as f64 * PI / n as f64;
            let logs = (4.0 * (ds / 2.0).sin().powi(2)).ln();
            let sp = mesh.speed[j];
            let h_full = Complex64::new(0.0, 0.5 * k) * cross_t * h1r * sp;
            let h1 = -(k / (2.0 * PI)) * cross_t * j1r * sp;
            let h2 = h_full - h1 * logs;
            *h.at_mut(i, j) = r_w[d] * h1 + pion * h2;
            let l_full = Complex64::new(0.0, -0.5 * k) * cross_tau * h1r;
            let l1 = (k / (2.0 * PI)) * cross_tau * j1r;
            let l2 = l_full - l1 * logs;
            *l.at_mut(i, j) = r_w[d] * l1 + pion * l2;
        }
    }
    (h, l)
}

/// Normal traces of the total field from both sides, as W-scaled vectors:
/// WV_pm = D^-1 [(WH -+ D)(WPsi) + W D Y] where Y = 2 dnu u^i and D = D_Gamma.
pub fn normal_derivative_trace(
    sol: &DensitySolution,
    h: &CMat,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mesh = &sol.mesh;
    let m = mesh.x.len();
    let hw = h.matvec(&sol.wpsi);
    let mut wvp = Vec::with_capacity(m);
    let mut wvm = Vec::with_capacity(m);
    for i in 0..m {
        let y = 2.0 * sol.incident.normal_derivative(mesh.x[i], mesh.nu[i]);
        let common = mesh.wprime[i] * hw[i] + mesh.speed[i] * mesh.wprime[i] * y;
        wvp.push((common - mesh.speed[i] * sol.wpsi[i]) / mesh.speed[i]);
        wvm.push((common + mesh.speed[i] * sol.wpsi[i]) / mesh.speed[i]);
    }
    (wvp, wvm)
}

/// Corner perturbation, interpolated affinely along the segments to the
/// vector field q(x(t)); returns nu . q sampled at the mesh knots.
pub fn nu_dot_q(mesh: &GradedMesh, deltas: &[Point]) -> Vec<f64> {
    let nseg = mesh.crack.segments();
    assert_eq!(deltas.len(), nseg + 1);
    (0..mesh.x.len())
        .map(|i| {
            let l = mesh.segment[i];
            let lam = mesh.t[i] * nseg as f64 / (2.0 * PI);
            let loc = lam - l as f64;
            let q = [
                (1.0 - loc) * deltas[l][0] + loc * deltas[l + 1][0],
                (1.0 - loc) * deltas[l][1] + loc * deltas[l + 1][1],
            ];
            mesh.nu[i][0] * q[0] + mesh.nu[i][1] * q[1]
        })
        .collect()
}

/// Workspace shared by all derivative columns at one Newton iterate.
pub struct FrechetWorkspace {
    pub sol: DensitySolution,
    l_mat: CMat,
    lu: Lu,
    wvp: Vec<Complex64>,
    wvm: Vec<Complex64>,
}

impl FrechetWorkspace {
    pub fn new(sol: DensitySolution) -> Result<Self, NewtonError> {
        let k = sol.incident.k;
        let (h, l_mat) = hl_matrices(&sol.mesh, k);
        let a = forward::assemble_system(&sol.mesh, k);
        let lu = Lu::factor(a)?;
        let (wvp, wvm) = normal_derivative_trace(&sol, &h);
        Ok(FrechetWorkspace {
            sol,
            l_mat,
            lu,
            wvp,
            wvm,
        })
    }
}

/// Far-field pattern of the Frechet derivative in direction of the corner
/// perturbation `deltas`.
///
/// WX1 = Q (WV_- - WV_+)/2 with Q = diag(nu.q); the Neumann jump comes from
/// the regularized solve WX2 = M^-1 (alpha0 I + W^2)^-1 W rhs with
/// rhs = W L (WX1) + WX1 + Q WV_+ (M^-1 being an LU solve with the already
/// factored forward matrix), and the far field is the discrete combined-layer
/// sum with weights (pi/n) D_Gamma.
pub fn frechet_farfield(
    ws: &FrechetWorkspace,
    deltas: &[Point],
    directions: &[Point],
    alpha0: f64,
) -> Vec<Complex64> {
    let mesh = &ws.sol.mesh;
    let k = ws.sol.incident.k;
    let m = mesh.x.len();
    let q = nu_dot_q(mesh, deltas);
    let wx1: Vec<Complex64> = (0..m)
        .map(|i| q[i] * (ws.wvm[i] - ws.wvp[i]) / 2.0)
        .collect();
    let lx = ws.l_mat.matvec(&wx1);
    let rhs: Vec<Complex64> = (0..m)
        .map(|i| {
            let r = mesh.wprime[i] * lx[i] + wx1[i] + q[i] * ws.wvp[i];
            mesh.wprime[i] * r / (alpha0 + mesh.wprime[i] * mesh.wprime[i])
        })
        .collect();
    let wx2 = ws.lu.solve(&rhs);
    let gam_dl = Complex64::from_polar(k / (8.0 * k * PI).sqrt(), -FRAC_PI_4);
    let gam_sl = specfun::farfield_prefactor(k);
    let w = PI / mesh.n as f64;
    directions
        .iter()
        .map(|&xh| {
            let mut t1 = Complex64::new(0.0, 0.0);
            let mut t2 = Complex64::new(0.0, 0.0);
            for j in 0..m {
                let ph = Complex64::from_polar(
                    1.0,
                    -k * (xh[0] * mesh.x[j][0] + xh[1] * mesh.x[j][1]),
                );
                let xnu = xh[0] * mesh.nu[j][0] + xh[1] * mesh.nu[j][1];
                t1 += ph * xnu * mesh.speed[j] * wx1[j];
                t2 += ph * mesh.speed[j] * wx2[j];
            }
            w * (gam_dl * t1 - gam_sl * t2)
        })
        .collect()
}

/// Jacobian of the corner-to-far-field map: column order follows the update
/// stacking (all first coordinates P_0..P_N, then all second coordinates).
pub fn assemble_jacobian(
    ws: &FrechetWorkspace,
    directions: &[Point],
    alpha0: f64,
) -> CMat {
    let ncorner = ws.sol.mesh.crack.segments() + 1;
    let ld = directions.len();
    let mut jac = CMat::zeros(ld, 2 * ncorner);
    for coord in 0..2 {
        for ell in 0..ncorner {
            let mut deltas = vec![[0.0, 0.0]; ncorner];
            deltas[ell][coord] = 1.0;
            let col = frechet_farfield(ws, &deltas, directions, alpha0);
            for (i, v) in col.into_iter().enumerate() {
                *jac.at_mut(i, coord * ncorner + ell) = v;
            }
        }
    }
    jac
}

/// One Tikhonov-regularized Newton update: solves the stacked-real normal
/// equations (alpha I + Re J^H J) dp = Re J^H residual and unpacks the corner
/// perturbations.
pub fn newton_step(jac: &CMat, residual: &[Complex64], alpha: f64) -> Vec<Point> {
    let (dp, _) = tikhonov_solve_real(jac, residual, alpha);
    let ncorner = dp.len() / 2;
    (0..ncorner).map(|l| [dp[l], dp[ncorner + l]]).collect()
}

/// Tangential tip-update step length: root-mean-square perturbation size.
pub fn tangential_step_length(deltas: &[Point]) -> f64 {
    let s: f64 = deltas.iter().map(|d| d[0] * d[0] + d[1] * d[1]).sum();
    (s / deltas.len() as f64).sqrt()
}

fn residual_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn forward_farfield_of(
    corners: &[Point],
    incident: IncidentField,
    directions: &[Point],
    knots_per_segment: usize,
) -> Result<Vec<Complex64>, NewtonError> {
    let crack = Crack::new(corners.to_vec())?;
    let mesh = mesh_with_knots_per_segment(&crack, knots_per_segment, 3.0)?;
    let sol = forward::solve_density(&mesh, incident)?;
    Ok(forward::farfield(&sol, directions))
}

/// Candidate tag recorded in the trace: signs of the tip shifts, in the order
/// (start tip, end tip).
pub type CandidateTag = (i8, i8);

/// Tangential update of the two tips: try P_0 +- l tau_0 and P_N +- l tau_N
/// (four candidates, ties broken in the order (+,+), (+,-), (-,+), (-,-)),
/// keep the one with the smallest data residual. A candidate whose tip crosses
/// its neighbor corner is degenerate and leaves the competition.
#[allow(clippy::too_many_arguments)]
pub fn tangential_update(
    corners: &[Point],
    step: f64,
    data: &[Complex64],
    incident: IncidentField,
    directions: &[Point],
    knots_per_segment: usize,
) -> Result<(Vec<Point>, CandidateTag, f64), NewtonError> {
    let nc = corners.len();
    let dir0 = {
        let d = [corners[1][0] - corners[0][0], corners[1][1] - corners[0][1]];
        let n = d[0].hypot(d[1]);
        [d[0] / n, d[1] / n]
    };
    let dirn = {
        let d = [
            corners[nc - 1][0] - corners[nc - 2][0],
            corners[nc - 1][1] - corners[nc - 2][1],
        ];
        let n = d[0].hypot(d[1]);
        [d[0] / n, d[1] / n]
    };
    let mut best: Option<(f64, Vec<Point>, CandidateTag)> = None;
    for &(s0, sn) in &[(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
        let mut cand = corners.to_vec();
        cand[0] = [
            corners[0][0] + s0 as f64 * step * dir0[0],
            corners[0][1] + s0 as f64 * step * dir0[1],
        ];
        cand[nc - 1] = [
            corners[nc - 1][0] + sn as f64 * step * dirn[0],
            corners[nc - 1][1] + sn as f64 * step * dirn[1],
        ];
        // degenerate: a tip that crossed (or reached) its neighbor corner
        let v0 = [cand[1][0] - cand[0][0], cand[1][1] - cand[0][1]];
        if v0[0] * dir0[0] + v0[1] * dir0[1] <= 0.0 {
            continue;
        }
        let vn = [
            cand[nc - 1][0] - cand[nc - 2][0],
            cand[nc - 1][1] - cand[nc - 2][1],
        ];
        if vn[0] * dirn[0] + vn[1] * dirn[1] <= 0.0 {
            continue;
        }
        let ff = match forward_farfield_of(&cand, incident, directions, knots_per_segment) {
            Ok(ff) => ff,
            Err(_) => continue, // invalid geometry: out of the competition
        };
        let res = residual_norm(&ff, data);
        if best.as_ref().map_or(true, |(b, _, _)| res < *b) {
            best = Some((res, cand, (s0, sn)));
        }
    }
    match best {
        Some((res, cand, tag)) => Ok((cand, tag, res)),
        None => {
            // every candidate degenerate: keep the unshifted crack
            let ff = forward_farfield_of(corners, incident, directions, knots_per_segment)?;
            Ok((corners.to_vec(), (0, 0), residual_norm(&ff, data)))
        }
    }
}

/// One recorded Newton iterate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterateRecord {
    pub step: usize,
    pub corners: Vec<Point>,
    pub residual: f64,
    /// tip-candidate signs chosen by the tangential update; (0, 0) for the
    /// initial entry and for steps where every candidate was degenerate
    pub candidate: CandidateTag,
    /// number of times the corner update was halved to restore valid geometry
    pub halvings: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterateTrace {
    pub records: Vec<IterateRecord>,
}

/// Full reconstruction: max_iters repetitions of Newton step, corner update,
/// and tangential tip update, starting from the initial guess.
pub fn reconstruct(
    initial: &[Point],
    data: &[Complex64],
    incident: IncidentField,
    directions: &[Point],
    config: NewtonConfig,
) -> Result<IterateTrace, NewtonError> {
    let nps = config.knots_per_segment;
    let mut corners = initial.to_vec();
    let mut records = Vec::with_capacity(config.max_iters + 1);
    let ff0 = forward_farfield_of(&corners, incident, directions, nps)?;
    records.push(IterateRecord {
        step: 0,
        corners: corners.clone(),
        residual: residual_norm(&ff0, data),
        candidate: (0, 0),
        halvings: 0,
    });
    for step in 1..=config.max_iters {
        let crack = Crack::new(corners.clone())?;
        let mesh = mesh_with_knots_per_segment(&crack, nps, 3.0)?;
        let sol = forward::solve_density(&mesh, incident)?;
        let ff = forward::farfield(&sol, directions);
        let residual: Vec<Complex64> = data.iter().zip(&ff).map(|(&d, &f)| d - f).collect();
        let ws = FrechetWorkspace::new(sol)?;
        let jac = assemble_jacobian(&ws, directions, config.alpha0);
        let deltas = newton_step(&jac, &residual, config.alpha);
        let lm = tangential_step_length(&deltas);
        // corner update, halving on geometric collapse
        let mut halvings = 0u32;
        let mut scale = 1.0;
        let updated = loop {
            let cand: Vec<Point> = corners
                .iter()
                .zip(&deltas)
                .map(|(&p, &d)| [p[0] + scale * d[0], p[1] + scale * d[1]])
                .collect();
            if Crack::new(cand.clone()).is_ok() {
                break cand;
            }
            halvings += 1;
            scale /= 2.0;
            if halvings > 8 {
                break corners.clone(); // give up on this update entirely
            }
        };
        let (chosen, tag, res) =
            tangential_update(&updated, lm, data, incident, directions, nps)?;
        corners = chosen;
        records.push(IterateRecord {
            step,
            corners: corners.clone(),
            residual: res,
            candidate: tag,
            halvings,
        });
    }
    Ok(IterateTrace { records })
}
