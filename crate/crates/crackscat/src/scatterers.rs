//! Disk test scatterers with analytically known far-field operators, used as
//! the comparison objects in the one-wave factorization indicator.
//!
//! For a disk of radius R centered at P the far-field pattern is a Fourier
//! series in th_x - th_d with coefficients c_n depending on the boundary
//! condition, and the eigensystem of the associated selfadjoint operator F_#
//! is available in closed form: lambda_n = sqrt(8 pi / k) |c_n| with
//! eigenfunctions f_n(xhat) = e^{i n th_x} e^{-i k P.xhat} / sqrt(2 pi).

use crate::geometry::Point;
use crate::linalg::{jacobi_svd, CMat};
use crate::specfun;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// Boundary condition of the disk test scatterer.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiskKind {
    /// sound-soft disk
    Dirichlet,
    /// impedance condition du/dnu + i eta u = 0 with parameter eta
    Impedance { eta_re: f64, eta_im: f64 },
    /// penetrable disk with constant refractive index n
    Penetrable { index: f64 },
}

impl DiskKind {
    /// Default impedance parameter used by the scans: eta = i k.
    pub fn impedance_ik(k: f64) -> Self {
        DiskKind::Impedance {
            eta_re: 0.0,
            eta_im: k,
        }
    }
}

fn bessel_j_deriv(n: i32, x: f64) -> f64 {
    if n == 0 {
        -specfun::bessel_j(1, x)
    } else {
        specfun::bessel_j(n - 1, x) - n as f64 / x * specfun::bessel_j(n, x)
    }
}

/// Fourier coefficient c_n of the disk far field; c_{-n} = c_n.
pub fn disk_coeff(kind: DiskKind, n: i32, k: f64, radius: f64) -> Complex64 {
    let m = n.abs();
    let x = k * radius;
    let j = specfun::bessel_j(m, x);
    let h = specfun::hankel1(m, x);
    match kind {
        DiskKind::Dirichlet => j / h,
        DiskKind::Impedance { eta_re, eta_im } => {
            let eta = Complex64::new(eta_re, eta_im);
            let jp = bessel_j_deriv(m, x);
            let hp = specfun::hankel1_deriv(m, x);
            (k * jp + eta * j) / (k * hp + eta * h)
        }
        DiskKind::Penetrable { index } => {
            let k1 = k * index.sqrt();
            let ji = specfun::bessel_j(m, k1 * radius);
            let jip = bessel_j_deriv(m, k1 * radius);
            let jp = bessel_j_deriv(m, x);
            let hp = specfun::hankel1_deriv(m, x);
            (k * jp * ji - k1 * j * jip) / (k * hp * ji - k1 * h * jip)
        }
    }
}

/// Number of series terms that resolves the far field to machine accuracy.
pub fn series_order(k: f64, radius: f64) -> i32 {
    (k * radius).ceil() as i32 + 20
}

/// Disk far-field pattern u_inf(xhat; d) for observation angles `th_x` and
/// incidence angle `th_d`:
/// -sqrt(2/(k pi)) e^{-i pi/4} sum_n c_n e^{i n (th_x - th_d)} e^{i k P.(d - xhat)}.
pub fn disk_farfield(
    kind: DiskKind,
    center: Point,
    radius: f64,
    k: f64,
    th_x: &[f64],
    th_d: f64,
    nser: i32,
) -> Vec<Complex64> {
    let pref = -(2.0 / (k * PI)).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_4);
    let coeffs: Vec<Complex64> = (0..=nser).map(|n| disk_coeff(kind, n, k, radius)).collect();
    let d = [th_d.cos(), th_d.sin()];
    th_x.iter()
        .map(|&tx| {
            let mut s = coeffs[0];
            for n in 1..=nser as usize {
                // c_{-n} = c_n, so the +-n pair contributes 2 c_n cos(n dth)
                s += 2.0 * (n as f64 * (tx - th_d)).cos() * coeffs[n];
            }
            let xh = [tx.cos(), tx.sin()];
            let ph = k * (center[0] * (d[0] - xh[0]) + center[1] * (d[1] - xh[1]));
            pref * s * Complex64::from_polar(1.0, ph)
        })
        .collect()
}

/// Far-field matrix A[i][j] = u_inf(xhat_i; d_j) on the angle grid `th`.
pub fn disk_farfield_matrix(
    kind: DiskKind,
    center: Point,
    radius: f64,
    k: f64,
    th: &[f64],
) -> CMat {
    let nser = series_order(k, radius);
    let l = th.len();
    let mut a = CMat::zeros(l, l);
    for (j, &td) in th.iter().enumerate() {
        let col = disk_farfield(kind, center, radius, k, th, td, nser);
        for (i, v) in col.into_iter().enumerate() {
            *a.at_mut(i, j) = v;
        }
    }
    a
}

/// Spectral data of the selfadjoint far-field operator on the measurement
/// grid: eigenvalues `lambdas` (descending) with eigenfunction samples in the
/// columns of `eigvecs`, plus the quadrature weights of the angle grid.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub lambdas: Vec<f64>,
    pub eigvecs: CMat,
    pub weights: Vec<f64>,
}

/// Closed-form eigensystem of the disk operator: modes n = -nser..nser with
/// lambda_n = sqrt(8 pi / k)|c_n| and f_n = e^{i n th} e^{-i k P.xhat}/sqrt(2 pi).
pub fn disk_eigensystem(
    kind: DiskKind,
    center: Point,
    radius: f64,
    k: f64,
    th: &[f64],
    weights: &[f64],
) -> Eigensystem {
    let nser = series_order(k, radius);
    let l = th.len();
    let m = (2 * nser + 1) as usize;
    let mut lambdas = Vec::with_capacity(m);
    let mut eigvecs = CMat::zeros(l, m);
    let scale = (8.0 * PI / k).sqrt();
    for (col, n) in (-nser..=nser).enumerate() {
        lambdas.push(scale * disk_coeff(kind, n, k, radius).norm());
        for (i, &t) in th.iter().enumerate() {
            let xh = [t.cos(), t.sin()];
            let ph = n as f64 * t - k * (xh[0] * center[0] + xh[1] * center[1]);
            *eigvecs.at_mut(i, col) = Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), ph);
        }
    }
    Eigensystem {
        lambdas,
        eigvecs,
        weights: weights.to_vec(),
    }
}

/// Numerical eigensystem of F_# from a sampled far-field matrix: singular
/// system of B = diag(sqrt(w)) A diag(sqrt(w)), mapped back through the
/// weights so the columns sample L^2-normalized functions on the aperture.
pub fn fsharp_eigensystem(a: &CMat, weights: &[f64]) -> Eigensystem {
    let l = weights.len();
    assert_eq!(a.nrows, l);
    assert_eq!(a.ncols, l);
    let sw: Vec<f64> = weights.iter().map(|&w| w.sqrt()).collect();
    let b = CMat::from_fn(l, l, |i, j| a.at(i, j) * sw[i] * sw[j]);
    let (sing, u) = jacobi_svd(&b);
    let eigvecs = CMat::from_fn(l, l, |i, j| u.at(i, j) / sw[i]);
    Eigensystem {
        lambdas: sing,
        eigvecs,
        weights: weights.to_vec(),
    }
}

/// Uniform full-circle angle grid with its trapezoidal weights 2 pi / L.
pub fn full_circle_grid(l: usize) -> (Vec<f64>, Vec<f64>) {
    let th: Vec<f64> = (0..l).map(|p| 2.0 * PI * p as f64 / l as f64).collect();
    let w = vec![2.0 * PI / l as f64; l];
    (th, w)
}

/// Closed aperture arc [theta0, theta1] with endpoint-inclusive grid and
/// trapezoidal weights (half weight at the two endpoints).
pub fn aperture_grid(theta0: f64, theta1: f64, l: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(l >= 2);
    let h = (theta1 - theta0) / (l - 1) as f64;
    let th: Vec<f64> = (0..l).map(|p| theta0 + h * p as f64).collect();
    let mut w = vec![h; l];
    w[0] = h / 2.0;
    w[l - 1] = h / 2.0;
    (th, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn disk_coefficients_match_frozen_values() {
        let cases: [(DiskKind, i32, f64, f64, Complex64); 6] = [
            (
                DiskKind::Dirichlet,
                0,
                1.0,
                1.0,
                Complex64::new(0.9868716142076372, -0.11382456360052365),
            ),
            (
                DiskKind::Dirichlet,
                3,
                2.0,
                1.5,
                Complex64::new(0.2477513929134736, 0.4317066599241981),
            ),
            (
                DiskKind::Impedance {
                    eta_re: 0.0,
                    eta_im: 2.0,
                },
                1,
                2.0,
                1.0,
                Complex64::new(0.502816238255731, 0.07528549231235576),
            ),
            (
                DiskKind::Impedance {
                    eta_re: 0.0,
                    eta_im: 2.0,
                },
                4,
                2.0,
                2.0,
                Complex64::new(0.3459055405093246, 0.12182448542108062),
            ),
            (
                DiskKind::Penetrable { index: 4.0 },
                0,
                1.0,
                1.0,
                Complex64::new(0.8892540087681885, -0.3138173300789729),
            ),
            (
                DiskKind::Penetrable { index: 4.0 },
                2,
                2.0,
                1.5,
                Complex64::new(0.5535464714804537, 0.49712450693160676),
            ),
        ];
        for &(kind, n, k, r, want) in &cases {
            let got = disk_coeff(kind, n, k, r);
            assert!((got - want).norm() < 1e-14, "{kind:?} n={n}: {got}");
            // symmetry in the mode index
            assert!((disk_coeff(kind, -n, k, r) - got).norm() < 1e-15);
        }
    }

    #[test]
    fn farfield_series_frozen_value() {
        let v = disk_farfield(
            DiskKind::Dirichlet,
            [1.0, 0.5],
            1.0,
            2.0,
            &[0.3],
            1.1,
            30,
        )[0];
        let want = Complex64::new(-0.13109400033146013, 0.8430659636049574);
        assert!((v - want).norm() < 1e-13, "{v}");
    }

    #[test]
    fn impedance_limit_recovers_dirichlet() {
        // |eta| -> infinity turns the impedance condition into u = 0
        let k = 2.0;
        let r = 1.3;
        for n in 0..4 {
            let big = DiskKind::Impedance {
                eta_re: 0.0,
                eta_im: 1e9,
            };
            let ci = disk_coeff(big, n, k, r);
            let cd = disk_coeff(DiskKind::Dirichlet, n, k, r);
            assert!((ci - cd).norm() < 1e-7, "n={n}: {ci} vs {cd}");
        }
    }

    #[test]
    fn numeric_eigensystem_matches_analytic_spectrum() {
        // Dirichlet disk, k = 1, R = 1, centered at origin, 64 angles
        let (th, w) = full_circle_grid(64);
        let a = disk_farfield_matrix(DiskKind::Dirichlet, [0.0, 0.0], 1.0, 1.0, &th);
        let eig = fsharp_eigensystem(&a, &w);
        let want = [
            4.980239844209122,
            2.4604313802579343,
            2.4604313802579343,
            0.34812876371944185,
            0.3481287637194418,
        ];
        for (i, &wv) in want.iter().enumerate() {
            assert_relative_eq!(eig.lambdas[i], wv, epsilon = 1e-10);
        }
        // eigenfunctions are orthonormal in the weighted inner product
        for a_col in 0..3 {
            for b_col in 0..3 {
                let mut ip = Complex64::new(0.0, 0.0);
                for i in 0..64 {
                    ip += w[i] * eig.eigvecs.at(i, a_col).conj() * eig.eigvecs.at(i, b_col);
                }
                let want = if a_col == b_col { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-10, "({a_col},{b_col}): {ip}");
            }
        }
    }

    #[test]
    fn analytic_eigensystem_spectrum_and_normalization() {
        let (th, w) = full_circle_grid(64);
        let eig = disk_eigensystem(DiskKind::Dirichlet, [0.7, -0.2], 1.0, 1.0, &th, &w);
        let scale = (8.0 * PI).sqrt();
        let lam0 = scale * disk_coeff(DiskKind::Dirichlet, 0, 1.0, 1.0).norm();
        assert_relative_eq!(lam0, 4.980239844209122, epsilon = 1e-12);
        assert!(eig.lambdas.contains(&lam0));
        // each mode is L^2-normalized on the circle
        for col in 0..eig.lambdas.len() {
            let mut nrm = 0.0;
            for i in 0..th.len() {
                nrm += w[i] * eig.eigvecs.at(i, col).norm_sqr();
            }
            assert_relative_eq!(nrm, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn aperture_grid_weights_integrate_exactly() {
        // trapezoidal rule on [0, pi/2] integrates cos exactly to O(h^2)
        let (th, w) = aperture_grid(0.0, PI / 2.0, 201);
        let s: f64 = th.iter().zip(&w).map(|(&t, &wi)| t.cos() * wi).sum();
        assert_relative_eq!(s, 1.0, epsilon = 1e-4);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, PI / 2.0, epsilon = 1e-14);
    }
}
