//! Sampling indicators for crack reconstruction from one far-field pattern:
//! contrast indicators (misfit against shifted cracks, point sources, or disk
//! scatterers) and the factorization indicator built on disk test scatterers,
//! plus the radius scan and convex-hull accumulation of the hybrid method.

use crate::geometry::Point;
use crate::scatterers::{self, DiskKind, Eigensystem};
use crate::specfun;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A single indicator evaluation. A vanishing misfit (or an all-zero Picard
/// sum) makes the inverted value infinite; that is reported through the
/// `divergent` flag with `value` set to `f64::MAX`, never as a float infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Indicator {
    pub value: f64,
    pub divergent: bool,
}

impl Indicator {
    fn from_sum(s: f64) -> Self {
        if s > 0.0 && s.is_finite() {
            Indicator {
                value: 1.0 / s,
                divergent: false,
            }
        } else {
            Indicator {
                value: f64::MAX,
                divergent: true,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RegularizationParams {
    /// Tikhonov parameter of the regularized Picard sum
    pub alpha: f64,
    /// containment threshold of the radius scan
    pub epsilon: f64,
}

/// Weighted L^2 misfit sum_p w_p |u_p - v_p|^2.
fn weighted_misfit(u: &[Complex64], v: &[Complex64], w: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .zip(w)
        .map(|((&a, &b), &wi)| wi * (a - b).norm_sqr())
        .sum()
}

/// Contrast indicator against the far field of a candidate (shifted) crack:
/// the inverted weighted L^2 misfit of the two patterns.
pub fn contrast_crack(u_crack: &[Complex64], u_shifted: &[Complex64], w: &[f64]) -> Indicator {
    Indicator::from_sum(weighted_misfit(u_crack, u_shifted, w))
}

/// Contrast indicator against a point source of strength tau at P.
pub fn contrast_point_source(
    u_crack: &[Complex64],
    k: f64,
    p: Point,
    tau: Complex64,
    th: &[f64],
    w: &[f64],
) -> Indicator {
    let v: Vec<Complex64> = th
        .iter()
        .map(|&t| tau * specfun::point_source_farfield(k, [t.cos(), t.sin()], p))
        .collect();
    Indicator::from_sum(weighted_misfit(u_crack, &v, w))
}

/// Contrast indicator against the far field of a disk B_R(P) hit by the same
/// plane wave (incidence angle th_d).
pub fn contrast_disk(
    u_crack: &[Complex64],
    kind: DiskKind,
    center: Point,
    radius: f64,
    k: f64,
    th: &[f64],
    th_d: f64,
    w: &[f64],
) -> Indicator {
    let nser = scatterers::series_order(k, radius);
    let v = scatterers::disk_farfield(kind, center, radius, k, th, th_d, nser);
    Indicator::from_sum(weighted_misfit(u_crack, &v, w))
}

/// Picard coefficients of the data against the eigensystem columns: plain
/// sample sums c_n = sum_p U_p conj(f_n(th_p)) (no quadrature weights).
pub fn picard_coefficients(u: &[Complex64], eig: &Eigensystem) -> Vec<Complex64> {
    (0..eig.lambdas.len())
        .map(|n| {
            let mut c = Complex64::new(0.0, 0.0);
            for (p, &up) in u.iter().enumerate() {
                c += up * eig.eigvecs.at(p, n).conj();
            }
            c
        })
        .collect()
}

/// Relative floor below which eigenvalues are dropped from the raw
/// (unregularized) Picard sum; that sum diverges numerically otherwise.
pub const RAW_LAMBDA_FLOOR: f64 = 1e-14;

/// Factorization indicator: inverse Picard sum of the data in the test
/// operator's eigensystem. With `alpha` the Tikhonov-regularized weights
/// lambda/(alpha+lambda)^2 are used; without, terms with
/// lambda < 1e-14 lambda_0 are dropped (test-only path).
pub fn factorization_indicator(
    u: &[Complex64],
    eig: &Eigensystem,
    alpha: Option<f64>,
) -> Indicator {
    let c = picard_coefficients(u, eig);
    factorization_from_coefficients(&c, &eig.lambdas, alpha)
}

/// The Picard sum itself, given precomputed coefficients; the radius scans
/// reuse coefficients across radii (they do not depend on the disk radius).
pub fn factorization_from_coefficients(
    c: &[Complex64],
    lambdas: &[f64],
    alpha: Option<f64>,
) -> Indicator {
    let lam0 = lambdas.iter().cloned().fold(0.0_f64, f64::max);
    let mut s = 0.0;
    for (&cn, &lam) in c.iter().zip(lambdas) {
        match alpha {
            Some(a) => s += lam / (a + lam).powi(2) * cn.norm_sqr(),
            None => {
                if lam >= RAW_LAMBDA_FLOOR * lam0 {
                    s += cn.norm_sqr() / lam;
                }
            }
        }
    }
    Indicator::from_sum(s)
}

/// Limited-aperture factorization indicator. The formula is identical to the
/// full-aperture one; the aperture enters through the grid on which the data
/// and the eigensystem live, so this is the same computation (and reduces to
/// `factorization_indicator` exactly when the aperture is the full circle).
pub fn factorization_indicator_la(
    u: &[Complex64],
    eig: &Eigensystem,
    alpha: Option<f64>,
) -> Indicator {
    factorization_indicator(u, eig, alpha)
}

/// Result of a containment radius scan at one sampling center.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusScan {
    pub center: Point,
    /// largest radius with indicator < epsilon; 0 when none qualifies
    pub r: f64,
    /// no radius was below threshold
    pub empty: bool,
    /// the full indicator-vs-radius curve, for threshold selection plots
    pub curve: Vec<(f64, f64)>,
}

/// Scan disks B_r(P) over increasing radii and return the largest radius whose
/// regularized factorization indicator stays below epsilon.
///
/// Uses the closed-form disk eigensystem; the Picard coefficients are
/// radius-independent there (only the eigenvalues change), so the data is
/// reduced once and each radius costs O(series length).
pub fn radius_scan(
    u: &[Complex64],
    kind: DiskKind,
    center: Point,
    radii: &[f64],
    k: f64,
    th: &[f64],
    alpha: f64,
    epsilon: f64,
) -> RadiusScan {
    assert!(!radii.is_empty());
    assert!(
        radii.windows(2).all(|p| p[0] < p[1]),
        "radii must be increasing"
    );
    let r_max = *radii.last().unwrap();
    let nser = scatterers::series_order(k, r_max);
    // c_n = sum_p U_p e^{i k P.xhat_p} e^{-i n th_p} / sqrt(2 pi)
    let h: Vec<Complex64> = u
        .iter()
        .zip(th)
        .map(|(&up, &t)| {
            let xh = [t.cos(), t.sin()];
            up * Complex64::from_polar(1.0, k * (center[0] * xh[0] + center[1] * xh[1]))
        })
        .collect();
    let c: Vec<Complex64> = (-nser..=nser)
        .map(|n| {
            let mut s = Complex64::new(0.0, 0.0);
            for (&hp, &t) in h.iter().zip(th) {
                s += hp * Complex64::from_polar(1.0, -(n as f64) * t);
            }
            s / (2.0 * PI).sqrt()
        })
        .collect();
    let scale = (8.0 * PI / k).sqrt();
    let mut curve = Vec::with_capacity(radii.len());
    let mut r_best = 0.0;
    let mut empty = true;
    for &r in radii {
        let lambdas: Vec<f64> = (-nser..=nser)
            .map(|n| scale * scatterers::disk_coeff(kind, n, k, r).norm())
            .collect();
        let ind = factorization_from_coefficients(&c, &lambdas, Some(alpha));
        curve.push((r, ind.value));
        if !ind.divergent && ind.value < epsilon {
            r_best = r;
            empty = false;
        }
    }
    RadiusScan {
        center,
        r: if empty { 0.0 } else { r_best },
        empty,
        curve,
    }
}

/// Default containment threshold from an indicator-vs-radius curve: the
/// geometric mean of the curve's positive minimum and maximum.
pub fn default_epsilon(curve: &[(f64, f64)]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for &(_, v) in curve {
        if v > 0.0 && v < f64::MAX {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo * hi).sqrt()
}

/// Accumulated ball-coverage counts sum_j chi_{B_{r_j}(P_j)}(x) on a grid of
/// evaluation points; the maximum-count region approximates the convex hull
/// of the crack.
pub fn support_accumulate(centers: &[Point], radii: &[f64], grid: &[Point]) -> Vec<u32> {
    assert_eq!(centers.len(), radii.len());
    grid.iter()
        .map(|&x| {
            centers
                .iter()
                .zip(radii)
                .filter(|(&p, &r)| (x[0] - p[0]).hypot(x[1] - p[1]) <= r)
                .count() as u32
        })
        .collect()
}
