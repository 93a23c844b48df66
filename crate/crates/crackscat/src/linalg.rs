//! Minimal dense complex linear algebra: LU solves, one-sided Jacobi SVD,
//! and Tikhonov-regularized least squares.
//!
//! All matrices in this crate are at most ~1600 x 1600, so a dense direct
//! approach is both simplest and fastest in practice. Jacobi SVD is chosen for
//! its high relative accuracy on small singular values, which the Picard-sum
//! indicators depend on.

use num_complex::Complex64;

/// Dense row-major complex matrix.
#[derive(Clone, Debug)]
pub struct CMat {
    pub nrows: usize,
    pub ncols: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![Complex64::new(0.0, 0.0); nrows * ncols],
        }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m.data[i * ncols + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[i * self.ncols + j]
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.ncols);
        let mut out = vec![Complex64::new(0.0, 0.0); self.nrows];
        for i in 0..self.nrows {
            let row = &self.data[i * self.ncols..(i + 1) * self.ncols];
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(v) {
                acc += a * b;
            }
            out[i] = acc;
        }
        out
    }

    /// Conjugate-transpose times vector.
    pub fn adjoint_matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.nrows);
        let mut out = vec![Complex64::new(0.0, 0.0); self.ncols];
        for i in 0..self.nrows {
            let row = &self.data[i * self.ncols..(i + 1) * self.ncols];
            let vi = v[i];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * vi;
            }
        }
        out
    }
}

/// LU factorization with partial pivoting (in place).
pub struct Lu {
    lu: CMat,
    piv: Vec<usize>,
}

#[derive(Debug, thiserror::Error)]
#[error("singular linear system (pivot {pivot:.3e} at step {step})")]
pub struct SingularSystem {
    pub step: usize,
    pub pivot: f64,
}

impl Lu {
    pub fn factor(mut a: CMat) -> Result<Self, SingularSystem> {
        assert_eq!(a.nrows, a.ncols, "LU requires a square matrix");
        let n = a.nrows;
        let mut piv = Vec::with_capacity(n);
        for col in 0..n {
            let (imax, pmax) = (col..n)
                .map(|i| (i, a.at(i, col).norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(SingularSystem {
                    step: col,
                    pivot: pmax,
                });
            }
            if imax != col {
                for j in 0..n {
                    a.data.swap(col * n + j, imax * n + j);
                }
            }
            piv.push(imax);
            let inv = Complex64::new(1.0, 0.0) / a.at(col, col);
            for i in col + 1..n {
                let m = a.at(i, col) * inv;
                *a.at_mut(i, col) = m;
                for j in col + 1..n {
                    let v = a.at(col, j);
                    *a.at_mut(i, j) -= m * v;
                }
            }
        }
        Ok(Self { lu: a, piv })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.nrows;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            x.swap(i, self.piv[i]);
        }
        // forward: L y = P b (unit diagonal)
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu.at(i, j) * x[j];
            }
            x[i] = acc;
        }
        // backward: U x = y
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu.at(i, j) * x[j];
            }
            x[i] = acc / self.lu.at(i, i);
        }
        x
    }
}

/// Singular system of a (possibly rectangular, nrows >= ncols) complex matrix
/// by one-sided Jacobi: returns singular values (descending) and the matching
/// left singular vectors as columns of `u`.
///
/// Columns whose norm underflows are reported with sigma = 0 and a zero
/// vector; callers treat those modes as absent.
pub fn jacobi_svd(a: &CMat) -> (Vec<f64>, CMat) {
    let m = a.nrows;
    let n = a.ncols;
    assert!(m >= n, "jacobi_svd requires nrows >= ncols");
    // column-major working copy for cache-friendly column rotations
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..m).map(|i| a.at(i, j)).collect()).collect();
    let tol = 1e-13;
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut gpp = 0.0;
                let mut gqq = 0.0;
                let mut gpq = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let ap = cols[p][i];
                    let aq = cols[q][i];
                    gpp += ap.norm_sqr();
                    gqq += aq.norm_sqr();
                    gpq += ap.conj() * aq;
                }
                let off = gpq.norm();
                if off <= tol * (gpp * gqq).sqrt() || off == 0.0 {
                    continue;
                }
                rotated = true;
                // absorb the phase of the inner product into column q, then
                // apply the real Jacobi rotation that zeroes the Gram
                // off-diagonal
                let phase = gpq / off;
                let tau = (gqq - gpp) / (2.0 * off);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..m {
                    let ap = cols[p][i];
                    let aq = cols[q][i] * phase.conj();
                    cols[p][i] = c * ap - s * aq;
                    cols[q][i] = s * ap + c * aq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut sigma = Vec::with_capacity(n);
    let mut u = CMat::zeros(m, n);
    for (jj, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 && s.is_finite() {
            for i in 0..m {
                *u.at_mut(i, jj) = cols[j][i] / s;
            }
        }
    }
    (sigma, u)
}

/// Tikhonov-regularized least squares for complex A, complex b with a REAL
/// solution vector: minimizes ||A x - b||^2 + alpha ||x||^2 over real x by the
/// real normal equations (alpha I + Re(A^H A)) x = Re(A^H b).
///
/// Returns the solution and the normal-equation residual norm (reported so
/// callers can assert the <= 1e-10 solve-quality contract).
pub fn tikhonov_solve_real(a: &CMat, b: &[Complex64], alpha: f64) -> (Vec<f64>, f64) {
    assert!(alpha > 0.0);
    let n = a.ncols;
    let mut normal = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for r in 0..a.nrows {
                acc += (a.at(r, i).conj() * a.at(r, j)).re;
            }
            *normal.at_mut(i, j) = Complex64::new(acc, 0.0);
        }
        *normal.at_mut(i, i) += Complex64::new(alpha, 0.0);
    }
    let rhs: Vec<Complex64> = a
        .adjoint_matvec(b)
        .into_iter()
        .map(|z| Complex64::new(z.re, 0.0))
        .collect();
    let lu = Lu::factor(normal.clone()).expect("regularized normal matrix is positive definite");
    let x = lu.solve(&rhs);
    let ax = normal.matvec(&x);
    let resid = ax
        .iter()
        .zip(&rhs)
        .map(|(p, q)| (p - q).norm_sqr())
        .sum::<f64>()
        .sqrt();
    (x.into_iter().map(|z| z.re).collect(), resid)
}
