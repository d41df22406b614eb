//! Self-contained dense symmetric eigenvalue and singular value solvers.
//!
//! Eigenvalues come from a cyclic two-sided Jacobi scheme; singular values
//! from a one-sided Jacobi scheme on columns. Both are unconditionally
//! stable on the symmetric matrices this crate produces and keep the crate
//! free of linear-algebra dependencies at the desk scales involved
//! (dimension up to about 2048).

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::{DenseSymmetric, LowerBand3Matrix};

/// Default relative off-diagonal tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Eigenvalues,
    SingularValues,
}

/// Sorted spectrum (ascending); singular values are nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSample {
    values: Vec<f64>,
    kind: SampleKind,
    dim: usize,
}

impl SpectralSample {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SampleKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// CSV export, columns `j,value` (1-based index, ascending).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema vartoeplitz.spectrum.v1\nj,value\n");
        for (j, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{}", j + 1, v);
        }
        out
    }
}

fn off_diagonal_frobenius(a: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            let v = a[p * n + q];
            acc += 2.0 * v * v;
        }
    }
    acc.sqrt()
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.
///
/// Converged once the off-diagonal Frobenius mass drops below
/// `tol * ||S||_F`; errors out after 64 sweeps.
pub fn jacobi_eigenvalues(s: &DenseSymmetric, tol: f64) -> Result<SpectralSample> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("need tol > 0, got {tol}")));
    }
    let n = s.dim();
    let mut a = s.to_dense();
    let fro = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if fro == 0.0 {
        return Ok(SpectralSample { values: vec![0.0; n], kind: SampleKind::Eigenvalues, dim: n });
    }
    for sweep in 0..MAX_SWEEPS {
        if off_diagonal_frobenius(&a, n) <= tol * fro {
            let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            values.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(SpectralSample { values, kind: SampleKind::Eigenvalues, dim: n });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let small = 100.0 * apq.abs();
                // once an element is negligible against both diagonal
                // entries it can be zeroed outright
                if sweep > 4 && app.abs() + small == app.abs() && aqq.abs() + small == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + small == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                let tau = sn / (1.0 + c);
                let shift = t * apq;
                a[p * n + p] = app - shift;
                a[q * n + q] = aqq + shift;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let ajp = a[j * n + p];
                    let ajq = a[j * n + q];
                    let new_p = ajp - sn * (ajq + ajp * tau);
                    let new_q = ajq + sn * (ajp - ajq * tau);
                    a[j * n + p] = new_p;
                    a[p * n + j] = new_p;
                    a[j * n + q] = new_q;
                    a[q * n + j] = new_q;
                }
            }
        }
    }
    Err(Error::NonConvergence(format!(
        "Jacobi eigensolver: off-diagonal mass {:.3e} above {:.3e} after {} sweeps (dim {})",
        off_diagonal_frobenius(&a, n),
        tol * fro,
        MAX_SWEEPS,
        n
    )))
}

/// Singular values by one-sided Jacobi column rotations (equivalent to the
/// eigenvalues of `L^T L` with a square root, without forming the product).
pub fn singular_values(l: &LowerBand3Matrix, tol: f64) -> Result<SpectralSample> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("need tol > 0, got {tol}")));
    }
    let n = l.dim();
    // column-major working copy
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[j * n + i] = l.get(i, j);
        }
    }
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (mut app, mut aqq, mut apq) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let vp = a[p * n + i];
                    let vq = a[q * n + i];
                    app += vp * vp;
                    aqq += vq * vq;
                    apq += vp * vq;
                }
                if app == 0.0 || aqq == 0.0 {
                    continue;
                }
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = {
                    let t = 1.0 / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    if zeta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for i in 0..n {
                    let vp = a[p * n + i];
                    let vq = a[q * n + i];
                    a[p * n + i] = c * vp - sn * vq;
                    a[q * n + i] = sn * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "one-sided Jacobi: columns not orthogonal after {MAX_SWEEPS} sweeps (dim {n})"
        )));
    }
    let mut values: Vec<f64> = (0..n)
        .map(|j| a[j * n..(j + 1) * n].iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(SpectralSample { values, kind: SampleKind::SingularValues, dim: n })
}

/// Smallest and largest eigenvalue.
pub fn min_max_eig(s: &DenseSymmetric) -> Result<(f64, f64)> {
    let sample = jacobi_eigenvalues(s, DEFAULT_TOL)?;
    Ok((sample.min(), sample.max()))
}

/// Positive definiteness through the smallest eigenvalue.
pub fn is_positive_definite(s: &DenseSymmetric) -> Result<bool> {
    Ok(min_max_eig(s)?.0 > 0.0)
}

/// Least-squares slope of `log(error)` against `log(n)`, sign-flipped so a
/// second-order decay reports `2.0`.
pub fn fit_convergence_order(ns: &[usize], errors: &[f64]) -> Result<f64> {
    if ns.len() != errors.len() {
        return Err(Error::DimensionMismatch { expected: ns.len(), got: errors.len() });
    }
    if ns.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 points to fit an order, got {}",
            ns.len()
        )));
    }
    for &e in errors {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::InvalidArgument(format!("errors must be positive, got {e}")));
        }
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|&e| e.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    Ok(-num / den)
}
