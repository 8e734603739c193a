//! Cyclic Jacobi eigendecomposition for symmetric matrices.

use super::DenseMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    /// Nonincreasing.
    pub values: Vec<f64>,
    /// Row `k` is the unit eigenvector for `values[k]`.
    pub vectors: DenseMatrix,
}

/// Eigendecomposition of a symmetric matrix. Only the upper triangle is
/// read; callers validate symmetry first.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<SymmetricEigen> {
    if a.is_empty() {
        return Err(Error::Empty("symmetric_eigen"));
    }
    if !a.is_square() {
        return Err(Error::shape("symmetric_eigen", a.shape(), (a.cols(), a.rows())));
    }
    let n = a.rows();
    let mut s = DenseMatrix::from_fn(n, n, |i, j| if i <= j { a.get(i, j) } else { a.get(j, i) });
    // Row k of `v` is eigenvector k.
    let mut v = DenseMatrix::identity(n);
    let scale = s.frobenius_norm();

    let mut converged = n < 2 || scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| s.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = s.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (s.get(p, p), s.get(q, q));
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (skp, skq) = (s.get(k, p), s.get(k, q));
                    s.set(k, p, c * skp - sn * skq);
                    s.set(k, q, sn * skp + c * skq);
                }
                for k in 0..n {
                    let (spk, sqk) = (s.get(p, k), s.get(q, k));
                    s.set(p, k, c * spk - sn * sqk);
                    s.set(q, k, sn * spk + c * sqk);
                }
                s.set(p, q, 0.0);
                s.set(q, p, 0.0);
                for k in 0..n {
                    let (vp, vq) = (v.get(p, k), v.get(q, k));
                    v.set(p, k, c * vp - sn * vq);
                    v.set(q, k, sn * vp + c * vq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::DecompositionFailed { rows: n, cols: n });
    }

    let diag: Vec<f64> = (0..n).map(|i| s.get(i, i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |k, j| v.get(order[k], j));
    Ok(SymmetricEigen { values, vectors })
}

/// Symmetry tolerance shared by covariance and Gram validation.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue relative to the largest one.
pub const PSD_TOL: f64 = 1e-10;

/// Checks symmetry and positive semidefiniteness up to rounding noise and
/// returns the eigendecomposition.
pub fn symmetric_psd_eigen(a: &DenseMatrix) -> Result<SymmetricEigen> {
    if !a.is_square() {
        return Err(Error::shape("symmetric_psd_eigen", a.shape(), (a.cols(), a.rows())));
    }
    let asymmetry = a.relative_asymmetry();
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let eig = symmetric_eigen(a)?;
    let largest = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&smallest) = eig.values.last() {
        if smallest < -PSD_TOL * largest || (largest == 0.0 && smallest < 0.0) {
            return Err(Error::Indefinite { eigenvalue: smallest });
        }
    }
    Ok(eig)
}
