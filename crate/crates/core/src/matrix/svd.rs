//! One-sided Jacobi SVD.
//!
//! Columns of a working copy of `A` are orthogonalized by plane rotations
//! applied from the right; the accumulated rotations form `V`, the column
//! norms are the singular values and the normalized columns give `U`. The
//! method works on `A` directly, so small singular values are resolved to
//! roughly machine precision relative to `sigma_1` without squaring the
//! condition number. Wide inputs are handled through their transpose.

use super::{dot, DenseMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `m x m` orthogonal.
    pub u: DenseMatrix,
    /// Nonincreasing, length `min(m, d)`.
    pub singular_values: Vec<f64>,
    /// `d x d` orthogonal; row `i` is the i-th right singular vector.
    pub vt: DenseMatrix,
}

impl SvdResult {
    /// `u * diag(s) * vt`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, d) = (self.u.rows(), self.vt.cols());
        DenseMatrix::from_fn(m, d, |i, j| {
            self.singular_values
                .iter()
                .enumerate()
                .map(|(k, s)| self.u.get(i, k) * s * self.vt.get(k, j))
                .sum()
        })
    }
}

pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    if a.is_empty() {
        return Err(Error::Empty("svd"));
    }
    if a.rows() >= a.cols() {
        let (u, s, v) = jacobi_tall(a)?;
        Ok(SvdResult {
            u,
            singular_values: s,
            vt: v.transpose(),
        })
    } else {
        // A^T = U' S V'^T  =>  A = V' S U'^T
        let (u_t, s, v_t) = jacobi_tall(&a.transpose())?;
        Ok(SvdResult {
            u: v_t,
            singular_values: s,
            vt: u_t.transpose(),
        })
    }
}

/// Returns `(U, s, V)` with `U` m x m and `V` n x n for `m >= n`.
fn jacobi_tall(a: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    let (m, n) = a.shape();
    // Row k of `w` is column k of the working matrix A*V; row k of `v` is
    // column k of V.
    let mut w = a.transpose();
    let mut v = DenseMatrix::identity(n);
    let tol = f64::EPSILON * m as f64;
    // Columns shorter than eps * ||A||_F are rounding noise; they lie below
    // any rank tolerance and rotating them against each other can cycle.
    let negligible = f64::EPSILON * a.frobenius_norm();
    let negligible_sq = negligible * negligible;

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(w.row(p), w.row(p));
                let beta = dot(w.row(q), w.row(q));
                let gamma = dot(w.row(p), w.row(q));
                if alpha <= negligible_sq || beta <= negligible_sq || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut w, p, q, c, s);
                rotate_rows(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::DecompositionFailed { rows: m, cols: n });
    }

    let norms: Vec<f64> = w.row_iter().map(super::norm).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps ties in index order so the output is deterministic.
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut singular_values = Vec::with_capacity(n);
    let mut v_sorted = DenseMatrix::zeros(n, n);
    for (k, &idx) in order.iter().enumerate() {
        let sigma = norms[idx];
        singular_values.push(sigma);
        for (r, &val) in v.row(idx).iter().enumerate() {
            v_sorted.set(r, k, val);
        }
        // Columns are sorted, so every negligible column comes last and is
        // replaced by the completion below.
        if sigma > negligible && basis.len() == k {
            basis.push(w.row(idx).iter().map(|x| x / sigma).collect());
        }
    }
    complete_basis(&mut basis, m);

    let u = DenseMatrix::from_fn(m, m, |i, j| basis[j][i]);
    Ok((u, singular_values, v_sorted))
}

fn rotate_rows(mat: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = mat.cols();
    let (head, tail) = mat_rows_pair(mat, p, q, cols);
    for (x, y) in head.iter_mut().zip(tail.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

fn mat_rows_pair(mat: &mut DenseMatrix, p: usize, q: usize, cols: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let data = &mut mat.data;
    let (a, b) = data.split_at_mut(q * cols);
    (&mut a[p * cols..(p + 1) * cols], &mut b[..cols])
}

/// Extends an orthonormal set of vectors in R^m to a full basis by
/// Gram-Schmidt on the standard basis vectors, taken in index order.
fn complete_basis(basis: &mut Vec<Vec<f64>>, m: usize) {
    let threshold = 1.0 / (2.0 * m as f64).sqrt();
    let mut k = 0;
    while basis.len() < m && k < m {
        let mut cand = vec![0.0; m];
        cand[k] = 1.0;
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = dot(&cand, b);
                for (c, bi) in cand.iter_mut().zip(b) {
                    *c -= proj * bi;
                }
            }
        }
        let len = super::norm(&cand);
        if len > threshold {
            cand.iter_mut().for_each(|c| *c /= len);
            basis.push(cand);
        }
        k += 1;
    }
    debug_assert_eq!(basis.len(), m);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonality_error(q: &DenseMatrix) -> f64 {
        let g = q.transpose().matmul(q).unwrap();
        let n = g.rows();
        g.sub(&DenseMatrix::identity(n)).unwrap().frobenius_norm() / (n as f64).sqrt()
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let r = svd(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(r.singular_values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_with_zero() {
        let r = svd(&DenseMatrix::diag(&[3.0, 0.0])).unwrap();
        assert_eq!(r.singular_values, vec![3.0, 0.0]);
        assert!(orthogonality_error(&r.u) < 1e-14);
    }

    #[test]
    fn pairwise_difference_matrix() {
        // H2 H2^T = [[2,-1],[-1,2]] has eigenvalues 3 and 1.
        let h2 = DenseMatrix::from_rows(&[[1.0, -1.0, 0.0], [0.0, 1.0, -1.0]]).unwrap();
        let r = svd(&h2).unwrap();
        assert!((r.singular_values[0] - 3f64.sqrt()).abs() < 1e-14);
        assert!((r.singular_values[1] - 1.0).abs() < 1e-14);
        assert_eq!(r.u.shape(), (2, 2));
        assert_eq!(r.vt.shape(), (3, 3));
        assert!(orthogonality_error(&r.vt.transpose()) < 1e-14);
        let rec = r.reconstruct();
        assert!(rec.sub(&h2).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn rank_deficient_tall_matrix_gets_full_u() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0], [0.0, 0.0]]).unwrap();
        let r = svd(&a).unwrap();
        assert_eq!(r.u.shape(), (4, 4));
        assert!(orthogonality_error(&r.u) < 1e-13);
        assert!(r.singular_values[1] < 1e-14);
        assert!(r.reconstruct().sub(&a).unwrap().frobenius_norm() < 1e-13);
    }

    #[test]
    fn zero_matrix() {
        let r = svd(&DenseMatrix::zeros(2, 3)).unwrap();
        assert_eq!(r.singular_values, vec![0.0, 0.0]);
        assert!(orthogonality_error(&r.u) < 1e-15);
        assert!(orthogonality_error(&r.vt) < 1e-15);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(svd(&DenseMatrix::zeros(0, 3)), Err(Error::Empty(_))));
    }
}
