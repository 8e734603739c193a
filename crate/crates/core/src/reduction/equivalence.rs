//! Deciding whether two formulations `(H, y)` and `(L, y~)` give the same
//! statistics.
//!
//! With `a = tr(H^T H) / tr(L^T L)` the certificate conditions are
//!
//! * gram:  `a L^T L = H^T H`
//! * cross: `a L^T y~ = H^T y`
//! * norm:  `||y|| = sqrt(a) ||y~||`
//!
//! `ats_s` and `ats_f` agree for all `x` iff all three hold; plain `ats`
//! additionally needs `a = 1`, and with only gram and cross at `a = 1` the
//! two `ats` differ by the constant `||y~||^2 - ||y||^2`.

use serde::Serialize;

use super::Hypothesis;
use crate::error::{Error, Result};
use crate::matrix::{dot, least_squares, norm, numerical_rank, svd, DenseMatrix};

/// Relative tolerance of the certificate conditions.
pub const EQUIVALENCE_TOL: f64 = 1e-9;
/// Tolerance of the cross-substitution and row-space checks in
/// [`same_solution_set`].
pub const SOLUTION_SET_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residuals {
    /// `||a L^T L - H^T H||_F / (1 + ||H^T H||_F)`
    pub gram: f64,
    /// `||a L^T y~ - H^T y|| / (1 + ||H^T y||)`
    pub cross: f64,
    /// `| ||y|| - sqrt(a) ||y~|| | / (1 + ||y||)`
    pub norm: f64,
    /// `|a - 1|`
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub same_gram: bool,
    /// The scale `a` when the Gram matrices are proportional.
    pub witness_a: Option<f64>,
    pub same_cross: bool,
    pub same_norm: bool,
    /// Gram and cross conditions hold, which certifies equal solution sets
    /// for consistent hypotheses.
    pub same_hypothesis_certified: bool,
    /// Direct comparison of the solution sets; `None` when either
    /// hypothesis is inconsistent.
    pub same_solution_set: Option<bool>,
    pub ats_equal: bool,
    pub ats_s_equal: bool,
    pub ats_f_equal: bool,
    pub ats_shifted_equal: bool,
    /// `||y~||^2 - ||y||^2`
    pub shift_delta: f64,
    pub residuals: Residuals,
}

pub fn check_equivalence(h1: &Hypothesis, h2: &Hypothesis) -> Result<EquivalenceReport> {
    if h1.d() != h2.d() {
        return Err(Error::shape("check_equivalence", h1.h().shape(), h2.h().shape()));
    }
    let (h, y) = (h1.h(), h1.y());
    let (l, yt) = (h2.h(), h2.y());

    let gram_h = h.gram();
    let gram_l = l.gram();
    let (tr_h, tr_l) = (gram_h.trace(), gram_l.trace());
    let a_hat = match (tr_h == 0.0, tr_l == 0.0) {
        (true, true) => Some(1.0),
        (false, false) => Some(tr_h / tr_l),
        _ => None,
    };
    let a = a_hat.unwrap_or(1.0);

    let gram = gram_l.scale(a).sub(&gram_h)?.frobenius_norm() / (1.0 + gram_h.frobenius_norm());
    let cross_h = h.tr_matvec(y)?;
    let cross_l = l.tr_matvec(yt)?;
    let cross_gap: Vec<f64> = cross_l.iter().zip(&cross_h).map(|(cl, ch)| a * cl - ch).collect();
    let cross = norm(&cross_gap) / (1.0 + norm(&cross_h));
    let (y_norm, yt_norm) = (norm(y), norm(yt));
    let norm_gap = (y_norm - a.sqrt() * yt_norm).abs() / (1.0 + y_norm);
    let residuals = Residuals {
        gram,
        cross,
        norm: norm_gap,
        scale: (a - 1.0).abs(),
    };

    let same_gram = a_hat.is_some() && gram <= EQUIVALENCE_TOL;
    let same_cross = cross <= EQUIVALENCE_TOL;
    let same_norm = norm_gap <= EQUIVALENCE_TOL;
    let unit_scale = residuals.scale <= EQUIVALENCE_TOL;
    let ats_s_equal = same_gram && same_cross && same_norm;

    let same_solution_set = if h1.is_consistent()? && h2.is_consistent()? {
        Some(same_solution_set(h1, h2)?)
    } else {
        None
    };

    Ok(EquivalenceReport {
        same_gram,
        witness_a: a_hat.filter(|_| same_gram),
        same_cross,
        same_norm,
        same_hypothesis_certified: same_gram && same_cross,
        same_solution_set,
        ats_equal: ats_s_equal && unit_scale,
        ats_s_equal,
        ats_f_equal: ats_s_equal,
        ats_shifted_equal: same_gram && same_cross && unit_scale,
        shift_delta: dot(yt, yt) - dot(y, y),
        residuals,
    })
}

/// Orthogonal projector onto the row space together with the rank.
fn row_space(h: &DenseMatrix) -> Result<(DenseMatrix, usize)> {
    let dec = svd(h)?;
    let r = numerical_rank(&dec.singular_values, h.rows(), h.cols());
    let d = h.cols();
    let p = DenseMatrix::from_fn(d, d, |i, j| {
        (0..r).map(|k| dec.vt.get(k, i) * dec.vt.get(k, j)).sum()
    });
    Ok((p, r))
}

/// `||A - A P||_F <= tol * ||A||_F`: the rows of `A` lie in the range of `P`.
fn rows_in_space(a: &DenseMatrix, p: &DenseMatrix) -> Result<bool> {
    let gap = a.sub(&a.matmul(p)?)?.frobenius_norm();
    Ok(gap <= SOLUTION_SET_TOL * a.frobenius_norm())
}

/// Whether `{theta : H1 theta = y1}` and `{theta : H2 theta = y2}` coincide.
///
/// The row spaces must agree (equal rank, each set of rows inside the
/// other's row space) and the minimum-norm particular solution of each
/// system must solve the other.
pub fn same_solution_set(h1: &Hypothesis, h2: &Hypothesis) -> Result<bool> {
    if h1.d() != h2.d() {
        return Err(Error::shape("same_solution_set", h1.h().shape(), h2.h().shape()));
    }
    h1.ensure_consistent()?;
    h2.ensure_consistent()?;

    let (p1, r1) = row_space(h1.h())?;
    let (p2, r2) = row_space(h2.h())?;
    if r1 != r2 || !rows_in_space(h2.h(), &p1)? || !rows_in_space(h1.h(), &p2)? {
        return Ok(false);
    }

    let solves = |from: &Hypothesis, to: &Hypothesis| -> Result<bool> {
        let theta = least_squares(from.h(), from.y())?.solution;
        let fitted = to.h().matvec(&theta)?;
        let gap: Vec<f64> = fitted.iter().zip(to.y()).map(|(f, y)| f - y).collect();
        Ok(norm(&gap) <= SOLUTION_SET_TOL * (1.0 + norm(to.y())))
    };
    Ok(solves(h1, h2)? && solves(h2, h1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> DenseMatrix {
        DenseMatrix::from_rows(&[[1.0, -1.0, 0.0], [0.0, 1.0, -1.0], [1.0, 0.0, -1.0]]).unwrap()
    }

    fn h2() -> DenseMatrix {
        DenseMatrix::from_rows(&[[1.0, -1.0, 0.0], [0.0, 1.0, -1.0]]).unwrap()
    }

    #[test]
    fn worked_example_same_hypothesis_different_statistics() {
        let a = Hypothesis::homogeneous(h1()).unwrap();
        let b = Hypothesis::homogeneous(h2()).unwrap();
        let r = check_equivalence(&a, &b).unwrap();
        assert_eq!(r.same_solution_set, Some(true));
        assert!(!r.same_gram);
        assert_eq!(r.witness_a, None);
        assert!(!r.ats_equal && !r.ats_s_equal && !r.ats_f_equal && !r.ats_shifted_equal);
    }

    #[test]
    fn scaled_pair_is_equivalent_for_standardized_only() {
        let a = Hypothesis::new(DenseMatrix::identity(2).scale(2.0), vec![2.0, 2.0]).unwrap();
        let b = Hypothesis::new(DenseMatrix::identity(2), vec![1.0, 1.0]).unwrap();
        let r = check_equivalence(&a, &b).unwrap();
        assert_eq!(r.witness_a, Some(4.0));
        assert!(r.same_gram && r.same_cross && r.same_norm);
        assert!(r.ats_s_equal && r.ats_f_equal);
        assert!(!r.ats_equal && !r.ats_shifted_equal);
        assert!(r.same_hypothesis_certified);
    }

    #[test]
    fn reflexive() {
        let a = Hypothesis::new(h1(), vec![1.0, 2.0, 3.0]).unwrap();
        let r = check_equivalence(&a, &a).unwrap();
        assert_eq!(r.witness_a, Some(1.0));
        assert!(r.ats_equal && r.ats_s_equal && r.ats_f_equal && r.ats_shifted_equal);
        assert_eq!(r.shift_delta, 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Hypothesis::homogeneous(h1()).unwrap();
        let b = Hypothesis::homogeneous(DenseMatrix::identity(2)).unwrap();
        assert!(matches!(check_equivalence(&a, &b), Err(Error::Shape { .. })));
    }

    #[test]
    fn solution_set_examples() {
        let a = Hypothesis::homogeneous(h1()).unwrap();
        let b = Hypothesis::homogeneous(h2()).unwrap();
        let c = Hypothesis::homogeneous(DenseMatrix::identity(3)).unwrap();
        assert!(same_solution_set(&a, &b).unwrap());
        assert!(!same_solution_set(&b, &c).unwrap());

        // Same row space, different offsets.
        let d = Hypothesis::new(h2(), vec![1.0, 0.0]).unwrap();
        assert!(!same_solution_set(&b, &d).unwrap());

        let bad = Hypothesis::new(h1(), vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(same_solution_set(&a, &bad), Err(Error::EmptySolutionSet { .. })));
    }

    #[test]
    fn inconsistent_inputs_leave_solution_set_unknown() {
        let a = Hypothesis::new(h1(), vec![1.0, 1.0, 1.0]).unwrap();
        let r = check_equivalence(&a, &a).unwrap();
        assert_eq!(r.same_solution_set, None);
    }
}
