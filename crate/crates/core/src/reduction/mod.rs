//! Hypotheses `H theta = y` and their reduction to compact companions.
//!
//! [`reduce`] replaces `(H, y)` by `(L, y~)` with `rank(H)` rows such that
//! every Anova-type statistic is preserved: `L` is a compact root of
//! `H^T H` and `y~` solves `L^T y~ = H^T y`.

mod equivalence;
mod root;

pub use equivalence::{check_equivalence, same_solution_set, EquivalenceReport, Residuals};
pub use root::{
    canonical_projection, canonical_reduce, compact_root, compact_root_of_hypothesis_matrix,
    kronecker_reduce, reduce_homogeneous, CANONICAL_GRID, SIGN_THRESHOLD,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, least_squares, norm, numerical_rank, svd, DenseMatrix};

/// Relative tolerance for `y` lying in the column space of `H`.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// The null hypothesis `H theta = y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHypothesis")]
pub struct Hypothesis {
    #[serde(rename = "H", with = "matrix_rows")]
    h: DenseMatrix,
    y: Vec<f64>,
}

impl Hypothesis {
    pub fn new(h: DenseMatrix, y: Vec<f64>) -> Result<Self> {
        if h.rows() == 0 || h.cols() == 0 {
            return Err(Error::Hypothesis(format!(
                "hypothesis matrix must be nonempty, got {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        if h.rows() != y.len() {
            return Err(Error::shape("Hypothesis: H vs y", h.shape(), (y.len(), 1)));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Hypothesis("y has non-finite entries".into()));
        }
        Ok(Self { h, y })
    }

    /// `H theta = 0`.
    pub fn homogeneous(h: DenseMatrix) -> Result<Self> {
        let m = h.rows();
        Self::new(h, vec![0.0; m])
    }

    pub fn h(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn d(&self) -> usize {
        self.h.cols()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.y.iter().all(|&v| v == 0.0)
    }

    pub fn rank(&self) -> Result<usize> {
        let dec = svd(&self.h)?;
        Ok(numerical_rank(&dec.singular_values, self.m(), self.d()))
    }

    /// Distance of `y` from the column space of `H`, and the tolerance it is
    /// compared against.
    ///
    /// Equivalent to `rank([H | y]) == rank(H)`, but with the tolerance set
    /// relative to `||y|| + sigma_1 ||H^+ y||` because `y` usually carries
    /// the rounding error of whatever produced it.
    pub fn consistency_residual(&self) -> Result<(f64, f64)> {
        let dec = svd(&self.h)?;
        let sigma_max = dec.singular_values[0];
        let ls = least_squares(&self.h, &self.y)?;
        let scale = norm(&self.y) + sigma_max * norm(&ls.solution);
        Ok((ls.residual_norm, CONSISTENCY_TOL * scale))
    }

    /// Whether the solution set `{theta : H theta = y}` is non-empty.
    pub fn is_consistent(&self) -> Result<bool> {
        let (residual, tol) = self.consistency_residual()?;
        Ok(residual <= tol)
    }

    pub(crate) fn ensure_consistent(&self) -> Result<()> {
        let (residual, tol) = self.consistency_residual()?;
        if residual > tol {
            return Err(Error::EmptySolutionSet { residual });
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct RawHypothesis {
    #[serde(rename = "H", with = "matrix_rows")]
    h: DenseMatrix,
    y: Vec<f64>,
}

impl TryFrom<RawHypothesis> for Hypothesis {
    type Error = Error;

    fn try_from(raw: RawHypothesis) -> Result<Self> {
        Hypothesis::new(raw.h, raw.y)
    }
}

/// A compact companion `(L, y~)` of a source hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedHypothesis {
    #[serde(rename = "L", with = "matrix_rows")]
    pub l: DenseMatrix,
    pub y_tilde: Vec<f64>,
    /// Scale `a` folded into `l` and `y_tilde` as `sqrt(a)`; 1 when unused.
    pub scale_a: f64,
    /// `||y~_0||^2 - ||y||^2` for the unscaled pair.
    pub shift_delta: f64,
}

impl ReducedHypothesis {
    pub fn ell(&self) -> usize {
        self.l.rows()
    }

    pub fn as_hypothesis(&self) -> Result<Hypothesis> {
        Hypothesis::new(self.l.clone(), self.y_tilde.clone())
    }
}

/// The unscaled companion `(L_0, y~_0)`: compact root of `H^T H` and the
/// minimum-norm solution of `L_0^T y~ = H^T y`.
///
/// Consistency is not required here; for any `y` the two statistics differ
/// by the constant `||y~_0||^2 - ||y||^2`.
pub fn unscaled_companion(h: &Hypothesis) -> Result<(DenseMatrix, Vec<f64>)> {
    let l0 = compact_root_of_hypothesis_matrix(h.h())?;
    if l0.rows() == 0 {
        return Ok((l0, Vec::new()));
    }
    let rhs = h.h().tr_matvec(h.y())?;
    let y0 = least_squares(&l0.transpose(), &rhs)?.solution;
    Ok((l0, y0))
}

/// Reduces a consistent hypothesis to `rank(H)` rows, preserving `ats_s`
/// and `ats_f` for every `x` and every covariance.
///
/// `L = sqrt(a) L_0` and `y~ = sqrt(a) y~_0` with `sqrt(a) = ||y|| / ||y~_0||`;
/// `a = 1` for homogeneous hypotheses.
pub fn reduce(h: &Hypothesis) -> Result<ReducedHypothesis> {
    h.ensure_consistent()?;
    let (l0, y0) = unscaled_companion(h)?;
    let y_norm = norm(h.y());
    let y0_norm = norm(&y0);
    let shift_delta = dot(&y0, &y0) - dot(h.y(), h.y());

    if y_norm == 0.0 {
        let ell = l0.rows();
        return Ok(ReducedHypothesis {
            l: l0,
            y_tilde: vec![0.0; ell],
            scale_a: 1.0,
            shift_delta: 0.0,
        });
    }
    if y0_norm <= 1e-12 * y_norm {
        // y is orthogonal to the column space of H.
        return Err(Error::EmptySolutionSet { residual: y_norm });
    }
    let sqrt_a = y_norm / y0_norm;
    Ok(ReducedHypothesis {
        l: l0.scale(sqrt_a),
        y_tilde: y0.iter().map(|v| v * sqrt_a).collect(),
        scale_a: sqrt_a * sqrt_a,
        shift_delta,
    })
}

/// Serde adapter: a matrix as an array of row arrays.
pub(crate) mod matrix_rows {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::matrix::DenseMatrix;

    pub fn serialize<S: Serializer>(m: &DenseMatrix, s: S) -> Result<S::Ok, S::Error> {
        m.to_rows().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DenseMatrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        DenseMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}
