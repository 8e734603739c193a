//! Anova-type quadratic forms.
//!
//! * `ats(x, H, y)   = ||Hx - y||^2`
//! * `ats_s(x, H, y) = ats / tr(H Sigma H^T)`
//! * `ats_f(x, H, y) = ats_s * tr(M)^2 / tr(M^2)` with `M = H Sigma H^T`
//!
//! [`AtsContext`] validates `Sigma` and caches `M` and its traces once, so
//! repeated evaluation costs one `m x d` product per vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, symmetric_psd_eigen, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Ats,
    AtsS,
    AtsF,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Ats, Variant::AtsS, Variant::AtsF];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Ats => "ats",
            Variant::AtsS => "ats_s",
            Variant::AtsF => "ats_f",
        }
    }

    pub fn needs_covariance(self) -> bool {
        !matches!(self, Variant::Ats)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ats" => Ok(Variant::Ats),
            "ats_s" => Ok(Variant::AtsS),
            "ats_f" => Ok(Variant::AtsF),
            other => Err(Error::InvalidSetting(format!("unknown variant `{other}`"))),
        }
    }
}

/// `||Hx - y||^2`.
pub fn ats(x: &[f64], h: &DenseMatrix, y: &[f64]) -> Result<f64> {
    check_shapes(x, h, y)?;
    Ok(residual_sq(x, h, y))
}

fn check_shapes(x: &[f64], h: &DenseMatrix, y: &[f64]) -> Result<()> {
    if h.cols() != x.len() {
        return Err(Error::shape("ats: H vs x", h.shape(), (x.len(), 1)));
    }
    if h.rows() != y.len() {
        return Err(Error::shape("ats: H vs y", h.shape(), (y.len(), 1)));
    }
    Ok(())
}

#[inline]
fn residual_sq(x: &[f64], h: &DenseMatrix, y: &[f64]) -> f64 {
    h.row_iter()
        .zip(y)
        .map(|(row, &yi)| {
            let r = dot(row, x) - yi;
            r * r
        })
        .sum()
}

/// `tr(H Sigma H^T)` computed row by row, `O(m d^2)`, without forming the
/// `m x m` product.
pub fn standardizing_trace(h: &DenseMatrix, sigma: &DenseMatrix) -> f64 {
    h.row_iter()
        .map(|row| {
            sigma
                .row_iter()
                .zip(row)
                .map(|(srow, &hi)| hi * dot(srow, row))
                .sum::<f64>()
        })
        .sum()
}

/// Threshold under which `tr(H Sigma H^T)` is treated as zero:
/// `1e-12 * d * max|Sigma_ij| * (max row norm of H)^2`.
pub fn trace_threshold(h: &DenseMatrix, sigma: &DenseMatrix) -> f64 {
    1e-12 * h.cols() as f64 * sigma.max_abs() * h.max_row_norm().powi(2)
}

/// `ats_s` recomputing the standardizing trace on every call.
///
/// This is the cost model of a resampling loop in which `Sigma` changes
/// between replicates; `Sigma` is not validated here.
pub fn ats_s_direct(x: &[f64], h: &DenseMatrix, y: &[f64], sigma: &DenseMatrix) -> Result<f64> {
    check_shapes(x, h, y)?;
    if sigma.shape() != (h.cols(), h.cols()) {
        return Err(Error::shape("ats_s: H vs Sigma", h.shape(), sigma.shape()));
    }
    let trace = standardizing_trace(h, sigma);
    let threshold = trace_threshold(h, sigma);
    if trace.is_nan() || trace <= threshold {
        return Err(Error::DegenerateStandardization {
            quantity: "tr(H Sigma H^T)",
            value: trace,
            threshold,
        });
    }
    Ok(residual_sq(x, h, y) / trace)
}

#[derive(Clone, Debug)]
struct Standardization {
    trace_m: f64,
    trace_m2: f64,
    threshold: f64,
}

/// A hypothesis `(H, y)` with an optional covariance `Sigma`, ready for
/// repeated evaluation.
#[derive(Clone, Debug)]
pub struct AtsContext {
    h: DenseMatrix,
    y: Vec<f64>,
    sigma: Option<DenseMatrix>,
    m: Option<DenseMatrix>,
    standardization: Option<Standardization>,
}

impl AtsContext {
    /// Validates shapes and, when given, that `Sigma` is symmetric PSD up to
    /// `1e-10` relative noise. `M = H Sigma H^T` and its traces are formed
    /// here once.
    pub fn new(h: DenseMatrix, y: Vec<f64>, sigma: Option<DenseMatrix>) -> Result<Self> {
        if h.rows() != y.len() {
            return Err(Error::shape("AtsContext: H vs y", h.shape(), (y.len(), 1)));
        }
        let (m, standardization) = match &sigma {
            None => (None, None),
            Some(s) => {
                if s.shape() != (h.cols(), h.cols()) {
                    return Err(Error::shape("AtsContext: H vs Sigma", h.shape(), s.shape()));
                }
                symmetric_psd_eigen(s)?;
                let hs = h.matmul(s)?;
                let m = hs.matmul(&h.transpose())?;
                let trace_m = m.trace();
                // M is symmetric, so tr(M^2) = ||M||_F^2.
                let trace_m2: f64 = m.as_slice().iter().map(|v| v * v).sum();
                let threshold = trace_threshold(&h, s);
                (
                    Some(m),
                    Some(Standardization {
                        trace_m,
                        trace_m2,
                        threshold,
                    }),
                )
            }
        };
        Ok(Self {
            h,
            y,
            sigma,
            m,
            standardization,
        })
    }

    pub fn homogeneous(h: DenseMatrix, sigma: Option<DenseMatrix>) -> Result<Self> {
        let m = h.rows();
        Self::new(h, vec![0.0; m], sigma)
    }

    pub fn h(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn sigma(&self) -> Option<&DenseMatrix> {
        self.sigma.as_ref()
    }

    /// `H Sigma H^T`, when a covariance was supplied.
    pub fn m(&self) -> Option<&DenseMatrix> {
        self.m.as_ref()
    }

    pub fn d(&self) -> usize {
        self.h.cols()
    }

    pub fn trace_m(&self) -> Option<f64> {
        self.standardization.as_ref().map(|s| s.trace_m)
    }

    pub fn trace_m2(&self) -> Option<f64> {
        self.standardization.as_ref().map(|s| s.trace_m2)
    }

    pub fn ats(&self, x: &[f64]) -> Result<f64> {
        ats(x, &self.h, &self.y)
    }

    pub fn ats_s(&self, x: &[f64]) -> Result<f64> {
        let trace = self.checked_trace("ats_s")?;
        Ok(self.ats(x)? / trace)
    }

    pub fn ats_f(&self, x: &[f64]) -> Result<f64> {
        let factor = self.f_factor()?;
        Ok(self.ats_s(x)? * factor)
    }

    pub fn evaluate(&self, x: &[f64], variant: Variant) -> Result<f64> {
        match variant {
            Variant::Ats => self.ats(x),
            Variant::AtsS => self.ats_s(x),
            Variant::AtsF => self.ats_f(x),
        }
    }

    /// Evaluates every vector in `xs`. Traces are checked once up front and
    /// each element is computed exactly as [`AtsContext::evaluate`] would.
    pub fn batch_eval<X: AsRef<[f64]>>(&self, xs: &[X], variant: Variant) -> Result<Vec<f64>> {
        match variant {
            Variant::Ats => {}
            Variant::AtsS => {
                self.checked_trace("ats_s")?;
            }
            Variant::AtsF => {
                self.f_factor()?;
            }
        }
        xs.iter().map(|x| self.evaluate(x.as_ref(), variant)).collect()
    }

    fn checked_trace(&self, name: &'static str) -> Result<f64> {
        let s = self
            .standardization
            .as_ref()
            .ok_or(Error::MissingCovariance(name))?;
        if s.trace_m.is_nan() || s.trace_m <= s.threshold {
            return Err(Error::DegenerateStandardization {
                quantity: "tr(H Sigma H^T)",
                value: s.trace_m,
                threshold: s.threshold,
            });
        }
        Ok(s.trace_m)
    }

    /// `tr(M)^2 / tr(M^2)`.
    fn f_factor(&self) -> Result<f64> {
        let trace = self.checked_trace("ats_f")?;
        let s = self.standardization.as_ref().expect("checked above");
        let threshold = s.threshold * s.threshold;
        if s.trace_m2.is_nan() || s.trace_m2 <= threshold {
            return Err(Error::DegenerateStandardization {
                quantity: "tr((H Sigma H^T)^2)",
                value: s.trace_m2,
                threshold,
            });
        }
        Ok(trace * trace / s.trace_m2)
    }
}
