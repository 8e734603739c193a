use super::{norm, svd, DenseMatrix};
use crate::error::{Error, Result};

/// `max(m, d) * eps * sigma_1`, the cutoff below which a singular value
/// counts as zero.
pub fn rank_tolerance(singular_values: &[f64], m: usize, d: usize) -> f64 {
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    m.max(d) as f64 * f64::EPSILON * sigma_max
}

/// Number of singular values strictly above [`rank_tolerance`].
pub fn numerical_rank(singular_values: &[f64], m: usize, d: usize) -> usize {
    let tau = rank_tolerance(singular_values, m, d);
    singular_values.iter().filter(|&&s| s > tau).count()
}

pub fn kronecker(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("kronecker"));
    }
    let overflow = || {
        Error::SizeOverflow(format!(
            "kronecker of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        ))
    };
    let rows = a.rows().checked_mul(b.rows()).ok_or_else(overflow)?;
    let cols = a.cols().checked_mul(b.cols()).ok_or_else(overflow)?;
    rows.checked_mul(cols).ok_or_else(overflow)?;

    let mut out = DenseMatrix::zeros(rows, cols);
    for ia in 0..a.rows() {
        for ib in 0..b.rows() {
            let out_row = out.row_mut(ia * b.rows() + ib);
            for (ja, &av) in a.row(ia).iter().enumerate() {
                let block = &mut out_row[ja * b.cols()..(ja + 1) * b.cols()];
                for (o, &bv) in block.iter_mut().zip(b.row(ib)) {
                    *o = av * bv;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    pub residual_norm: f64,
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `A x = b` through the SVD
/// pseudoinverse. Inconsistent systems are reported through
/// `residual_norm`, not as an error.
pub fn least_squares(a: &DenseMatrix, b: &[f64]) -> Result<LeastSquares> {
    if a.rows() != b.len() {
        return Err(Error::shape("least_squares", a.shape(), (b.len(), 1)));
    }
    let dec = svd(a)?;
    let rank = numerical_rank(&dec.singular_values, a.rows(), a.cols());
    let mut solution = vec![0.0; a.cols()];
    for k in 0..rank {
        let coeff: f64 = (0..a.rows()).map(|i| dec.u.get(i, k) * b[i]).sum::<f64>()
            / dec.singular_values[k];
        for (x, &v) in solution.iter_mut().zip(dec.vt.row(k)) {
            *x += coeff * v;
        }
    }
    let fitted = a.matvec(&solution)?;
    let residual: Vec<f64> = fitted.iter().zip(b).map(|(f, y)| f - y).collect();
    Ok(LeastSquares {
        residual_norm: norm(&residual),
        solution,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&[3f64.sqrt(), 1.0], 2, 3), 2);
        assert_eq!(numerical_rank(&[1.0, 1.0, 0.0], 3, 3), 2);
        assert_eq!(numerical_rank(&[0.0, 0.0], 2, 5), 0);
        assert_eq!(numerical_rank(&[], 0, 0), 0);
        // Just above / below the cutoff.
        let tau = rank_tolerance(&[1.0], 4, 4);
        assert_eq!(numerical_rank(&[1.0, 2.0 * tau], 4, 4), 2);
        assert_eq!(numerical_rank(&[1.0, 0.5 * tau], 4, 4), 1);
    }

    #[test]
    fn kronecker_identity() {
        let k = kronecker(&DenseMatrix::identity(2), &DenseMatrix::identity(3)).unwrap();
        assert_eq!(k, DenseMatrix::identity(6));
    }

    #[test]
    fn kronecker_centering_with_ones() {
        let p2 = DenseMatrix::from_rows(&[[0.5, -0.5], [-0.5, 0.5]]).unwrap();
        let j2 = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let k = kronecker(&p2, &j2).unwrap();
        let expected = DenseMatrix::from_rows(&[
            [0.5, 0.5, -0.5, -0.5],
            [0.5, 0.5, -0.5, -0.5],
            [-0.5, -0.5, 0.5, 0.5],
            [-0.5, -0.5, 0.5, 0.5],
        ])
        .unwrap();
        assert_eq!(k, expected);
    }

    #[test]
    fn kronecker_scalar_and_errors() {
        let b = DenseMatrix::from_rows(&[[1.0, -2.0, 3.0]]).unwrap();
        let k = kronecker(&DenseMatrix::row_vector(&[2.0]), &b).unwrap();
        assert_eq!(k, b.scale(2.0));
        assert!(kronecker(&DenseMatrix::zeros(0, 2), &b).is_err());
    }

    #[test]
    fn least_squares_examples() {
        let r = least_squares(&DenseMatrix::identity(2), &[1.0, 2.0]).unwrap();
        assert!((r.solution[0] - 1.0).abs() < 1e-15 && (r.solution[1] - 2.0).abs() < 1e-15);
        assert!(r.residual_norm < 1e-15);

        let col = DenseMatrix::column_vector(&[1.0, 1.0]);
        let r = least_squares(&col, &[1.0, 0.0]).unwrap();
        assert!((r.solution[0] - 0.5).abs() < 1e-15);
        assert!((r.residual_norm - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn least_squares_is_minimum_norm() {
        // x1 + x2 = 2 has minimum-norm solution (1, 1).
        let a = DenseMatrix::row_vector(&[1.0, 1.0]);
        let r = least_squares(&a, &[2.0]).unwrap();
        assert!((r.solution[0] - 1.0).abs() < 1e-14 && (r.solution[1] - 1.0).abs() < 1e-14);
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn least_squares_shape_error() {
        assert!(least_squares(&DenseMatrix::identity(2), &[1.0]).is_err());
    }
}
