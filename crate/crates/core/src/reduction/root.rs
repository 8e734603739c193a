//! Compact roots: `L` with `rank(H)` rows and `L^T L = H^T H`.

use crate::error::{Error, Result};
use crate::matrix::{
    kronecker, numerical_rank, svd, symmetric_eigen, symmetric_psd_eigen, DenseMatrix,
};

/// Entries below this magnitude are skipped when fixing the sign of a root
/// row.
pub const SIGN_THRESHOLD: f64 = 1e-12;

/// Spacing of the grid the canonical projector is snapped to before its root
/// is taken (2^-30).
pub const CANONICAL_GRID: f64 = 1.0 / (1u64 << 30) as f64;

/// Flips `v` so its first entry with magnitude above [`SIGN_THRESHOLD`] is
/// positive.
fn normalize_sign(v: &mut [f64]) {
    if let Some(&lead) = v.iter().find(|x| x.abs() > SIGN_THRESHOLD) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Builds the `r x d` matrix whose rows are `scale_k * direction_k`, each
/// direction sign-normalized first.
fn scaled_rows<'a>(
    d: usize,
    rows: impl Iterator<Item = (f64, &'a [f64])>,
) -> DenseMatrix {
    let mut data = Vec::new();
    let mut count = 0;
    for (scale, direction) in rows {
        let mut v = direction.to_vec();
        normalize_sign(&mut v);
        data.extend(v.into_iter().map(|x| x * scale));
        count += 1;
    }
    DenseMatrix::new(count, d, data).expect("finite rows")
}

/// Compact root of a symmetric PSD matrix: rows `sqrt(lambda_i) * v_i^T` for
/// the numerically nonzero eigenpairs.
pub fn compact_root(a: &DenseMatrix) -> Result<DenseMatrix> {
    if a.is_empty() {
        return Err(Error::Empty("compact_root"));
    }
    let eig = symmetric_psd_eigen(a)?;
    let d = a.cols();
    let magnitudes: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let r = numerical_rank(&magnitudes, d, d);
    Ok(scaled_rows(
        d,
        (0..r).map(|k| (magnitudes[k].sqrt(), eig.vectors.row(k))),
    ))
}

/// Compact root of `H^T H` computed from the SVD of `H` itself:
/// `L = diag(sigma_1..sigma_r) * V_r^T`.
pub fn compact_root_of_hypothesis_matrix(h: &DenseMatrix) -> Result<DenseMatrix> {
    let dec = svd(h)?;
    let r = numerical_rank(&dec.singular_values, h.rows(), h.cols());
    Ok(scaled_rows(
        h.cols(),
        (0..r).map(|k| (dec.singular_values[k], dec.vt.row(k))),
    ))
}

/// Compact root for the homogeneous hypothesis `H theta = 0`.
pub fn reduce_homogeneous(h: &DenseMatrix) -> Result<DenseMatrix> {
    compact_root_of_hypothesis_matrix(h)
}

/// Orthogonal projector onto the row space of `H`,
/// `P = H^T (H H^T)^+ H = V_r V_r^T`. Exactly symmetric.
pub fn canonical_projection(h: &DenseMatrix) -> Result<DenseMatrix> {
    let dec = svd(h)?;
    let r = numerical_rank(&dec.singular_values, h.rows(), h.cols());
    let d = h.cols();
    let mut p = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v: f64 = (0..r).map(|k| dec.vt.get(k, i) * dec.vt.get(k, j)).sum();
            p.set(i, j, v);
            p.set(j, i, v);
        }
    }
    Ok(p)
}

/// Root of the canonical projector, independent of which matrix was used
/// to express the row space.
///
/// The projector is snapped to a `2^-30` grid before its eigenvectors are
/// taken, so two matrices whose computed projectors differ only by rounding
/// produce byte-identical roots. Eigenvalues of a projector are 0 or 1, so
/// the rows are the unit eigenvectors with eigenvalue above 1/2.
pub fn canonical_reduce(h: &DenseMatrix) -> Result<DenseMatrix> {
    let p = canonical_projection(h)?;
    let d = p.cols();
    let snapped = DenseMatrix::from_fn(d, d, |i, j| {
        (p.get(i, j) / CANONICAL_GRID).round() * CANONICAL_GRID
    });
    let eig = symmetric_eigen(&snapped)?;
    let r = eig.values.iter().filter(|&&v| v > 0.5).count();
    Ok(scaled_rows(d, (0..r).map(|k| (1.0, eig.vectors.row(k)))))
}

/// `reduce_homogeneous(H_W) ⊗ reduce_homogeneous(H_S)`; its Gram matrix is
/// that of `H_W ⊗ H_S`.
pub fn kronecker_reduce(h_w: &DenseMatrix, h_s: &DenseMatrix) -> Result<DenseMatrix> {
    let l_w = reduce_homogeneous(h_w)?;
    let l_s = reduce_homogeneous(h_s)?;
    if l_w.rows() == 0 || l_s.rows() == 0 {
        return Ok(DenseMatrix::zeros(0, h_w.cols() * h_s.cols()));
    }
    kronecker(&l_w, &l_s)
}
