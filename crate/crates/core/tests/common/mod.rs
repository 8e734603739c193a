//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use atsroot::DenseMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::new(rows, cols, gaussian_vec(rng, rows * cols)).unwrap()
}

/// `m x d` matrix of rank `min(m, d, k)` built as a product of Gaussian
/// factors.
pub fn low_rank(rng: &mut impl Rng, m: usize, d: usize, k: usize) -> DenseMatrix {
    gaussian(rng, m, k).matmul(&gaussian(rng, k, d)).unwrap()
}

/// Random hypothesis matrix with `m <= max_m`, `d <= max_d` and a random
/// rank, about a third of the time rank deficient.
pub fn random_h(rng: &mut impl Rng, max_m: usize, max_d: usize) -> DenseMatrix {
    let m = rng.random_range(1..=max_m);
    let d = rng.random_range(1..=max_d);
    let full = m.min(d);
    let k = if rng.random_bool(0.35) && full > 1 {
        rng.random_range(1..full)
    } else {
        full
    };
    low_rank(rng, m, d, k)
}

/// Random PSD matrix `B B^T` whose rank is random in `1..=d`.
pub fn random_psd(rng: &mut impl Rng, d: usize) -> DenseMatrix {
    let k = rng.random_range(1..=d);
    let b = gaussian(rng, d, k);
    // Average the two halves so the result is exactly symmetric.
    b.matmul(&b.transpose()).unwrap().symmetrized().unwrap()
}

/// `|a - b| <= tol * max(|a|, |b|)`, with exact equality required at 0.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Plain triple-loop `||Hx - y||^2`, independent of the library kernels.
pub fn ats_oracle(x: &[f64], h: &DenseMatrix, y: &[f64]) -> f64 {
    (0..h.rows())
        .map(|i| {
            let r: f64 = (0..h.cols()).map(|j| h.get(i, j) * x[j]).sum::<f64>() - y[i];
            r * r
        })
        .sum()
}

/// Plain `H Sigma H^T`.
pub fn hsh_oracle(h: &DenseMatrix, sigma: &DenseMatrix) -> DenseMatrix {
    let (m, d) = h.shape();
    DenseMatrix::from_fn(m, m, |i, k| {
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                s += h.get(i, a) * sigma.get(a, b) * h.get(k, b);
            }
        }
        s
    })
}

/// Triple of `(ats, ats_s, ats_f)` from the definitions.
pub fn forms_oracle(x: &[f64], h: &DenseMatrix, y: &[f64], sigma: &DenseMatrix) -> (f64, f64, f64) {
    let q = ats_oracle(x, h, y);
    let m = hsh_oracle(h, sigma);
    let tr: f64 = (0..m.rows()).map(|i| m.get(i, i)).sum();
    let tr2: f64 = m.as_slice().iter().map(|v| v * v).sum();
    (q, q / tr, q / tr * tr * tr / tr2)
}
