//! Standard hypothesis matrices and the Gaussian data generators used by
//! the benchmark settings.
//!
//! * A: two groups of `q`-dimensional vectors, no group effect,
//!   `(P_2 ⊗ J_q) mu = 0`, `d = 2q`.
//! * B: three groups, equal mean vectors, `(P_3 ⊗ I_q) mu = 0`, `d = 3q`.
//! * C: trace of a `p x p` covariance, `(h_p h_p^T) vech(V) = gamma h_p`,
//!   `d = p(p+1)/2`.
//!
//! Random draws use `ChaCha8Rng` seeded from a `u64` with `StandardNormal`
//! (ziggurat) variates; see [`GENERATOR`].

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{kronecker, DenseMatrix};
use crate::reduction::Hypothesis;

/// Name of the random generator, reported alongside benchmark output.
pub const GENERATOR: &str = "ChaCha8Rng/StandardNormal";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    A,
    B,
    C,
}

impl Setting {
    pub fn label(self) -> &'static str {
        match self {
            Setting::A => "A",
            Setting::B => "B",
            Setting::C => "C",
        }
    }

    /// Name of the size parameter: `q` for A and B, `p` for C.
    pub fn size_name(self) -> &'static str {
        match self {
            Setting::A | Setting::B => "q",
            Setting::C => "p",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Setting::A),
            "B" | "b" => Ok(Setting::B),
            "C" | "c" => Ok(Setting::C),
            other => Err(Error::InvalidSetting(format!("unknown setting label `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingSpec {
    setting: Setting,
    size: usize,
    gamma: f64,
}

impl SettingSpec {
    /// `size` is `q` for A/B and `p` for C; it must be at least 2. `gamma`
    /// is only used by C.
    pub fn new(setting: Setting, size: usize, gamma: f64) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidSetting(format!(
                "setting {setting} needs {} >= 2, got {size}",
                setting.size_name()
            )));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidSetting("gamma must be finite".into()));
        }
        Ok(Self {
            setting,
            size,
            gamma,
        })
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn d(&self) -> usize {
        match self.setting {
            Setting::A => 2 * self.size,
            Setting::B => 3 * self.size,
            Setting::C => self.size * (self.size + 1) / 2,
        }
    }
}

/// `P_d = I_d - J_d / d`.
pub fn centering(d: usize) -> DenseMatrix {
    let off = 1.0 / d as f64;
    DenseMatrix::from_fn(d, d, |i, j| if i == j { 1.0 - off } else { -off })
}

/// `J_d`, the all-ones matrix.
pub fn ones(rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| 1.0)
}

/// 0-based position of `v_ij` (`i <= j`) in `vech` of a `p x p` matrix.
pub fn vech_index(p: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < p);
    // Rows 0..i contribute p, p-1, ..., p-i+1 entries.
    i * p - i * i.saturating_sub(1) / 2 + (j - i)
}

/// Upper-triangular row-wise half vectorization
/// `(v_11, ..., v_1p, v_22, ..., v_2p, ..., v_pp)`.
pub fn vech(v: &DenseMatrix) -> Result<Vec<f64>> {
    if !v.is_square() {
        return Err(Error::shape("vech", v.shape(), (v.cols(), v.rows())));
    }
    let asymmetry = v.relative_asymmetry();
    if asymmetry > 1e-10 {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let p = v.rows();
    let mut out = Vec::with_capacity(p * (p + 1) / 2);
    for i in 0..p {
        out.extend_from_slice(&v.row(i)[i..]);
    }
    Ok(out)
}

/// Indicator of the diagonal positions in `vech`, so that
/// `h_p^T vech(V) = tr(V)`.
pub fn trace_selector(p: usize) -> Vec<f64> {
    let mut h = vec![0.0; p * (p + 1) / 2];
    for i in 0..p {
        h[vech_index(p, i, i)] = 1.0;
    }
    h
}

pub fn setting_hypothesis(spec: &SettingSpec) -> Result<Hypothesis> {
    let q = spec.size();
    match spec.setting() {
        Setting::A => {
            let h = kronecker(&centering(2), &ones(q, q))?;
            Hypothesis::homogeneous(h)
        }
        Setting::B => {
            let h = kronecker(&centering(3), &DenseMatrix::identity(q))?;
            Hypothesis::homogeneous(h)
        }
        Setting::C => {
            let hp = trace_selector(q);
            let d = hp.len();
            let h = DenseMatrix::from_fn(d, d, |i, j| hp[i] * hp[j]);
            // tr(V) = gamma written through h_p h_p^T; the column space of
            // h_p h_p^T is span(h_p), so the offset is gamma * h_p.
            let y = hp.iter().map(|v| spec.gamma() * v).collect();
            Hypothesis::new(h, y)
        }
    }
}

/// `n` draws from `N_d(mean, I_d + 1_d 1_d^T)`: each row is
/// `mean + z_0 1_d + z` with independent standard normal `z_0` and `z`.
pub fn sample_compound_symmetry(d: usize, n: usize, mean: &[f64], seed: u64) -> Result<DenseMatrix> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidSetting(format!("sampler needs d, n >= 1, got d={d} n={n}")));
    }
    if mean.len() != d {
        return Err(Error::shape("sample_compound_symmetry", (n, d), (mean.len(), 1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let shared: f64 = StandardNormal.sample(&mut rng);
        for &mu in mean {
            let own: f64 = StandardNormal.sample(&mut rng);
            data.push(mu + shared + own);
        }
    }
    DenseMatrix::new(n, d, data)
}

/// Unbiased sample covariance (divisor `n - 1`) of the rows of `x`.
pub fn sample_covariance(x: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let mut mean = vec![0.0; d];
    for row in x.row_iter() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = DenseMatrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for row in x.row_iter() {
        for ((c, v), m) in centered.iter_mut().zip(row).zip(&mean) {
            *c = v - m;
        }
        for i in 0..d {
            let ci = centered[i];
            let out = cov.row_mut(i);
            for j in i..d {
                out[j] += ci * centered[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / denom;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    Ok(cov)
}
