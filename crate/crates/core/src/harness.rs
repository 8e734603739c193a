//! Timing harness comparing full and compact hypothesis matrices.
//!
//! For each size the full hypothesis of a setting is built, reduced, and a
//! sequence of statistic vectors is drawn. The same sequence is then fed
//! through the full and the compact matrix; only the evaluation loop is
//! timed. The sum of the computed statistics is kept for each matrix and
//! the two sums must agree, which enforces that both runs computed the same
//! statistic.

use std::fmt::Write as _;
use std::hint::black_box;
use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::designs::{
    sample_compound_symmetry, sample_covariance, setting_hypothesis, vech, Setting, SettingSpec,
    GENERATOR,
};
use crate::error::{Error, Result};
use crate::forms::{ats, ats_s_direct, Variant};
use crate::matrix::DenseMatrix;
use crate::reduction::reduce;

pub const DEFAULT_REPS: usize = 5000;
pub const DEFAULT_WARMUP: usize = 50;
/// Relative agreement required between the full and compact checksums.
pub const CHECKSUM_TOL: f64 = 1e-6;
/// Sizes whose working set would exceed this many bytes are skipped.
pub const MAX_WORKING_SET_BYTES: usize = 1 << 31;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub setting: Setting,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub variant: Variant,
    /// Offset of setting C.
    pub gamma: f64,
    pub warmup: usize,
}

impl BenchConfig {
    pub fn new(setting: Setting, sizes: Vec<usize>) -> Self {
        Self {
            setting,
            sizes,
            reps: DEFAULT_REPS,
            seed: 1,
            variant: Variant::AtsS,
            gamma: 1.0,
            warmup: DEFAULT_WARMUP,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidSetting("reps must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::InvalidSetting("no sizes given".into()));
        }
        if self.variant == Variant::AtsF {
            return Err(Error::InvalidSetting(
                "the benchmark times ats or ats_s; ats_f is not supported".into(),
            ));
        }
        Ok(())
    }
}

/// One timed run: a matrix with `matrix_rows` rows evaluated `replicates`
/// times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub setting: Setting,
    pub d: usize,
    pub matrix_rows: usize,
    pub variant: Variant,
    pub replicates: usize,
    pub elapsed_seconds: f64,
    pub checksum: f64,
    pub seed: u64,
}

/// One size of a setting: the full and compact runs side by side. Field
/// order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub setting: Setting,
    pub d: usize,
    pub ell: usize,
    pub variant: Variant,
    pub reps: usize,
    pub seed: u64,
    pub t_full_s: f64,
    pub t_compact_s: f64,
    pub t_reduce_s: f64,
    pub speedup: f64,
    pub checksum_full: f64,
    pub checksum_compact: f64,
}

impl BenchRow {
    /// Split into the full and compact records. `m` is the number of rows
    /// of the full matrix, which the row itself does not carry.
    pub fn records(&self, m: usize) -> (BenchRecord, BenchRecord) {
        let record = |rows, elapsed, checksum| BenchRecord {
            setting: self.setting,
            d: self.d,
            matrix_rows: rows,
            variant: self.variant,
            replicates: self.reps,
            elapsed_seconds: elapsed,
            checksum,
            seed: self.seed,
        };
        (
            record(m, self.t_full_s, self.checksum_full),
            record(self.ell, self.t_compact_s, self.checksum_compact),
        )
    }

    pub fn checksum_gap(&self) -> f64 {
        relative_gap(self.checksum_full, self.checksum_compact)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeResult {
    pub size: usize,
    /// Rows of the full hypothesis matrix.
    pub m: usize,
    pub row: BenchRow,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub results: Vec<SizeResult>,
    /// `(size, reason)` for every skipped size.
    pub skipped: Vec<(usize, String)>,
}

impl BenchReport {
    pub fn rows(&self) -> impl Iterator<Item = &BenchRow> {
        self.results.iter().map(|r| &r.row)
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Statistic vectors for a setting, one per row.
///
/// A and B draw `N_d(0, V_d)` directly. C draws `z ~ N_p(1_p, V_p)` and uses
/// `vech((z - 1)(z - 1)^T)`, an unbiased single-draw estimate of `vech(V)`.
pub fn sample_statistics(spec: &SettingSpec, n: usize, seed: u64) -> Result<DenseMatrix> {
    let d = spec.d();
    match spec.setting() {
        Setting::A | Setting::B => sample_compound_symmetry(d, n, &vec![0.0; d], seed),
        Setting::C => {
            let p = spec.size();
            let z = sample_compound_symmetry(p, n, &vec![1.0; p], seed)?;
            let mut data = Vec::with_capacity(n * d);
            for row in z.row_iter() {
                let c: Vec<f64> = row.iter().map(|v| v - 1.0).collect();
                let outer = DenseMatrix::from_fn(p, p, |i, j| c[i] * c[j]);
                data.extend(vech(&outer)?);
            }
            DenseMatrix::new(n, d, data)
        }
    }
}

fn working_set_bytes(spec: &SettingSpec, reps: usize) -> Option<usize> {
    let d = spec.d();
    // H, Sigma, compact root and the statistic vectors.
    d.checked_mul(d)?
        .checked_mul(3)?
        .checked_add(reps.max(2).checked_mul(d)?)?
        .checked_mul(std::mem::size_of::<f64>())
}

/// Times `reps` evaluations, after `warmup` untimed ones, cycling through
/// `xs`. Returns elapsed seconds and the sum of the statistics.
fn time_loop(
    xs: &DenseMatrix,
    reps: usize,
    warmup: usize,
    eval: impl Fn(&[f64]) -> Result<f64>,
) -> Result<(f64, f64)> {
    let n = xs.rows();
    for k in 0..warmup {
        black_box(eval(black_box(xs.row(k % n)))?);
    }
    let mut checksum = 0.0;
    let start = Instant::now();
    for k in 0..reps {
        checksum += eval(black_box(xs.row(k % n)))?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    // Guard against a zero reading from a coarse clock.
    Ok((elapsed.max(f64::MIN_POSITIVE), black_box(checksum)))
}

pub fn bench_size(config: &BenchConfig, size: usize) -> Result<SizeResult> {
    let spec = SettingSpec::new(config.setting, size, config.gamma)?;
    let full = setting_hypothesis(&spec)?;

    let start = Instant::now();
    let reduced = reduce(&full)?;
    let t_reduce_s = start.elapsed().as_secs_f64();

    let seed = config.seed ^ (size as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let xs = sample_statistics(&spec, config.reps.max(2), seed)?;

    let (h, y) = (full.h(), full.y());
    let (l, yt) = (&reduced.l, reduced.y_tilde.as_slice());
    let ((t_full_s, checksum_full), (t_compact_s, checksum_compact)) = match config.variant {
        Variant::Ats => (
            time_loop(&xs, config.reps, config.warmup, |x| ats(x, h, y))?,
            time_loop(&xs, config.reps, config.warmup, |x| ats(x, l, yt))?,
        ),
        Variant::AtsS => {
            let sigma = sample_covariance(&xs)?;
            (
                time_loop(&xs, config.reps, config.warmup, |x| ats_s_direct(x, h, y, &sigma))?,
                time_loop(&xs, config.reps, config.warmup, |x| ats_s_direct(x, l, yt, &sigma))?,
            )
        }
        Variant::AtsF => unreachable!("rejected by validate"),
    };

    let row = BenchRow {
        setting: config.setting,
        d: spec.d(),
        ell: reduced.ell(),
        variant: config.variant,
        reps: config.reps,
        seed: config.seed,
        t_full_s,
        t_compact_s,
        t_reduce_s,
        speedup: t_full_s / t_compact_s,
        checksum_full,
        checksum_compact,
    };
    if row.checksum_gap() > CHECKSUM_TOL {
        return Err(Error::ChecksumMismatch {
            setting: config.setting.to_string(),
            d: row.d,
            full: checksum_full,
            compact: checksum_compact,
        });
    }
    Ok(SizeResult {
        size,
        m: full.m(),
        row,
    })
}

/// Runs every size of the configuration. Sizes too large for memory are
/// skipped and listed in the report; any other error aborts the run.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut report = BenchReport::default();
    for &size in &config.sizes {
        let spec = SettingSpec::new(config.setting, size, config.gamma)?;
        match working_set_bytes(&spec, config.reps) {
            Some(bytes) if bytes <= MAX_WORKING_SET_BYTES => {}
            _ => {
                report.skipped.push((
                    size,
                    format!("d = {} exceeds the working-set limit", spec.d()),
                ));
                continue;
            }
        }
        report.results.push(bench_size(config, size)?);
    }
    Ok(report)
}

pub fn write_csv<W: Write>(writer: W, rows: &[BenchRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<BenchRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Markdown table with one column per size, laid out like the timing table
/// of the original study: a `d(q)` or `d(p)` header row, then full and
/// compact timings.
pub fn markdown_table(config: &BenchConfig, report: &BenchReport) -> String {
    let setting = config.setting;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Setting {setting}: {} over {} replicates, seed {}, generator {GENERATOR}\n",
        config.variant, config.reps, config.seed
    );
    if report.results.is_empty() {
        out.push_str("(no sizes completed)\n");
    } else {
        let cells = |f: &dyn Fn(&SizeResult) -> String| {
            report.results.iter().map(f).collect::<Vec<_>>().join(" | ")
        };
        let _ = writeln!(
            out,
            "| d({}) | {} |",
            setting.size_name(),
            cells(&|r| format!("{}({})", r.row.d, r.size))
        );
        let _ = writeln!(out, "|---|{}", "---:|".repeat(report.results.len()));
        let _ = writeln!(out, "| rows full / compact | {} |", cells(&|r| format!("{} / {}", r.m, r.row.ell)));
        let _ = writeln!(out, "| full [s] | {} |", cells(&|r| format!("{:.4}", r.row.t_full_s)));
        let _ = writeln!(out, "| compact [s] | {} |", cells(&|r| format!("{:.4}", r.row.t_compact_s)));
        let _ = writeln!(out, "| speedup | {} |", cells(&|r| format!("{:.2}", r.row.speedup)));
        let _ = writeln!(out, "| reduction [s] | {} |", cells(&|r| format!("{:.2e}", r.row.t_reduce_s)));
        let _ = writeln!(
            out,
            "| checksum gap | {} |",
            cells(&|r| format!("{:.1e}", r.row.checksum_gap()))
        );
    }
    for (size, reason) in &report.skipped {
        let _ = writeln!(out, "\nskipped {}={size}: {reason}", setting.size_name());
    }
    out
}
