//! `atsroot` command-line interface.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, parse, numerical), 2 usage
//! error or dimension mismatch, 3 `check` found the statistics differ.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use atsroot::designs::Setting;
use atsroot::harness::{markdown_table, run_bench, write_csv, BenchConfig, BenchRow, DEFAULT_REPS};
use atsroot::io::{read_hypothesis, read_matrix, read_vector, save_matrix, save_vector};
use atsroot::matrix::kronecker;
use atsroot::reduction::{canonical_reduce, kronecker_reduce, Residuals};
use atsroot::{check_equivalence, reduce, AtsContext, DenseMatrix, Error, EquivalenceReport, Hypothesis, Variant};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "atsroot", version, about = "Compact hypothesis matrices for Anova-type statistics")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for anything random.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a hypothesis to rank(H) rows.
    Reduce(ReduceArgs),
    /// Compare two hypotheses; exit 0 if ats_s agrees, 3 otherwise.
    Check {
        first: PathBuf,
        second: PathBuf,
    },
    /// Evaluate a statistic.
    Ats {
        hypothesis: PathBuf,
        /// Statistic vector as CSV (one row or one column).
        x: PathBuf,
        /// Covariance matrix as CSV; required for ats_s and ats_f.
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = VariantArg::Ats)]
        variant: VariantArg,
    },
    /// Time full against compact matrices for a simulation setting.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ReduceArgs {
    /// Hypothesis JSON file.
    #[arg(required_unless_present = "kron", conflicts_with = "kron")]
    input: Option<PathBuf>,
    /// Output prefix: writes PREFIX.L.csv, PREFIX.y.csv and PREFIX.json.
    #[arg(short, long)]
    output: PathBuf,
    /// Matrix-independent root of the row-space projector (y = 0 only).
    #[arg(long)]
    canonical: bool,
    /// Reduce H_W ⊗ H_S factor by factor from two CSV matrices.
    #[arg(long, num_args = 2, value_names = ["W", "S"])]
    kron: Option<Vec<PathBuf>>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    setting: SettingArg,
    /// Comma-separated sizes (q for A and B, p for C).
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    reps: usize,
    #[arg(long, value_enum, default_value_t = BenchVariant::AtsS)]
    variant: BenchVariant,
    /// Offset of setting C.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    format: Format,
    /// CSV report path; defaults to atsroot-bench-<setting>.csv.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Ats,
    #[value(name = "ats_s")]
    AtsS,
    #[value(name = "ats_f")]
    AtsF,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Ats => Variant::Ats,
            VariantArg::AtsS => Variant::AtsS,
            VariantArg::AtsF => Variant::AtsF,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchVariant {
    Ats,
    #[value(name = "ats_s")]
    AtsS,
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
    #[value(name = "C", alias = "c")]
    C,
}

impl From<SettingArg> for Setting {
    fn from(s: SettingArg) -> Self {
        match s {
            SettingArg::A => Setting::A,
            SettingArg::B => Setting::B,
            SettingArg::C => Setting::C,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Md,
    Csv,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Shape { .. } => Failure::Usage(e.to_string()),
            e => Failure::Run(e),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Reduce(ref args) => cmd_reduce(&cli, args),
        Command::Check { ref first, ref second } => cmd_check(&cli, first, second),
        Command::Ats {
            ref hypothesis,
            ref x,
            ref sigma,
            variant,
        } => cmd_ats(&cli, hypothesis, x, sigma.as_deref(), variant.into()),
        Command::Bench(ref args) => cmd_bench(&cli, args),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[derive(Serialize)]
struct Sidecar {
    ell: usize,
    rank: usize,
    a: f64,
    delta: f64,
    residuals: Residuals,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn cmd_reduce(cli: &Cli, args: &ReduceArgs) -> CmdResult {
    let (source, l, y_tilde, a, delta) = match (&args.kron, &args.input) {
        (Some(files), _) => {
            if args.canonical {
                return Err(Failure::Usage("--canonical cannot be combined with --kron".into()));
            }
            let w = read_matrix(&files[0])?;
            let s = read_matrix(&files[1])?;
            let l = kronecker_reduce(&w, &s)?;
            let source = Hypothesis::homogeneous(kronecker(&w, &s)?)?;
            let ell = l.rows();
            (source, l, vec![0.0; ell], 1.0, 0.0)
        }
        (None, Some(input)) => {
            let source = read_hypothesis(input)?;
            if args.canonical {
                if !source.is_homogeneous() {
                    return Err(Failure::Usage(
                        "--canonical is only defined for homogeneous hypotheses (y = 0)".into(),
                    ));
                }
                let l = canonical_reduce(source.h())?;
                let ell = l.rows();
                (source, l, vec![0.0; ell], 1.0, 0.0)
            } else {
                let red = reduce(&source)?;
                (source, red.l, red.y_tilde, red.scale_a, red.shift_delta)
            }
        }
        (None, None) => unreachable!("clap requires an input"),
    };

    let rank = source.rank()?;
    let ell = l.rows();
    // An empty root cannot form a hypothesis; report it against itself.
    let residuals = if ell == 0 {
        Residuals { gram: 0.0, cross: 0.0, norm: 0.0, scale: 0.0 }
    } else {
        let reduced = Hypothesis::new(l.clone(), y_tilde.clone())?;
        check_equivalence(&source, &reduced)?.residuals
    };
    let sidecar = Sidecar { ell, rank, a, delta, residuals };

    save_matrix(with_suffix(&args.output, ".L.csv"), &l)?;
    save_vector(with_suffix(&args.output, ".y.csv"), &y_tilde)?;
    let json = serde_json::to_string_pretty(&sidecar).map_err(Error::from)?;
    fs::write(with_suffix(&args.output, ".json"), &json).map_err(Error::from)?;

    if cli.json {
        println!("{json}");
    } else {
        println!("{} → {}", source.m(), ell);
    }
    Ok(ExitCode::SUCCESS)
}

fn report_text(r: &EquivalenceReport) -> String {
    let opt = |v: Option<bool>| v.map_or("unknown".to_string(), |b| b.to_string());
    let rows: Vec<(&str, String)> = vec![
        ("same_solution_set", opt(r.same_solution_set)),
        ("same_hypothesis_certified", r.same_hypothesis_certified.to_string()),
        ("same_gram", r.same_gram.to_string()),
        ("witness_a", r.witness_a.map_or("none".into(), |a| format!("{a}"))),
        ("same_cross", r.same_cross.to_string()),
        ("same_norm", r.same_norm.to_string()),
        ("ats_equal", r.ats_equal.to_string()),
        ("ats_s_equal", r.ats_s_equal.to_string()),
        ("ats_f_equal", r.ats_f_equal.to_string()),
        ("ats_shifted_equal", r.ats_shifted_equal.to_string()),
        ("shift_delta", format!("{}", r.shift_delta)),
        ("residual_gram", format!("{:.3e}", r.residuals.gram)),
        ("residual_cross", format!("{:.3e}", r.residuals.cross)),
        ("residual_norm", format!("{:.3e}", r.residuals.norm)),
        ("residual_scale", format!("{:.3e}", r.residuals.scale)),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}

fn cmd_check(cli: &Cli, first: &Path, second: &Path) -> CmdResult {
    let a = read_hypothesis(first)?;
    let b = read_hypothesis(second)?;
    if a.d() != b.d() {
        return Err(Failure::Usage(format!(
            "dimension mismatch: {} has d = {}, {} has d = {}",
            first.display(),
            a.d(),
            second.display(),
            b.d()
        )));
    }
    let report = check_equivalence(&a, &b)?;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
    } else {
        print!("{}", report_text(&report));
    }
    Ok(if report.ats_s_equal { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped.
fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, v);
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

fn cmd_ats(cli: &Cli, hypothesis: &Path, x: &Path, sigma: Option<&Path>, variant: Variant) -> CmdResult {
    if variant.needs_covariance() && sigma.is_none() {
        return Err(Failure::Usage(format!("--sigma is required for {variant}")));
    }
    let hyp = read_hypothesis(hypothesis)?;
    let x = read_vector(x)?;
    let sigma: Option<DenseMatrix> = sigma.map(read_matrix).transpose()?;
    let ctx = AtsContext::new(hyp.h().clone(), hyp.y().to_vec(), sigma)?;
    let value = ctx.evaluate(&x, variant)?;
    if cli.json {
        println!("{}", serde_json::json!({ "variant": variant, "value": value }));
    } else {
        println!("{}", format_significant(value, 12));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> CmdResult {
    let setting: Setting = args.setting.into();
    let mut config = BenchConfig::new(setting, args.sizes.clone());
    config.reps = args.reps;
    config.seed = cli.seed;
    config.gamma = args.gamma;
    config.variant = match args.variant {
        BenchVariant::Ats => Variant::Ats,
        BenchVariant::AtsS => Variant::AtsS,
    };
    let report = run_bench(&config).map_err(|e| match e {
        Error::InvalidSetting(msg) => Failure::Usage(msg),
        e => Failure::Run(e),
    })?;
    for (size, reason) in &report.skipped {
        eprintln!("warning: skipped {}={size}: {reason}", setting.size_name());
    }

    let rows: Vec<BenchRow> = report.rows().cloned().collect();
    let csv_path = args
        .csv
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("atsroot-bench-{setting}.csv")));
    write_csv(fs::File::create(&csv_path).map_err(Error::from)?, &rows)?;

    if cli.json {
        println!("{}", serde_json::to_string_pretty(&rows).map_err(Error::from)?);
    } else if args.format == Format::Csv {
        write_csv(std::io::stdout().lock(), &rows)?;
    } else {
        print!("{}", markdown_table(&config, &report));
    }
    Ok(ExitCode::SUCCESS)
}
