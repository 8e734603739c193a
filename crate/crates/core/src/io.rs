//! File formats.
//!
//! Matrices are CSV: one row per line, comma-separated decimal literals, no
//! header. Vectors are single-column or single-row CSV. Hypotheses are JSON
//! objects `{"H": [[...], ...], "y": [...]}`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::reduction::Hypothesis;

pub fn parse_matrix<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut cols = None;
    let mut rows = 0;
    let mut data = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {c} fields, found {}", record.len()),
                })
            }
            Some(_) => {}
        }
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("field {} is not a number: `{field}`", k + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: format!("field {} is not finite", k + 1),
                });
            }
            data.push(v);
        }
        rows += 1;
    }
    let Some(cols) = cols else {
        return Err(Error::Parse {
            line: 1,
            msg: "no matrix rows found".into(),
        });
    };
    DenseMatrix::new(rows, cols, data)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix(fs::File::open(path)?)
}

pub fn write_matrix<W: Write>(writer: W, m: &DenseMatrix) -> Result<()> {
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in m.row_iter() {
        // `{:?}` prints the shortest representation that round-trips.
        csv.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    csv.flush()?;
    Ok(())
}

pub fn save_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    write_matrix(fs::File::create(path)?, m)
}

/// Reads a vector stored as one column or one row.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    match m.shape() {
        (_, 1) | (1, _) => Ok(m.into_vec()),
        (r, c) => Err(Error::Parse {
            line: 1,
            msg: format!("expected a single row or column, found {r}x{c}"),
        }),
    }
}

/// Writes a vector as one value per line.
pub fn save_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let mut out = String::new();
    for x in v {
        out.push_str(&format!("{x:?}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn parse_hypothesis(text: &str) -> Result<Hypothesis> {
    if text.trim().is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty hypothesis file".into(),
        });
    }
    serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::Hypothesis(e.to_string()),
        _ => Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        },
    })
}

pub fn read_hypothesis(path: impl AsRef<Path>) -> Result<Hypothesis> {
    parse_hypothesis(&fs::read_to_string(path)?)
}

pub fn save_hypothesis(path: impl AsRef<Path>, h: &Hypothesis) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(h)?)?;
    Ok(())
}
