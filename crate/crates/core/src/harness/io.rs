//! CSV and JSON files written and read by the harness.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{FouError, Result};
use crate::harness::mc::HorizonRecord;

/// Header of the results file for a `p`-dimensional drift.
pub fn results_header(p: usize) -> Vec<String> {
    let mut h = vec![
        "rep".to_string(),
        "seed".into(),
        "n".into(),
        "alpha_hat".into(),
    ];
    h.extend((1..=p).map(|i| format!("mu_hat_{i}")));
    h.push("gamma_inv".into());
    h.push("err_alpha_scaled".into());
    h.extend((1..=p).map(|i| format!("err_mu_scaled_{i}")));
    h
}

pub fn write_results<W: Write>(records: &[HorizonRecord], p: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| FouError::Io(std::io::Error::other(e));
    w.write_record(results_header(p)).map_err(csv_err)?;
    for r in records {
        let mut row = vec![
            r.rep.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.alpha_hat.to_string(),
        ];
        row.extend(r.mu_hat.iter().map(f64::to_string));
        row.push(r.gamma_inv.to_string());
        row.push(r.err_alpha_scaled.to_string());
        row.extend(r.err_mu_scaled.iter().map(f64::to_string));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results_file(records: &[HorizonRecord], p: usize, path: &Path) -> Result<()> {
    write_results(records, p, BufWriter::new(File::create(path)?))
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> FouError {
    FouError::Parse {
        file: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads a results file, reporting the offending line on any malformed row.
pub fn read_results_file(path: &Path) -> Result<Vec<HorizonRecord>> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| parse_error(path, 1, e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 8 || !header.len().is_multiple_of(2) {
        return Err(parse_error(
            path,
            1,
            format!("unexpected header with {} columns", header.len()),
        ));
    }
    let p = (header.len() - 6) / 2;
    if header != results_header(p) {
        return Err(parse_error(
            path,
            1,
            "header does not match the results schema",
        ));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<&str> {
            row.get(i)
                .ok_or_else(|| parse_error(path, line, format!("missing column {}", header[i])))
        };
        let float = |i: usize| -> Result<f64> {
            field(i)?.trim().parse::<f64>().map_err(|_| {
                parse_error(path, line, format!("column {} is not a number", header[i]))
            })
        };
        let int = |i: usize| -> Result<u64> {
            field(i)?.trim().parse::<u64>().map_err(|_| {
                parse_error(
                    path,
                    line,
                    format!("column {} is not an integer", header[i]),
                )
            })
        };
        records.push(HorizonRecord {
            rep: int(0)? as usize,
            seed: int(1)?,
            n: int(2)? as usize,
            alpha_hat: float(3)?,
            mu_hat: (0..p).map(|i| float(4 + i)).collect::<Result<_>>()?,
            gamma_inv: float(4 + p)?,
            err_alpha_scaled: float(5 + p)?,
            err_mu_scaled: (0..p).map(|i| float(6 + p + i)).collect::<Result<_>>()?,
        });
    }
    Ok(records)
}

/// Samples `(dt, X)` from a path file with columns `t,X,...`.
pub fn read_path_file(path: &Path) -> Result<(f64, Vec<f64>)> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| parse_error(path, 1, e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .clone();
    if header.get(0) != Some("t") || header.get(1) != Some("X") {
        return Err(parse_error(path, 1, "expected columns t,X"));
    }
    let mut t = Vec::new();
    let mut x = Vec::new();
    for row in reader.records() {
        let row = row
            .map_err(|e| parse_error(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            row.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| {
                    parse_error(
                        path,
                        line,
                        format!("column {} is not a number", header.get(i).unwrap_or("?")),
                    )
                })
        };
        t.push(num(0)?);
        x.push(num(1)?);
    }
    if x.len() < 2 {
        return Err(parse_error(path, 1, "path needs at least two samples"));
    }
    let dt = t[1] - t[0];
    for (k, tk) in t.iter().enumerate() {
        if (tk - k as f64 * dt).abs() > 1e-9 * (1.0 + tk.abs()) {
            return Err(parse_error(
                path,
                k as u64 + 2,
                "time grid is not uniform from t = 0",
            ));
        }
    }
    Ok((dt, x))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| FouError::Numerical(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
