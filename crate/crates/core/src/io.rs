//! Plot-ready CSV and stable JSON output.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// `x` with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header row and one row per record.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Io(format!(
                "csv row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|&v| format_float(v)))
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(std::io::BufWriter::new(file), header, rows)
}

/// Reads a numeric CSV written by [`write_csv`]: the header and the rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let header = r.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Io(format!("`{f}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Pretty JSON with fields in declaration order.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
