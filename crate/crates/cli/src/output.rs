//! CSV/JSON writers. The CSV schema is fixed: a single header row, stable
//! column order, `{}`-formatted floats (shortest exact representation,
//! locale-independent), `\n` line endings. Identical inputs therefore
//! produce byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut buf = String::with_capacity(rows.len() * 64 + header.len() + 1);
    buf.push_str(header);
    buf.push('\n');
    for row in rows {
        buf.push_str(row);
        buf.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)
        .map_err(|e| CliError::Numerical(format!("JSON serialization failed: {e}")))?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Optional column cell: empty when absent.
pub fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
