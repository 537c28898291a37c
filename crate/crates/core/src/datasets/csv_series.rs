//! One series per CSV file: a header row of channel names, then one row per
//! time step.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{fmt_f64, Matrix};
use crate::series::LabeledSeries;

/// Reads a series and its channel names. Errors carry 1-based file line and column.
pub fn read_csv_series(path: &Path) -> Result<(LabeledSeries, Vec<String>)> {
    let text = crate::io::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().any(String::is_empty) {
        return Err(Error::parse(path, 1, 1, "header must name every channel"));
    }
    let d = header.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); d];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, 0, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != d {
            return Err(Error::parse(path, line, record.len().min(d) + 1, format!("expected {d} cells, got {}", record.len())));
        }
        for (c, cell) in record.iter().enumerate() {
            let v = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(path, line, c + 1, format!("invalid number `{cell}`")))?;
            columns[c].push(v);
        }
    }
    let steps = columns[0].len();
    if steps < 2 {
        return Err(Error::parse(path, 2 + steps, 1, format!("need at least 2 data rows, got {steps}")));
    }
    let values = Matrix::from_rows(&columns)?;
    Ok((LabeledSeries::new(values)?, header))
}

/// Writes a series with lossless 17-significant-digit values.
pub fn write_csv_series(path: &Path, series: &LabeledSeries, channel_names: &[String]) -> Result<()> {
    if channel_names.len() != series.channels() {
        return Err(Error::ChannelMismatch { expected: series.channels(), got: channel_names.len() });
    }
    let mut out = channel_names.join(",");
    out.push('\n');
    for t in 0..series.steps() {
        let row: Vec<String> = (0..series.channels()).map(|c| fmt_f64(series.values[(c, t)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    crate::io::write_atomic(path, out.as_bytes())
}
