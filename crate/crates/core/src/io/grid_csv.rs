//! Grid samples as CSV: `chart,re,im,<value columns>`, one row per point,
//! numbers in `{:.16e}` (17 significant digits), `\n` line endings.
//! Files are written to a temporary file in the target directory and then
//! renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::bundle::{Chart, ChartPoint};
use crate::error::{Error, Result};
use crate::kernel::KappaSamples;

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn chart_name(c: Chart) -> &'static str {
    match c {
        Chart::Z => "Z",
        Chart::W => "W",
    }
}

/// Renders the CSV text; every column must have one value per point.
pub fn grid_csv_string(points: &[ChartPoint], columns: &[(&str, &[f64])]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::EmptySamples);
    }
    if let Some((name, col)) = columns.iter().find(|(_, c)| c.len() != points.len()) {
        return Err(Error::DimensionMismatch(format!(
            "column {name} has {} values for {} points",
            col.len(),
            points.len()
        )));
    }
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["chart".to_string(), "re".into(), "im".into()];
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    let csv_err = |e: csv::Error| Error::InvalidScenario(format!("csv encoding failed: {e}"));
    writer.write_record(&header).map_err(csv_err)?;
    for (i, x) in points.iter().enumerate() {
        let mut record = vec![
            chart_name(x.chart).to_string(),
            format_float(x.coord.re),
            format_float(x.coord.im),
        ];
        record.extend(columns.iter().map(|(_, c)| format_float(c[i])));
        writer.write_record(&record).map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidScenario(format!("csv encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn emit_grid_csv(path: &Path, points: &[ChartPoint], columns: &[(&str, &[f64])]) -> Result<()> {
    let text = grid_csv_string(points, columns)?;
    write_atomic(path, text.as_bytes())
}

/// Reads `chart,re,im,<column>` rows back into samples.
pub fn read_grid_column(path: &Path, column: &str) -> Result<KappaSamples> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidScenario(format!("{}: {other:?}", path.display())),
    })?;
    let bad = |msg: String| Error::InvalidScenario(format!("{}: {msg}", path.display()));
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.len() < 4 || &headers[0] != "chart" || &headers[1] != "re" || &headers[2] != "im" {
        return Err(bad("header must start with chart,re,im".into()));
    }
    let col = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| bad(format!("no column named {column}")))?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: {e}", line + 1)))
        };
        let chart = match record[0].trim() {
            "Z" => Chart::Z,
            "W" => Chart::W,
            other => return Err(bad(format!("row {}: unknown chart {other:?}", line + 1))),
        };
        points.push(ChartPoint {
            chart,
            coord: Complex64::new(num(1)?, num(2)?),
        });
        values.push(num(col)?);
    }
    if points.is_empty() {
        return Err(Error::EmptySamples);
    }
    KappaSamples::new(points, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_is_fixed() {
        let pts = [
            ChartPoint::z_re(0.5),
            ChartPoint::w(Complex64::new(0.0, -1.0)),
        ];
        let text = grid_csv_string(&pts, &[("kappa", &[1.0, 1.0 / 3.0])]).unwrap();
        assert_eq!(
            text,
            "chart,re,im,kappa\n\
             Z,5.0000000000000000e-1,0.0000000000000000e0,1.0000000000000000e0\n\
             W,0.0000000000000000e0,-1.0000000000000000e0,3.3333333333333331e-1\n"
        );
    }

    #[test]
    fn empty_samples_write_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.csv");
        assert!(matches!(
            emit_grid_csv(&path, &[], &[("kappa", &[])]),
            Err(Error::EmptySamples)
        ));
        assert!(!path.exists());
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.csv");
        let pts: Vec<_> = (0..7)
            .map(|k| ChartPoint::z(Complex64::from_polar(0.3, k as f64)))
            .collect();
        let vals: Vec<f64> = (0..7).map(|k| (k as f64 * 0.77).exp()).collect();
        emit_grid_csv(&path, &pts, &[("kappa", &vals)]).unwrap();
        let first = fs::read(&path).unwrap();
        emit_grid_csv(&path, &pts, &[("kappa", &vals)]).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());
        let back = read_grid_column(&path, "kappa").unwrap();
        assert_eq!(back.values, vals);
        assert_eq!(back.points, pts);
    }
}
