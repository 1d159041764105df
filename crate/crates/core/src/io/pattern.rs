use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{Point, PointPattern, Window};

use super::{read_json, write_bytes, write_json};

const AXES: [&str; 3] = ["x", "y", "z"];

/// `p.csv` → `p.window.json`.
pub fn window_sidecar(csv: &Path) -> PathBuf {
    csv.with_extension("window.json")
}

/// Writes `x[,y[,z]][,mark][,weight]` rows plus the window sidecar.
/// Values are printed in shortest round-trip form.
pub fn write_pattern(pattern: &PointPattern, csv_path: &Path) -> Result<()> {
    let d = pattern.dim();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = AXES[..d].to_vec();
    if pattern.marks().is_some() {
        header.push("mark");
    }
    if pattern.weights().is_some() {
        header.push("weight");
    }
    let csv_err = |e: csv::Error| Error::Numeric(format!("csv encoding: {e}"));
    wtr.write_record(&header).map_err(csv_err)?;
    for (i, p) in pattern.points().iter().enumerate() {
        let mut row: Vec<String> = p[..d].iter().map(|v| v.to_string()).collect();
        if let Some(m) = pattern.marks() {
            row.push(m[i].to_string());
        }
        if let Some(w) = pattern.weights() {
            row.push(w[i].to_string());
        }
        wtr.write_record(&row).map_err(csv_err)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Numeric(e.to_string()))?;
    write_bytes(csv_path, &bytes)?;
    write_json(&window_sidecar(csv_path), pattern.window())
}

/// Reads a pattern whose window lives in the default sidecar.
pub fn read_pattern_with_sidecar(csv_path: &Path) -> Result<PointPattern> {
    read_pattern(csv_path, &window_sidecar(csv_path))
}

pub fn read_pattern(csv_path: &Path, window_path: &Path) -> Result<PointPattern> {
    let window: Window = read_json(window_path)?;
    let text = super::read_to_string(csv_path)?;
    parse_pattern(&text, window, &csv_path.display().to_string())
}

pub(crate) fn parse_pattern(text: &str, window: Window, origin: &str) -> Result<PointPattern> {
    let d = window.dim();
    let at = |line: u64, reason: String| Error::Parse {
        location: format!("{origin}: row {line}"),
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| at(1, e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let mut coord_cols = Vec::with_capacity(d);
    for axis in &AXES[..d] {
        coord_cols.push(col(axis).ok_or_else(|| at(1, format!("missing column `{axis}` for a {d}-d window")))?);
    }
    if let Some(extra) = AXES[d..].iter().find(|a| col(a).is_some()) {
        return Err(at(1, format!("column `{extra}` does not exist in a {d}-d window")));
    }
    let (mark_col, weight_col) = (col("mark"), col("weight"));
    let width = header.len();

    let mut points = Vec::new();
    let mut marks = mark_col.map(|_| Vec::new());
    let mut weights = weight_col.map(|_| Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| at(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(at(line, format!("expected {width} fields, found {}", rec.len())));
        }
        let num = |c: usize| -> Result<f64> {
            let s = &rec[c];
            let v: f64 = s.parse().map_err(|_| at(line, format!("`{s}` in column `{}` is not a number", &header[c])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(at(line, format!("non-finite value in column `{}`", &header[c])))
            }
        };
        let mut p: Point = [0.0; 3];
        for (k, &c) in coord_cols.iter().enumerate() {
            p[k] = num(c)?;
        }
        if !window.contains(&p) {
            return Err(at(line, format!("point {:?} lies outside the window", &p[..d])));
        }
        points.push(p);
        if let (Some(c), Some(m)) = (mark_col, marks.as_mut()) {
            m.push(num(c)?);
        }
        if let (Some(c), Some(w)) = (weight_col, weights.as_mut()) {
            w.push(num(c)?);
        }
    }
    PointPattern::new(window, points, marks, weights)
}
