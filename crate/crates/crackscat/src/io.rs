//! Artifact serialization: far-field patterns, indicator grids, radius-scan
//! curves, support-count fields, and iterate traces as CSV plus JSON mirrors.
//!
//! All floating-point values are written with Rust's shortest round-trip
//! formatting, so reruns with the same seed produce byte-identical files.

use crate::linalg::CMat;
use crate::newton::IterateTrace;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure on {path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed data in {path} line {line}: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),
}

fn file_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::File {
        path: path.display().to_string(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| file_err(path, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| file_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| file_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value)?;
    write_text(path, &(text + "\n"))
}

/// Far-field pattern CSV: angle_rad, re, im.
pub fn write_farfield_csv(
    path: &Path,
    angles: &[f64],
    values: &[Complex64],
) -> Result<(), IoError> {
    let mut out = String::from("angle_rad,re,im\n");
    for (&t, v) in angles.iter().zip(values) {
        out.push_str(&format!("{},{},{}\n", t, v.re, v.im));
    }
    write_text(path, &out)
}

/// Far-field pattern JSON mirror with metadata.
pub fn write_farfield_json(
    path: &Path,
    angles: &[f64],
    values: &[Complex64],
    metadata: serde_json::Value,
) -> Result<(), IoError> {
    let value = json!({
        "metadata": metadata,
        "angle_rad": angles,
        "re": values.iter().map(|v| v.re).collect::<Vec<_>>(),
        "im": values.iter().map(|v| v.im).collect::<Vec<_>>(),
    });
    write_json(path, &value)
}

/// Read a far-field CSV back (round-trip counterpart of `write_farfield_csv`).
pub fn read_farfield_csv(path: &Path) -> Result<(Vec<f64>, Vec<Complex64>), IoError> {
    let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    let mut angles = Vec::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let bad = |m: &str| IoError::Malformed {
            path: path.display().to_string(),
            line: i + 1,
            message: m.to_string(),
        };
        if cols.len() != 3 {
            return Err(bad("expected 3 columns"));
        }
        let t: f64 = cols[0].trim().parse().map_err(|_| bad("bad angle"))?;
        let re: f64 = cols[1].trim().parse().map_err(|_| bad("bad re"))?;
        let im: f64 = cols[2].trim().parse().map_err(|_| bad("bad im"))?;
        angles.push(t);
        values.push(Complex64::new(re, im));
    }
    Ok((angles, values))
}

/// External far-field matrix CSV: columns row, col, re, im, one entry per
/// line; indices refer to the observation grid (row = observation angle,
/// col = incidence angle).
pub fn read_matrix_csv(path: &Path, size: usize) -> Result<CMat, IoError> {
    let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    let mut a = CMat::zeros(size, size);
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| IoError::Malformed {
            path: path.display().to_string(),
            line: i + 1,
            message: m.to_string(),
        };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(bad("expected 4 columns"));
        }
        let r: usize = cols[0].trim().parse().map_err(|_| bad("bad row"))?;
        let c: usize = cols[1].trim().parse().map_err(|_| bad("bad col"))?;
        if r >= size || c >= size {
            return Err(bad("index out of range"));
        }
        let re: f64 = cols[2].trim().parse().map_err(|_| bad("bad re"))?;
        let im: f64 = cols[3].trim().parse().map_err(|_| bad("bad im"))?;
        *a.at_mut(r, c) = Complex64::new(re, im);
    }
    Ok(a)
}

/// Write a far-field matrix in the `read_matrix_csv` format.
pub fn write_matrix_csv(path: &Path, a: &CMat) -> Result<(), IoError> {
    let mut out = String::from("row,col,re,im\n");
    for i in 0..a.nrows {
        for j in 0..a.ncols {
            let v = a.at(i, j);
            out.push_str(&format!("{},{},{},{}\n", i, j, v.re, v.im));
        }
    }
    write_text(path, &out)
}

/// One row of an indicator grid: the sample descriptor values plus the
/// indicator value and its divergence flag.
pub struct GridRow {
    pub descriptor: Vec<f64>,
    pub value: f64,
    pub divergent: bool,
}

/// Indicator grid CSV: named descriptor columns, then value and divergent.
/// Divergent entries are written as the maximum finite value of the grid
/// (flagged), never as a float infinity.
pub fn write_indicator_csv(
    path: &Path,
    descriptor_names: &[&str],
    rows: &[GridRow],
) -> Result<(), IoError> {
    let max_finite = rows
        .iter()
        .filter(|r| !r.divergent)
        .map(|r| r.value)
        .fold(0.0_f64, f64::max);
    let mut out = String::new();
    for name in descriptor_names {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("value,divergent\n");
    for r in rows {
        for d in &r.descriptor {
            out.push_str(&format!("{},", d));
        }
        let v = if r.divergent { max_finite } else { r.value };
        out.push_str(&format!("{},{}\n", v, r.divergent as u8));
    }
    write_text(path, &out)
}

/// JSON mirror of an indicator grid with a metadata block.
pub fn write_indicator_json(
    path: &Path,
    descriptor_names: &[&str],
    rows: &[GridRow],
    metadata: serde_json::Value,
) -> Result<(), IoError> {
    let max_finite = rows
        .iter()
        .filter(|r| !r.divergent)
        .map(|r| r.value)
        .fold(0.0_f64, f64::max);
    let samples: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            let mut m = serde_json::Map::new();
            for (name, d) in descriptor_names.iter().zip(&r.descriptor) {
                m.insert(name.to_string(), json!(d));
            }
            m.insert(
                "value".into(),
                json!(if r.divergent { max_finite } else { r.value }),
            );
            m.insert("divergent".into(), json!(r.divergent));
            serde_json::Value::Object(m)
        })
        .collect();
    write_json(path, &json!({ "metadata": metadata, "samples": samples }))
}

/// Radius-scan curve CSV: radius, value rows.
pub fn write_curve_csv(path: &Path, curve: &[(f64, f64)]) -> Result<(), IoError> {
    let mut out = String::from("radius,value\n");
    for &(r, v) in curve {
        out.push_str(&format!("{},{}\n", r, v));
    }
    write_text(path, &out)
}

/// Support-count field CSV: x, y, count.
pub fn write_counts_csv(
    path: &Path,
    grid: &[[f64; 2]],
    counts: &[u32],
) -> Result<(), IoError> {
    let mut out = String::from("x,y,count\n");
    for (p, &c) in grid.iter().zip(counts) {
        out.push_str(&format!("{},{},{}\n", p[0], p[1], c));
    }
    write_text(path, &out)
}

/// Iterate trace: JSON (native) and a flat CSV for plotting.
pub fn write_trace(path_json: &Path, path_csv: &Path, trace: &IterateTrace) -> Result<(), IoError> {
    write_json(path_json, trace)?;
    let mut out = String::from("step,corner,x,y,residual,candidate_start,candidate_end,halvings\n");
    for rec in &trace.records {
        for (ci, c) in rec.corners.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                rec.step, ci, c[0], c[1], rec.residual, rec.candidate.0, rec.candidate.1,
                rec.halvings
            ));
        }
    }
    write_text(path_csv, &out)
}

/// Affine plot values V in [-1, 1]: min -> -1, max -> +1. A constant grid
/// maps to all zeros with the flag set.
pub fn plot_values(values: &[f64]) -> (Vec<f64>, bool) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return (vec![0.0; values.len()], true);
    }
    (
        values
            .iter()
            .map(|&v| 2.0 * (v - lo) / (hi - lo) - 1.0)
            .collect(),
        false,
    )
}
