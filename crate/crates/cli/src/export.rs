//! File formats for extension grids and Beltrami traces.
//!
//! Grid JSON:
//!
//! ```text
//! {"grid": {"radii": [...], "angular_count": N},
//!  "values": [[re, im], ...],           row-major, radius then angle
//!  "residuals": [...],                  same order
//!  "seam": {"interior": [[re, im], ...], "exterior": [[re, im], ...]}}
//! ```
//!
//! Trace CSV: header `rho,theta_index,re,im`, one row per sample. Imports
//! also accept the column names `re_mu` and `im_mu`.

use std::fs;
use std::path::Path;

use loewner_core::analysis::{BeltramiCircle, BeltramiField, MuSource};
use loewner_core::becker::QCExtensionGrid;
use loewner_core::geometry::PolarGrid;
use loewner_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::envelope;
use crate::CliError;

#[derive(Serialize, Deserialize)]
struct GridShape {
    radii: Vec<f64>,
    angular_count: usize,
}

#[derive(Serialize, Deserialize)]
struct SeamFile {
    interior: Vec<[f64; 2]>,
    exterior: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    grid: GridShape,
    values: Vec<[f64; 2]>,
    residuals: Vec<f64>,
    seam: SeamFile,
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn complexes(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()
}

/// The grid in the JSON schema, as a JSON tree for embedding in envelopes.
pub fn grid_value(grid: &QCExtensionGrid) -> Result<serde_json::Value, CliError> {
    envelope::payload(&grid_file(grid))
}

fn grid_file(grid: &QCExtensionGrid) -> GridFile {
    GridFile {
        grid: GridShape { radii: grid.grid().radii().to_vec(), angular_count: grid.grid().angular_count() },
        values: pairs(grid.values()),
        residuals: grid.residuals().to_vec(),
        seam: SeamFile { interior: pairs(&grid.seam().interior), exterior: pairs(&grid.seam().exterior) },
    }
}

pub fn write_grid(path: &Path, grid: &QCExtensionGrid) -> Result<(), CliError> {
    let bytes = envelope::to_bytes(&grid_file(grid))?;
    fs::write(path, bytes).map_err(|e| CliError::io(path.to_path_buf(), e))
}

pub fn parse_grid(text: &str) -> Result<QCExtensionGrid, CliError> {
    let file: GridFile = serde_json::from_str(text).map_err(|e| CliError::Format(format!("grid JSON: {e}")))?;
    let grid = PolarGrid::new(file.grid.radii, file.grid.angular_count)?;
    Ok(QCExtensionGrid::from_parts(
        grid,
        complexes(&file.values),
        file.residuals,
        complexes(&file.seam.interior),
        complexes(&file.seam.exterior),
    )?)
}

pub fn read_grid(path: &Path) -> Result<QCExtensionGrid, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path.to_path_buf(), e))?;
    parse_grid(&text)
}

#[derive(Serialize)]
struct TraceRow {
    rho: String,
    theta_index: usize,
    re: String,
    im: String,
}

fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace_csv(path: &Path, field: &BeltramiField) -> Result<(), CliError> {
    let mut out = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for circle in field.circles() {
        for (j, mu) in circle.trace.iter().enumerate() {
            out.serialize(TraceRow { rho: exact(circle.rho), theta_index: j, re: exact(mu.re), im: exact(mu.im) })
                .map_err(|e| csv_error(path, e))?;
        }
    }
    out.flush().map_err(|e| CliError::io(path.to_path_buf(), e))
}

#[derive(Deserialize)]
struct TraceRowIn {
    rho: f64,
    theta_index: usize,
    #[serde(alias = "re_mu")]
    re: f64,
    #[serde(alias = "im_mu")]
    im: f64,
}

/// Reads traces; every circle must list each `theta_index` in `0..N` once.
pub fn read_trace_csv(path: &Path, source: MuSource) -> Result<BeltramiField, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| csv_error(path, e))?;
    let mut circles: Vec<(f64, Vec<Option<Complex64>>)> = Vec::new();
    for row in reader.deserialize::<TraceRowIn>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let slot = match circles.iter().position(|(rho, _)| *rho == row.rho) {
            Some(i) => i,
            None => {
                circles.push((row.rho, Vec::new()));
                circles.len() - 1
            }
        };
        let trace = &mut circles[slot].1;
        if trace.len() <= row.theta_index {
            trace.resize(row.theta_index + 1, None);
        }
        if trace[row.theta_index].replace(Complex64::new(row.re, row.im)).is_some() {
            return Err(CliError::Format(format!("{}: duplicate sample at rho {}, index {}", path.display(), row.rho, row.theta_index)));
        }
    }
    if circles.is_empty() {
        return Err(CliError::Format(format!("{}: no samples", path.display())));
    }
    let circles = circles
        .into_iter()
        .map(|(rho, trace)| {
            let trace: Option<Vec<Complex64>> = trace.into_iter().collect();
            trace
                .map(|trace| BeltramiCircle { rho, trace })
                .ok_or_else(|| CliError::Format(format!("{}: missing samples on the circle of radius {rho}", path.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BeltramiField::from_circles(circles, source)?)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path.to_path_buf(), io),
            other => CliError::Format(format!("{}: {other:?}", path.display())),
        }
    } else {
        CliError::Format(format!("{}: {e}", path.display()))
    }
}
