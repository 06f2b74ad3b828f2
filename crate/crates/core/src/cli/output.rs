use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::protocols::{Comparison, ProtocolReport};
use crate::states::{AxisQuantity, DensityGrid, GridAxis, GridKind};

/// 17 significant digits: enough for every f64 to survive a round trip.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn kind_name(kind: GridKind) -> &'static str {
    match kind {
        GridKind::MomentumCoherence => "momentum-coherence",
        GridKind::PositionProbability => "position-probability",
    }
}

/// Renders a grid as CSV: `# key=value` header lines, a column line, then
/// one row per grid point with rows varying slowest.
pub fn grid_to_csv(grid: &DensityGrid) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# kind={}", kind_name(grid.kind));
    let _ = writeln!(out, "# rows={}", grid.rows.label);
    let _ = writeln!(out, "# cols={}", grid.cols.label);
    let _ = writeln!(out, "# row_unit={}", grid.rows.quantity.unit());
    let _ = writeln!(out, "# col_unit={}", grid.cols.quantity.unit());
    let _ = writeln!(out, "# shape={}x{}", grid.rows.len(), grid.cols.len());
    for (k, v) in &grid.metadata {
        let _ = writeln!(out, "# {k}={}", v.replace('\n', " "));
    }
    match grid.kind {
        GridKind::MomentumCoherence => {
            let _ = writeln!(out, "{},{},re,im", grid.rows.label, grid.cols.label);
        }
        GridKind::PositionProbability => {
            let _ = writeln!(out, "{},{},value", grid.rows.label, grid.cols.label);
        }
    }
    for (i, r) in grid.rows.values.iter().enumerate() {
        for (j, c) in grid.cols.values.iter().enumerate() {
            let z = grid.get(i, j);
            match grid.kind {
                GridKind::MomentumCoherence => {
                    let _ = writeln!(out, "{},{},{},{}", num(*r), num(*c), num(z.re), num(z.im));
                }
                GridKind::PositionProbability => {
                    let _ = writeln!(out, "{},{},{}", num(*r), num(*c), num(z.re));
                }
            }
        }
    }
    out
}

pub fn emit_grid(grid: &DensityGrid, path: &Path) -> Result<()> {
    fs::write(path, grid_to_csv(grid))?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::GridFormat(msg.into())
}

/// Inverse of [`grid_to_csv`].
pub fn parse_grid(text: &str) -> Result<DensityGrid> {
    let mut header = BTreeMap::new();
    let mut lines = text.lines();
    let columns = loop {
        let line = lines.next().ok_or_else(|| bad("missing column line"))?;
        match line.strip_prefix("# ") {
            Some(entry) => {
                let (k, v) = entry.split_once('=').ok_or_else(|| bad(format!("bad header line {line:?}")))?;
                header.insert(k.to_string(), v.to_string());
            }
            None => break line,
        }
    };
    let mut take = |k: &str| header.remove(k).ok_or_else(|| bad(format!("header lacks `{k}`")));
    let kind = match take("kind")?.as_str() {
        "momentum-coherence" => GridKind::MomentumCoherence,
        "position-probability" => GridKind::PositionProbability,
        other => return Err(bad(format!("unknown grid kind {other:?}"))),
    };
    let row_label = take("rows")?;
    let col_label = take("cols")?;
    let unit = |u: String| match u.as_str() {
        "p0" => Ok(AxisQuantity::Momentum),
        "x0" => Ok(AxisQuantity::Position),
        other => Err(bad(format!("unknown unit {other:?}"))),
    };
    let row_q = unit(take("row_unit")?)?;
    let col_q = unit(take("col_unit")?)?;
    let shape = take("shape")?;
    let (nr, nc) = shape
        .split_once('x')
        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
        .ok_or_else(|| bad(format!("bad shape {shape:?}")))?;
    let width = match kind {
        GridKind::MomentumCoherence => 4,
        GridKind::PositionProbability => 3,
    };
    if columns.split(',').count() != width {
        return Err(bad(format!("column line {columns:?} does not match the grid kind")));
    }

    let mut rows = Vec::with_capacity(nr);
    let mut cols = Vec::with_capacity(nc);
    let mut values = Vec::with_capacity(nr * nc);
    for (k, line) in lines.enumerate() {
        let fields = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("data line {}: {e}", k + 1)))?;
        if fields.len() != width {
            return Err(bad(format!("data line {} has {} fields", k + 1, fields.len())));
        }
        let (i, j) = (k / nc.max(1), k % nc.max(1));
        if j == 0 {
            rows.push(fields[0]);
        }
        if i == 0 {
            cols.push(fields[1]);
        }
        values.push(Complex64::new(fields[2], if width == 4 { fields[3] } else { 0.0 }));
    }
    if values.len() != nr * nc {
        return Err(bad(format!("expected {} data lines, found {}", nr * nc, values.len())));
    }
    let mut grid = DensityGrid::new(
        kind,
        GridAxis::new(row_label, row_q, rows)?,
        GridAxis::new(col_label, col_q, cols)?,
        values,
    )?;
    for (k, v) in header {
        grid = grid.with_meta(&k, v);
    }
    Ok(grid)
}

#[derive(Debug, Clone, Serialize)]
struct ScanSummary<'a> {
    protocol: String,
    backend: String,
    parameter: &'a str,
    observable: &'a str,
    points: usize,
    visibility: f64,
    validity: &'a crate::protocols::Validity,
    diagnostics: &'a BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_backend_delta: Option<f64>,
}

/// Writes the sweep as CSV (`alpha,P_e` for the Ramsey scan) and a JSON
/// summary next to it. Returns the paths written.
pub fn emit_scan(report: &ProtocolReport, path: &Path, comparison: Option<&Comparison>) -> Result<Vec<PathBuf>> {
    let scan = report
        .scan
        .as_ref()
        .filter(|s| !s.values.is_empty())
        .ok_or_else(|| Error::invalid("scan", "report has no parameter sweep"))?;
    let mut csv = format!("{},{}\n", scan.parameter, scan.observable);
    for (v, r) in scan.values.iter().zip(&scan.results) {
        let _ = writeln!(csv, "{},{}", num(*v), num(*r));
    }
    fs::write(path, csv)?;
    let summary = ScanSummary {
        protocol: report.protocol.to_string(),
        backend: report.backend.to_string(),
        parameter: &scan.parameter,
        observable: &scan.observable,
        points: scan.values.len(),
        visibility: scan.visibility(),
        validity: &report.validity,
        diagnostics: &report.diagnostics,
        max_backend_delta: comparison.and_then(|c| c.scan_max_delta),
    };
    let summary_path = path.with_extension("json");
    write_json(&summary, &summary_path)?;
    Ok(vec![path.to_path_buf(), summary_path])
}

pub fn write_json(value: &impl Serialize, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Hex SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
