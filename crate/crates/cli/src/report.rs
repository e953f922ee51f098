//! Report rows and the CSV/JSON emitters. Column order is fixed by the
//! schema version; floats print in shortest round-trip decimal.

use std::io::Write;

use serde::Serialize;

use crate::config::OutputKind;
use crate::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "fermifisher.report.v1";

/// Compatibility verdict threshold: compatible iff
/// max|U| ≤ COMPAT_TOL · (1 + ‖J‖_max).
pub const COMPAT_TOL: f64 = 1e-10;

/// One grid point's results; optional fields follow the requested
/// outputs.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub point: Vec<f64>,
    /// Row-major upper triangle of J including the diagonal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_upper: Option<Vec<f64>>,
    /// Strict upper triangle of U.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_upper: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compatible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singular_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

/// Whether any requested quantity needs the Lyapunov solve.
pub fn needs_solve(outputs: &[OutputKind]) -> bool {
    outputs.iter().any(|o| {
        matches!(
            o,
            OutputKind::Qfim | OutputKind::Uhlmann | OutputKind::Bound | OutputKind::SldDump
        )
    })
}

/// Fixed column list for the CSV layout, given family parameters and
/// requested outputs.
pub fn columns(param_names: &[String], d: usize, outputs: &[OutputKind]) -> Vec<String> {
    let mut cols: Vec<String> = param_names.to_vec();
    if outputs.contains(&OutputKind::Qfim) {
        for i in 1..=d {
            for j in i..=d {
                cols.push(format!("J_{i}{j}"));
            }
        }
    }
    if outputs.contains(&OutputKind::Uhlmann) {
        for i in 1..=d {
            for j in (i + 1)..=d {
                cols.push(format!("U_{i}{j}"));
            }
        }
    }
    if outputs.contains(&OutputKind::Purity) {
        cols.push("purity".into());
    }
    if outputs.contains(&OutputKind::Bound) {
        cols.push("bound".into());
    }
    if outputs.contains(&OutputKind::Uhlmann) {
        cols.push("compatible".into());
        cols.push("max_abs_u".into());
    }
    if needs_solve(outputs) {
        cols.push("singular_pairs".into());
        cols.push("residual".into());
    }
    cols
}

fn push_cell(line: &mut String, first: &mut bool, cell: &str) {
    if !*first {
        line.push(',');
    }
    *first = false;
    line.push_str(cell);
}

fn row_cells(row: &ReportRow, outputs: &[OutputKind]) -> String {
    let mut line = String::new();
    let mut first = true;
    for v in &row.point {
        push_cell(&mut line, &mut first, &v.to_string());
    }
    if outputs.contains(&OutputKind::Qfim) {
        for v in row.j_upper.as_deref().unwrap_or_default() {
            push_cell(&mut line, &mut first, &v.to_string());
        }
    }
    if outputs.contains(&OutputKind::Uhlmann) {
        for v in row.u_upper.as_deref().unwrap_or_default() {
            push_cell(&mut line, &mut first, &v.to_string());
        }
    }
    if outputs.contains(&OutputKind::Purity) {
        push_cell(&mut line, &mut first, &row.purity.unwrap_or(f64::NAN).to_string());
    }
    if outputs.contains(&OutputKind::Bound) {
        push_cell(&mut line, &mut first, &row.bound.unwrap_or(f64::NAN).to_string());
    }
    if outputs.contains(&OutputKind::Uhlmann) {
        push_cell(
            &mut line,
            &mut first,
            if row.compatible.unwrap_or(true) { "true" } else { "false" },
        );
        push_cell(
            &mut line,
            &mut first,
            &row.max_abs_u.unwrap_or(f64::NAN).to_string(),
        );
    }
    if needs_solve(outputs) {
        push_cell(
            &mut line,
            &mut first,
            &row.singular_pairs.unwrap_or(0).to_string(),
        );
        push_cell(
            &mut line,
            &mut first,
            &row.residual.unwrap_or(f64::NAN).to_string(),
        );
    }
    line
}

/// Writes the CSV report: a schema comment line, the header row, one
/// line per grid point, UTF-8 with LF endings.
pub fn write_csv(
    path: &std::path::Path,
    param_names: &[String],
    d: usize,
    outputs: &[OutputKind],
    rows: &[ReportRow],
) -> CliResult<()> {
    let mut buf = String::new();
    buf.push_str("# ");
    buf.push_str(SCHEMA_VERSION);
    buf.push('\n');
    buf.push_str(&columns(param_names, d, outputs).join(","));
    buf.push('\n');
    for row in rows {
        buf.push_str(&row_cells(row, outputs));
        buf.push('\n');
    }
    write_atomic(path, buf.as_bytes())
}

/// Writes the JSON report: an object with the schema token and the row
/// array.
pub fn write_json(path: &std::path::Path, rows: &[ReportRow]) -> CliResult<()> {
    #[derive(Serialize)]
    struct Doc<'a> {
        schema: &'static str,
        rows: &'a [ReportRow],
    }
    let doc = Doc {
        schema: SCHEMA_VERSION,
        rows,
    };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Config(format!("serialize report: {e}")))?;
    write_atomic(path, text.as_bytes())
}

pub(crate) fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> CliResult<()> {
    let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    Ok(())
}
