//! Grid sweep engine: evaluates report rows in parallel with a
//! deterministic reduction order and writes the output files.

use std::path::{Path, PathBuf};

use fermifisher::gaussian;
use fermifisher::models::StateFamily;
use fermifisher::sld::{self, SldQuadratic};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{OutputFormat, OutputKind, RunConfig};
use crate::report::{self, ReportRow, COMPAT_TOL};
use crate::{CliError, CliResult};

/// Name of the env var capping sweep parallelism (0 = auto).
pub const THREADS_ENV: &str = "FERMIFISHER_THREADS";

pub struct RunOutcome {
    pub rows: usize,
    pub output_path: PathBuf,
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

struct PointResult {
    row: ReportRow,
    slds: Option<Vec<SldQuadratic>>,
}

fn evaluate_point(
    config: &RunConfig,
    family: &StateFamily,
    cost: Option<&nalgebra::DMatrix<f64>>,
    point: &[f64],
) -> Result<PointResult, fermifisher::Error> {
    let d = family.param_count();
    let g = family.evaluate(point)?;

    let mut row = ReportRow {
        point: point.to_vec(),
        j_upper: None,
        u_upper: None,
        purity: None,
        bound: None,
        compatible: None,
        max_abs_u: None,
        singular_pairs: None,
        residual: None,
    };
    let mut slds = None;

    if report::needs_solve(&config.outputs) {
        let tangents = config.tangents_at(family, point)?;
        let res = sld::qfim(&g, &tangents, config.singular_policy)?;
        if config.outputs.contains(&OutputKind::Qfim) {
            let mut upper = Vec::with_capacity(d * (d + 1) / 2);
            for i in 0..d {
                for j in i..d {
                    upper.push(res.j_matrix()[(i, j)]);
                }
            }
            row.j_upper = Some(upper);
        }
        if config.outputs.contains(&OutputKind::Uhlmann) {
            let mut upper = Vec::with_capacity(d * d.saturating_sub(1) / 2);
            for i in 0..d {
                for j in (i + 1)..d {
                    upper.push(res.u_matrix()[(i, j)]);
                }
            }
            row.u_upper = Some(upper);
            let verdict = sld::compatibility_check(&res, COMPAT_TOL);
            row.compatible = Some(verdict.compatible);
            row.max_abs_u = Some(verdict.max_abs_u);
        }
        if let Some(w) = cost {
            row.bound = Some(sld::cr_bound_scalar(&res, w)?);
        }
        row.singular_pairs = Some(res.singular_pairs());
        row.residual = Some(res.max_residual());
        if config.outputs.contains(&OutputKind::SldDump) {
            slds = Some(res.slds().to_vec());
        }
    }
    if config.outputs.contains(&OutputKind::Purity) {
        row.purity = Some(gaussian::purity(&g));
    }
    Ok(PointResult { row, slds })
}

#[derive(Serialize)]
struct SldSidecarEntry<'a> {
    point: &'a [f64],
    slds: &'a [SldQuadratic],
}

#[derive(Serialize)]
struct ErrorSidecar<'a> {
    point_index: usize,
    point: &'a [f64],
    error: String,
}

/// Runs the sweep: one ReportRow per grid point, deterministic output
/// for a fixed config regardless of thread count.
pub fn run(config: &RunConfig) -> CliResult<RunOutcome> {
    let validated = config.validate()?;
    let family = &validated.family;
    let pool = thread_pool()?;

    let results: Vec<Result<PointResult, fermifisher::Error>> = pool.install(|| {
        validated
            .points
            .par_iter()
            .map(|p| evaluate_point(config, family, validated.cost_matrix.as_ref(), p))
            .collect()
    });

    // first failing index decides the report, independent of schedule
    for (index, res) in results.iter().enumerate() {
        if let Err(e) = res {
            let sidecar = ErrorSidecar {
                point_index: index,
                point: &validated.points[index],
                error: e.to_string(),
            };
            let sidecar_path = error_sidecar_path(&config.output_path);
            let text = serde_json::to_string_pretty(&sidecar)
                .unwrap_or_else(|_| format!("{{\"error\": \"{e}\"}}"));
            report::write_atomic(&sidecar_path, text.as_bytes())?;
            return Err(CliError::Numerical {
                index,
                point: validated.points[index].clone(),
                message: e.to_string(),
            });
        }
    }
    let results: Vec<PointResult> = results.into_iter().map(|r| r.unwrap()).collect();

    let rows: Vec<ReportRow> = results.iter().map(|r| r.row.clone()).collect();
    match config.format {
        OutputFormat::Csv => report::write_csv(
            &config.output_path,
            family.parameter_names(),
            family.param_count(),
            &config.outputs,
            &rows,
        )?,
        OutputFormat::Json => report::write_json(&config.output_path, &rows)?,
    }

    if config.outputs.contains(&OutputKind::SldDump) {
        let entries: Vec<SldSidecarEntry> = results
            .iter()
            .filter_map(|r| {
                r.slds.as_ref().map(|s| SldSidecarEntry {
                    point: &r.row.point,
                    slds: s,
                })
            })
            .collect();
        let text = serde_json::to_string_pretty(&entries)
            .map_err(|e| CliError::Config(format!("serialize sld sidecar: {e}")))?;
        report::write_atomic(&sld_sidecar_path(&config.output_path), text.as_bytes())?;
    }

    Ok(RunOutcome {
        rows: rows.len(),
        output_path: config.output_path.clone(),
    })
}

pub fn error_sidecar_path(output: &Path) -> PathBuf {
    let mut os = output.as_os_str().to_os_string();
    os.push(".error.json");
    PathBuf::from(os)
}

pub fn sld_sidecar_path(output: &Path) -> PathBuf {
    let mut os = output.as_os_str().to_os_string();
    os.push(".sld.json");
    PathBuf::from(os)
}
