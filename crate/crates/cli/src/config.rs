//! Run configuration: JSON schema, validation, and grid expansion.

use std::path::{Path, PathBuf};

use fermifisher::gaussian::CorrelationMatrix;
use fermifisher::models::{Boundary, StateFamily};
use fermifisher::skewlin::RealAntisym;
use fermifisher::sld::SingularPolicy;
use fermifisher::tolerances::FD_STEP;
use nalgebra::DMatrix;
use serde::Deserialize;

use crate::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilyConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub derivative: DerivativeConfig,
    pub cost_matrix: Option<Vec<Vec<f64>>>,
    pub outputs: Vec<OutputKind>,
    pub output_path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_policy")]
    pub singular_policy: SingularPolicy,
    /// Reserved for randomized diagnostics; current outputs are all
    /// deterministic and ignore it.
    #[serde(default)]
    pub seed: u64,
}



fn default_policy() -> SingularPolicy {
    SingularPolicy::Zero
}

#[derive(Debug, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    SingleMode,
    Thermal {
        coefficient: RealAntisym,
    },
    Rotation {
        base: CorrelationMatrix,
        generators: Vec<RealAntisym>,
    },
    KitaevChain {
        sites: usize,
        boundary: Boundary,
        beta: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub axes: Option<Vec<AxisSpec>>,
    pub points: Option<Vec<Vec<f64>>>,
}

/// Uniform axis with `steps` points from min to max inclusive;
/// steps = 1 pins the axis at `min`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum DerivativeConfig {
    #[default]
    Analytic,
    FiniteDiff {
        #[serde(default = "default_h")]
        h: f64,
        #[serde(default = "default_richardson")]
        richardson: bool,
    },
}

fn default_h() -> f64 {
    FD_STEP
}

fn default_richardson() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Qfim,
    Uhlmann,
    Purity,
    Bound,
    SldDump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A config checked against every structural rule: family built, grid
/// expanded and inside the domain, cost matrix shaped.
pub struct ValidatedRun {
    pub family: StateFamily,
    pub points: Vec<Vec<f64>>,
    pub cost_matrix: Option<DMatrix<f64>>,
}

/// Parses a config file with serde-path error positions.
pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| CliError::Config(format!("{} (at {})", e.inner(), e.path())))
}

impl RunConfig {
    pub fn build_family(&self) -> CliResult<StateFamily> {
        let fam = match &self.family {
            FamilyConfig::SingleMode => StateFamily::single_mode(),
            FamilyConfig::Thermal { coefficient } => StateFamily::thermal(coefficient)
                .map_err(|e| CliError::Config(format!("family.coefficient: {e}")))?,
            FamilyConfig::Rotation { base, generators } => {
                StateFamily::rotation(base.clone(), generators.clone())
                    .map_err(|e| CliError::Config(format!("family.generators: {e}")))?
            }
            FamilyConfig::KitaevChain {
                sites,
                boundary,
                beta,
            } => StateFamily::kitaev_chain(*sites, *boundary, *beta)
                .map_err(|e| CliError::Config(format!("family: {e}")))?,
        };
        Ok(fam)
    }

    pub fn validate(&self) -> CliResult<ValidatedRun> {
        let family = self.build_family()?;
        let d = family.param_count();

        let points = self.grid_points(d)?;
        if points.is_empty() {
            return Err(CliError::Config("grid expands to zero points".into()));
        }
        for (idx, p) in points.iter().enumerate() {
            family.contains(p).map_err(|e| {
                CliError::Config(format!("grid point {idx} {p:?} invalid: {e}"))
            })?;
        }

        if self.outputs.is_empty() {
            return Err(CliError::Config("outputs must name at least one quantity".into()));
        }
        let cost_matrix = match &self.cost_matrix {
            None => {
                if self.outputs.contains(&OutputKind::Bound) {
                    return Err(CliError::Config(
                        "outputs include 'bound' but no cost_matrix given".into(),
                    ));
                }
                None
            }
            Some(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(CliError::Config(format!(
                        "cost_matrix must be {d}x{d} for this family"
                    )));
                }
                let w = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
                if (&w - w.transpose()).iter().any(|x| x.abs() > 1e-12) {
                    return Err(CliError::Config("cost_matrix must be symmetric".into()));
                }
                if w.clone().symmetric_eigen().eigenvalues.iter().any(|&e| e <= 0.0) {
                    return Err(CliError::Config(
                        "cost_matrix must be positive definite".into(),
                    ));
                }
                Some(w)
            }
        };

        Ok(ValidatedRun {
            family,
            points,
            cost_matrix,
        })
    }

    fn grid_points(&self, d: usize) -> CliResult<Vec<Vec<f64>>> {
        match (&self.grid.axes, &self.grid.points) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "grid must give either axes or points, not both".into(),
            )),
            (None, None) => Err(CliError::Config("grid needs axes or points".into())),
            (None, Some(points)) => {
                for (i, p) in points.iter().enumerate() {
                    if p.len() != d {
                        return Err(CliError::Config(format!(
                            "grid point {i} has {} values, family has {d} parameters",
                            p.len()
                        )));
                    }
                }
                Ok(points.clone())
            }
            (Some(axes), None) => {
                if axes.len() != d {
                    return Err(CliError::Config(format!(
                        "grid has {} axes, family has {d} parameters",
                        axes.len()
                    )));
                }
                let mut values_per_axis = Vec::with_capacity(d);
                for (i, ax) in axes.iter().enumerate() {
                    if ax.steps == 0 {
                        return Err(CliError::Config(format!("grid axis {i}: steps must be ≥ 1")));
                    }
                    if !(ax.min.is_finite() && ax.max.is_finite()) || ax.min > ax.max {
                        return Err(CliError::Config(format!(
                            "grid axis {i}: bad range [{}, {}]",
                            ax.min, ax.max
                        )));
                    }
                    let vals: Vec<f64> = if ax.steps == 1 {
                        vec![ax.min]
                    } else {
                        (0..ax.steps)
                            .map(|k| {
                                ax.min
                                    + (ax.max - ax.min) * (k as f64) / ((ax.steps - 1) as f64)
                            })
                            .collect()
                    };
                    values_per_axis.push(vals);
                }
                // row-major expansion: first axis slowest
                let mut points = vec![Vec::with_capacity(d)];
                for axis_vals in &values_per_axis {
                    let mut next = Vec::with_capacity(points.len() * axis_vals.len());
                    for prefix in &points {
                        for &v in axis_vals {
                            let mut p = prefix.clone();
                            p.push(v);
                            next.push(p);
                        }
                    }
                    points = next;
                }
                Ok(points)
            }
        }
    }

    /// Per-parameter tangent provider respecting the derivative config.
    pub fn tangents_at(
        &self,
        family: &StateFamily,
        point: &[f64],
    ) -> Result<Vec<RealAntisym>, fermifisher::Error> {
        match self.derivative {
            DerivativeConfig::Analytic => family.tangents(point),
            DerivativeConfig::FiniteDiff { h, richardson } => (0..family.param_count())
                .map(|mu| fermifisher::models::finite_diff(family, point, mu, h, richardson))
                .collect(),
        }
    }
}
