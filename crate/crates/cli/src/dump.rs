//! `sld-dump`: the closed-form (K, η) per parameter at one point,
//! optionally with the dense SLD spectrum and eigenbasis (the optimal
//! measurement) when the mode count fits the oracle.

use std::path::PathBuf;

use fermifisher::oracle;
use fermifisher::sld::{self, SldQuadratic};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::report::write_atomic;
use crate::{CliError, CliResult};

#[derive(Debug, Serialize, Deserialize)]
pub struct SldDump {
    pub family: String,
    pub point: Vec<f64>,
    pub parameter_names: Vec<String>,
    pub entries: Vec<SldDumpEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SldDumpEntry {
    pub parameter: String,
    pub sld: SldQuadratic,
    /// Dense SLD eigendecomposition; the eigenbasis is the optimal
    /// projective measurement for this parameter.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense: Option<DenseSld>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DenseSld {
    pub spectrum: Vec<f64>,
    pub eigenbasis_re: Vec<Vec<f64>>,
    pub eigenbasis_im: Vec<Vec<f64>>,
}

/// Computes and writes the dump to the config's output path.
pub fn sld_dump(config: &RunConfig, point: &[f64], dense: bool) -> CliResult<PathBuf> {
    let family = config.build_family()?;
    family
        .contains(point)
        .map_err(|e| CliError::Config(format!("point {point:?}: {e}")))?;

    let g = family
        .evaluate(point)
        .map_err(|e| numerical(point, &e))?;
    let tangents = config
        .tangents_at(&family, point)
        .map_err(|e| numerical(point, &e))?;
    let res =
        sld::qfim(&g, &tangents, config.singular_policy).map_err(|e| numerical(point, &e))?;

    let needs_dense = dense && family.modes() <= oracle::N_MAX;
    let ops = if needs_dense {
        Some(oracle::majorana_matrices(family.modes()).map_err(|e| numerical(point, &e))?)
    } else {
        None
    };

    let mut entries = Vec::with_capacity(res.slds().len());
    for (name, s) in family.parameter_names().iter().zip(res.slds()) {
        let dense_part = match &ops {
            None => None,
            Some(ops) => {
                let l = oracle::dense_quadratic(s.krep(), s.eta(), ops);
                let (basis, values) =
                    oracle::hermitian_eigen(&l).map_err(|e| numerical(point, &e))?;
                let dim = basis.nrows();
                Some(DenseSld {
                    spectrum: values.iter().cloned().collect(),
                    eigenbasis_re: (0..dim)
                        .map(|i| (0..dim).map(|j| basis[(i, j)].re).collect())
                        .collect(),
                    eigenbasis_im: (0..dim)
                        .map(|i| (0..dim).map(|j| basis[(i, j)].im).collect())
                        .collect(),
                })
            }
        };
        entries.push(SldDumpEntry {
            parameter: name.clone(),
            sld: s.clone(),
            dense: dense_part,
        });
    }

    let doc = SldDump {
        family: family.name().to_string(),
        point: point.to_vec(),
        parameter_names: family.parameter_names().to_vec(),
        entries,
    };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Config(format!("serialize dump: {e}")))?;
    write_atomic(&config.output_path, text.as_bytes())?;
    Ok(config.output_path.clone())
}

fn numerical(point: &[f64], e: &fermifisher::Error) -> CliError {
    CliError::Numerical {
        index: 0,
        point: point.to_vec(),
        message: e.to_string(),
    }
}
