//! JSON document for learned dependency groups: the output of `coax detect`
//! and the optional `--models` input of `coax build`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::softfd::{validate_groups, CorrelationGroup, SoftFdModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    /// Column names in dimension order.
    pub dims: Vec<String>,
    pub groups: Vec<GroupEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub predictor: usize,
    pub dependents: Vec<DependentEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependentEntry {
    pub dim: usize,
    pub m: f64,
    pub b: f64,
    pub eps_lb: f64,
    pub eps_ub: f64,
    pub fit_quality: f64,
}

impl ModelFile {
    pub fn from_groups(dims: &[String], groups: &[CorrelationGroup]) -> Self {
        let groups = groups
            .iter()
            .map(|g| GroupEntry {
                predictor: g.predictor,
                dependents: g
                    .models
                    .iter()
                    .map(|m| DependentEntry {
                        dim: m.dependent_dim,
                        m: m.slope,
                        b: m.intercept,
                        eps_lb: m.eps_lb,
                        eps_ub: m.eps_ub,
                        fit_quality: m.fit_quality,
                    })
                    .collect(),
            })
            .collect();
        Self {
            dims: dims.to_vec(),
            groups,
        }
    }

    /// Converts back to groups, checking them against `n_dims`.
    pub fn to_groups(&self, n_dims: usize) -> Result<Vec<CorrelationGroup>> {
        if self.dims.len() != n_dims {
            return Err(Error::DimMismatch {
                expected: n_dims,
                got: self.dims.len(),
            });
        }
        let groups: Vec<CorrelationGroup> = self
            .groups
            .iter()
            .map(|g| CorrelationGroup {
                predictor: g.predictor,
                models: g
                    .dependents
                    .iter()
                    .map(|e| SoftFdModel {
                        indexed_dim: g.predictor,
                        dependent_dim: e.dim,
                        slope: e.m,
                        intercept: e.b,
                        eps_lb: e.eps_lb,
                        eps_ub: e.eps_ub,
                        fit_quality: e.fit_quality,
                    })
                    .collect(),
            })
            .collect();
        validate_groups(&groups, n_dims)?;
        Ok(groups)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}
