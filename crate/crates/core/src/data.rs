//! Rectangular datasets with named columns and analysis roles.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roles {
    pub outcome: String,
    pub exposure: String,
    pub mediator: String,
    #[serde(default)]
    pub covariates: Vec<String>,
}

/// Column-major numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    roles: Roles,
}

impl Dataset {
    /// Builds a dataset and validates that every role resolves, columns are
    /// of equal length, mapped cells are finite and the outcome holds
    /// non-negative integers.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, roles: Roles) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch("columns differ in length".into()));
        }
        let ds = Self { names, columns, roles };
        for name in ds.mapped_names() {
            let col = ds.column(name)?;
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("row {i}, column '{name}': value is not finite")));
            }
        }
        let y = ds.column(&ds.roles.outcome)?;
        if let Some(i) = y.iter().position(|v| *v < 0.0 || v.fract() != 0.0) {
            return Err(Error::InvalidInput(format!(
                "row {i}, column '{}': outcome must be a non-negative integer, got {}",
                ds.roles.outcome, y[i]
            )));
        }
        Ok(ds)
    }

    fn mapped_names(&self) -> impl Iterator<Item = &str> {
        [&self.roles.outcome, &self.roles.exposure, &self.roles.mediator]
            .into_iter()
            .chain(self.roles.covariates.iter())
            .map(String::as_str)
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn roles(&self) -> &Roles {
        &self.roles
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|j| self.columns[j].as_slice())
            .ok_or_else(|| Error::InvalidInput(format!("unknown column '{name}'")))
    }

    /// Model-ready arrays for the mapped roles.
    pub fn mediation_data(&self) -> Result<MediationData> {
        let covariates = self
            .roles
            .covariates
            .iter()
            .map(|c| self.column(c).map(<[f64]>::to_vec))
            .collect::<Result<Vec<_>>>()?;
        Ok(MediationData {
            y: self.column(&self.roles.outcome)?.to_vec(),
            x: self.column(&self.roles.exposure)?.to_vec(),
            m: self.column(&self.roles.mediator)?.to_vec(),
            covariates,
        })
    }
}

/// Outcome, exposure, mediator and covariate columns of one analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct MediationData {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub m: Vec<f64>,
    /// One vector per covariate.
    pub covariates: Vec<Vec<f64>>,
}

impl MediationData {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.len()
    }

    pub fn covariate_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.covariates.iter().map(|c| c.iter().sum::<f64>() / n).collect()
    }

    /// `[1, x, c…]`.
    pub fn mediator_design(&self) -> DMatrix<f64> {
        let n = self.n();
        let k = self.n_covariates();
        let mut z = DMatrix::from_element(n, 2 + k, 1.0);
        z.column_mut(1).copy_from_slice(&self.x);
        for (j, c) in self.covariates.iter().enumerate() {
            z.column_mut(2 + j).copy_from_slice(c);
        }
        z
    }

    /// `[1, x, m, (x·m), c…]`.
    pub fn outcome_design(&self, interaction: bool) -> DMatrix<f64> {
        let n = self.n();
        let k = self.n_covariates();
        let off = 3 + usize::from(interaction);
        let mut z = DMatrix::from_element(n, off + k, 1.0);
        z.column_mut(1).copy_from_slice(&self.x);
        z.column_mut(2).copy_from_slice(&self.m);
        if interaction {
            for i in 0..n {
                z[(i, 3)] = self.x[i] * self.m[i];
            }
        }
        for (j, c) in self.covariates.iter().enumerate() {
            z.column_mut(off + j).copy_from_slice(c);
        }
        z
    }

    pub fn outcome(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.y)
    }

    pub fn mediator(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.m)
    }

    /// Rows selected by `idx`, with repetition.
    pub fn resample(&self, idx: &[usize]) -> Self {
        let pick = |v: &Vec<f64>| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self {
            y: pick(&self.y),
            x: pick(&self.x),
            m: pick(&self.m),
            covariates: self.covariates.iter().map(pick).collect(),
        }
    }

    /// Outcome-model coefficient labels matching [`Self::outcome_design`].
    pub fn outcome_labels(roles: &Roles, interaction: bool) -> Vec<String> {
        let mut out = vec!["(intercept)".to_string(), roles.exposure.clone(), roles.mediator.clone()];
        if interaction {
            out.push(format!("{}:{}", roles.exposure, roles.mediator));
        }
        out.extend(roles.covariates.iter().cloned());
        out
    }
}
