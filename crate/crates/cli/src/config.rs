//! Run configuration shared by flags and TOML config files.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use mzipmed_core::simulation::ScenarioConfig;
use mzipmed_core::{MediatorType, OutcomeModel, Scale, SeMethod};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Mzip,
    Poisson,
}

impl From<ModelArg> for OutcomeModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Mzip => OutcomeModel::Mzip,
            ModelArg::Poisson => OutcomeModel::Poisson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SeArg {
    /// Delta method with the model-based covariance.
    Delta,
    /// Delta method with the sandwich covariance.
    DeltaRobust,
    /// Nonparametric percentile bootstrap.
    Bootstrap,
}

impl From<SeArg> for SeMethod {
    fn from(s: SeArg) -> Self {
        match s {
            SeArg::Delta => SeMethod::DeltaModel,
            SeArg::DeltaRobust => SeMethod::DeltaRobust,
            SeArg::Bootstrap => SeMethod::Bootstrap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleArg {
    Ratio,
    Difference,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Ratio => Scale::Ratio,
            ScaleArg::Difference => Scale::Difference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MediatorTypeArg {
    Continuous,
    Binary,
}

impl From<MediatorTypeArg> for MediatorType {
    fn from(m: MediatorTypeArg) -> Self {
        match m {
            MediatorTypeArg::Continuous => MediatorType::Continuous,
            MediatorTypeArg::Binary => MediatorType::Binary,
        }
    }
}

/// Every subcommand parameter, keyed exactly like its command-line flag.
///
/// Unset fields fall back to the subcommand's default. A config file may
/// hold keys for several subcommands; each reads only the keys it uses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exposure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mediator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariates: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xstar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cvals: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_cde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mediator_type: Option<MediatorTypeArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se: Option<SeArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boot_reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub with_poisson: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<ModelArg>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_methods: Option<Vec<SeArg>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Custom simulation scenario, used in place of a preset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )*
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::input(format!("invalid config: {}", e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config '{}': {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Replaces every field that is set in `flags`.
    pub fn overlay(mut self, flags: RunConfig) -> Self {
        overlay!(self, flags;
            data, outcome, exposure, mediator, covariates, x, xstar, cvals, m_cde,
            mediator_type, scale, interaction, se, boot_reps, seed, level, model,
            with_poisson, preset, n, reps, threads, methods, se_methods, out, scenario,
        );
        self
    }
}
