//! Command-line flags. Each subcommand converts its flags into a
//! [`RunConfig`] that overrides any config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{MediatorTypeArg, ModelArg, RunConfig, ScaleArg, SeArg};

#[derive(Debug, Parser)]
#[command(name = "mzipmed", version, about = "Mediation analysis for zero-inflated counts with marginalized ZIP models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the outcome model `y ~ x + m + c` and report coefficients.
    Fit(FitArgs),
    /// Estimate natural direct, indirect, controlled and total effects.
    Mediate(MediateArgs),
    /// Run a Monte Carlo study on a preset or custom scenario.
    Simulate(SimulateArgs),
    /// Write one simulated dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// TOML file whose keys mirror the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV with a header row, or `-` for standard input.
    pub data: Option<String>,
    /// Outcome column (non-negative integer counts) [default: y].
    #[arg(long)]
    pub outcome: Option<String>,
    /// Exposure column [default: x].
    #[arg(long)]
    pub exposure: Option<String>,
    /// Mediator column [default: m].
    #[arg(long)]
    pub mediator: Option<String>,
    /// Comma-separated covariate columns.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
}

impl InputArgs {
    fn fill(self, cfg: &mut RunConfig) {
        cfg.data = self.data;
        cfg.outcome = self.outcome;
        cfg.exposure = self.exposure;
        cfg.mediator = self.mediator;
        cfg.covariates = self.covariates;
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Include the exposure-mediator product term.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub interaction: Option<bool>,
    /// Also fit an ordinary Poisson regression for comparison.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub with_poisson: Option<bool>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct MediateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Exposure level of interest [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Reference exposure level [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub xstar: Option<f64>,
    /// Comma-separated covariate values [default: covariate means].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub cvals: Option<Vec<f64>>,
    /// Mediator level for the controlled direct effect [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub m_cde: Option<f64>,
    /// [default: continuous]
    #[arg(long, value_enum)]
    pub mediator_type: Option<MediatorTypeArg>,
    /// [default: ratio]
    #[arg(long, value_enum)]
    pub scale: Option<ScaleArg>,
    /// Include the exposure-mediator product term.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub interaction: Option<bool>,
    /// Standard-error method [default: delta].
    #[arg(long, value_enum)]
    pub se: Option<SeArg>,
    /// Bootstrap resamples [default: 1000].
    #[arg(long)]
    pub boot_reps: Option<usize>,
    /// Bootstrap seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence level [default: 0.95].
    #[arg(long)]
    pub level: Option<f64>,
    /// Outcome model [default: mzip].
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Named scenario; an unknown name lists the valid ones.
    #[arg(long)]
    pub preset: Option<String>,
    /// Sample size per replicate [default: the scenario's].
    #[arg(long)]
    pub n: Option<usize>,
    /// Monte Carlo replicates [default: 500].
    #[arg(long)]
    pub reps: Option<usize>,
    /// Study seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: $MZIPMED_THREADS or all cores].
    #[arg(long)]
    pub threads: Option<usize>,
    /// Comma-separated outcome models [default: mzip,poisson].
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<ModelArg>>,
    /// Comma-separated SE methods [default: delta,delta-robust].
    #[arg(long, value_enum, value_delimiter = ',')]
    pub se_methods: Option<Vec<SeArg>>,
    /// [default: ratio]
    #[arg(long, value_enum)]
    pub scale: Option<ScaleArg>,
    /// Covariate value at which effects are evaluated [default: the scenario's].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub cvals: Option<Vec<f64>>,
    /// Bootstrap resamples when bootstrap SEs are requested [default: 1000].
    #[arg(long)]
    pub boot_reps: Option<usize>,
    /// Confidence level [default: 0.95].
    #[arg(long)]
    pub level: Option<f64>,
    /// Write the per-row CSV report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Named scenario.
    #[arg(long)]
    pub preset: Option<String>,
    /// Sample size [default: the scenario's].
    #[arg(long)]
    pub n: Option<usize>,
    /// Generator seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

impl FitArgs {
    pub fn into_parts(self) -> (RunConfig, Option<PathBuf>) {
        let mut cfg = RunConfig { interaction: self.interaction, with_poisson: self.with_poisson, out: self.out, ..Default::default() };
        self.input.fill(&mut cfg);
        (cfg, self.config.config)
    }
}

impl MediateArgs {
    pub fn into_parts(self) -> (RunConfig, Option<PathBuf>) {
        let mut cfg = RunConfig {
            x: self.x,
            xstar: self.xstar,
            cvals: self.cvals,
            m_cde: self.m_cde,
            mediator_type: self.mediator_type,
            scale: self.scale,
            interaction: self.interaction,
            se: self.se,
            boot_reps: self.boot_reps,
            seed: self.seed,
            level: self.level,
            model: self.model,
            out: self.out,
            ..Default::default()
        };
        self.input.fill(&mut cfg);
        (cfg, self.config.config)
    }
}

impl SimulateArgs {
    pub fn into_parts(self) -> (RunConfig, Option<PathBuf>) {
        let cfg = RunConfig {
            preset: self.preset,
            n: self.n,
            reps: self.reps,
            seed: self.seed,
            threads: self.threads,
            methods: self.methods,
            se_methods: self.se_methods,
            scale: self.scale,
            cvals: self.cvals,
            boot_reps: self.boot_reps,
            level: self.level,
            out: self.out,
            ..Default::default()
        };
        (cfg, self.config.config)
    }
}

impl GenerateArgs {
    pub fn into_parts(self) -> (RunConfig, Option<PathBuf>) {
        let cfg = RunConfig { preset: self.preset, n: self.n, seed: self.seed, out: self.out, ..Default::default() };
        (cfg, self.config.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_exposure_levels_parse() {
        let cli = Cli::try_parse_from(["mzipmed", "mediate", "d.csv", "--x", "-1", "--cvals=-0.5,2"]).unwrap();
        let Command::Mediate(args) = cli.command else { panic!() };
        let (cfg, _) = args.into_parts();
        assert_eq!(cfg.x, Some(-1.0));
        assert_eq!(cfg.cvals, Some(vec![-0.5, 2.0]));
    }
}
