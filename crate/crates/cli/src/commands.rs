//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use mzipmed_core::glm::{fit_poisson, GlmFit};
use mzipmed_core::simulation::{generate, run_study, ScenarioConfig, SimulationReport, PRESET_NAMES};
use mzipmed_core::{
    mediate, mzip_fit, EffectSet, MediationData, MediationSpec, OptimSettings, Roles, SeMethod,
};
use mzipmed_core::mediation::{BootstrapSummary, ModelSummary};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{ModelArg, RunConfig, SeArg};
use crate::error::{CliError, CliResult};
use crate::input::{open_source, read_dataset, write_dataset, LoadedData};

/// Version of the JSON output layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "MZIPMED_THREADS";

fn roles(cfg: &RunConfig) -> Roles {
    Roles {
        outcome: cfg.outcome.clone().unwrap_or_else(|| "y".into()),
        exposure: cfg.exposure.clone().unwrap_or_else(|| "x".into()),
        mediator: cfg.mediator.clone().unwrap_or_else(|| "m".into()),
        covariates: cfg.covariates.clone().unwrap_or_default(),
    }
}

fn load(cfg: &RunConfig, stdin: &mut dyn Read) -> CliResult<LoadedData> {
    let path = cfg.data.as_deref().ok_or_else(|| CliError::input("no input CSV given; pass a path or '-'"))?;
    let roles = roles(cfg);
    if path == "-" {
        read_dataset(stdin, &roles)
    } else {
        read_dataset(open_source(path)?, &roles)
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::input(format!("cannot create '{}': {e}", path.display())))
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    let written = match out {
        Some(p) => {
            let mut f = create(p)?;
            writeln!(f, "{text}").and_then(|()| f.flush())
        }
        None => writeln!(stdout, "{text}").and_then(|()| stdout.flush()),
    };
    match written {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::input(format!("cannot write output: {e}"))),
        _ => Ok(()),
    }
}

fn std_errors(cov: &DMatrix<f64>) -> Vec<f64> {
    cov.diagonal().iter().map(|v| v.sqrt()).collect()
}

#[derive(Debug, Serialize)]
struct BlockSe {
    alpha: Vec<f64>,
    gamma: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct PoissonReport {
    coefficients: Vec<f64>,
    se_model: Vec<f64>,
    se_robust: Vec<f64>,
    loglik: f64,
    converged: bool,
    iterations: usize,
}

impl From<&GlmFit> for PoissonReport {
    fn from(f: &GlmFit) -> Self {
        Self {
            coefficients: f.coefficients.iter().copied().collect(),
            se_model: std_errors(&f.cov_model),
            se_robust: std_errors(&f.cov_robust),
            loglik: f.loglik,
            converged: f.converged,
            iterations: f.iterations,
        }
    }
}

#[derive(Debug, Serialize)]
struct FitReport {
    schema_version: u32,
    command: &'static str,
    model: &'static str,
    n: usize,
    rows_read: usize,
    rows_dropped: usize,
    labels: Vec<String>,
    alpha: Vec<f64>,
    gamma: Vec<f64>,
    se_model: BlockSe,
    se_robust: BlockSe,
    loglik: f64,
    converged: bool,
    iterations: usize,
    gradient_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    poisson: Option<PoissonReport>,
}

/// Fits the MZIP outcome model and, on request, a Poisson comparison.
/// The report is written even when the fit does not converge, in which
/// case a convergence error follows.
pub fn fit(cfg: &RunConfig, stdin: &mut dyn Read, stdout: &mut dyn Write) -> CliResult<()> {
    let loaded = load(cfg, stdin)?;
    let data = loaded.dataset.mediation_data()?;
    let interaction = cfg.interaction.unwrap_or(false);
    let z = data.outcome_design(interaction);
    let y = data.outcome();
    let f = mzip_fit(&z, &y, &OptimSettings::default())?;
    let poisson = if cfg.with_poisson.unwrap_or(false) { Some(PoissonReport::from(&fit_poisson(&z, &y)?)) } else { None };
    let report = FitReport {
        schema_version: SCHEMA_VERSION,
        command: "fit",
        model: "mzip",
        n: data.n(),
        rows_read: loaded.rows_read,
        rows_dropped: loaded.rows_dropped,
        labels: MediationData::outcome_labels(loaded.dataset.roles(), interaction),
        alpha: f.alpha.iter().copied().collect(),
        gamma: f.gamma.iter().copied().collect(),
        se_model: BlockSe { alpha: f.se_alpha(false).iter().copied().collect(), gamma: f.se_gamma(false).iter().copied().collect() },
        se_robust: BlockSe { alpha: f.se_alpha(true).iter().copied().collect(), gamma: f.se_gamma(true).iter().copied().collect() },
        loglik: f.loglik,
        converged: f.converged,
        iterations: f.iterations,
        gradient_norm: f.gradient_norm,
        poisson,
    };
    emit_json(&report, cfg.out.as_deref(), stdout)?;
    if !f.converged {
        return Err(CliError::convergence(format!("MZIP fit did not converge after {} iterations", f.iterations)));
    }
    Ok(())
}

/// Resolves the mediation specification from flags and config.
pub fn mediation_spec(cfg: &RunConfig) -> MediationSpec {
    let d = MediationSpec::default();
    MediationSpec {
        x: cfg.x.unwrap_or(d.x),
        x_star: cfg.xstar.unwrap_or(d.x_star),
        c: cfg.cvals.clone(),
        m_cde: cfg.m_cde.unwrap_or(d.m_cde),
        mediator_type: cfg.mediator_type.map_or(d.mediator_type, Into::into),
        scale: cfg.scale.map_or(d.scale, Into::into),
        interaction: cfg.interaction.unwrap_or(d.interaction),
        se_method: cfg.se.map_or(d.se_method, Into::into),
        level: cfg.level.unwrap_or(d.level),
        outcome_model: cfg.model.map_or(d.outcome_model, Into::into),
        boot_reps: cfg.boot_reps.unwrap_or(d.boot_reps),
        seed: cfg.seed.unwrap_or(d.seed),
    }
}

#[derive(Debug, Serialize)]
struct MediateReport {
    schema_version: u32,
    command: &'static str,
    n: usize,
    rows_read: usize,
    rows_dropped: usize,
    spec: MediationSpec,
    #[serde(flatten)]
    effects: EffectSet,
    se_method: SeMethod,
    c: Vec<f64>,
    outcome: ModelSummary,
    mediator: ModelSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    bootstrap: Option<BootstrapSummary>,
}

/// Estimates mediation effects with intervals.
pub fn mediate_cmd(cfg: &RunConfig, stdin: &mut dyn Read, stdout: &mut dyn Write) -> CliResult<()> {
    let loaded = load(cfg, stdin)?;
    let spec = mediation_spec(cfg);
    let res = mediate(&loaded.dataset, &spec)?;
    let report = MediateReport {
        schema_version: SCHEMA_VERSION,
        command: "mediate",
        n: loaded.dataset.n_rows(),
        rows_read: loaded.rows_read,
        rows_dropped: loaded.rows_dropped,
        spec,
        effects: res.effects,
        se_method: res.se_method,
        c: res.c,
        outcome: res.outcome,
        mediator: res.mediator,
        bootstrap: res.bootstrap,
    };
    emit_json(&report, cfg.out.as_deref(), stdout)
}

/// Scenario named by `preset`, else the custom `scenario` table, with `n` applied.
pub fn resolve_scenario(cfg: &RunConfig) -> CliResult<(String, ScenarioConfig)> {
    let (name, scenario) = match (&cfg.preset, &cfg.scenario) {
        (Some(p), _) => {
            let s = ScenarioConfig::preset(p).ok_or_else(|| {
                CliError::input(format!("unknown preset '{p}'; valid presets: {}", PRESET_NAMES.join(", ")))
            })?;
            (p.clone(), s)
        }
        (None, Some(s)) => ("custom".to_string(), s.clone()),
        (None, None) => {
            return Err(CliError::input(format!(
                "no scenario given; pass --preset ({}) or a [scenario] table in --config",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let scenario = match cfg.n {
        Some(n) => scenario.with_n(n),
        None => scenario,
    };
    scenario.validate()?;
    Ok((name, scenario))
}

/// Thread count from flags or config, else from [`THREADS_ENV`].
pub fn resolve_threads(cfg: &RunConfig) -> CliResult<Option<usize>> {
    let threads = match cfg.threads {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::input(format!("{THREADS_ENV}='{v}' is not a thread count")))?),
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        return Err(CliError::input("thread count must be at least 1"));
    }
    Ok(threads)
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    schema_version: u32,
    command: &'static str,
    scenario: String,
    config: ScenarioConfig,
    seed: u64,
    #[serde(flatten)]
    report: SimulationReport,
}

/// Runs a Monte Carlo study. The JSON summary goes to standard output and
/// the per-row table to `out` as CSV.
pub fn simulate(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let (name, scenario) = resolve_scenario(cfg)?;
    let threads = resolve_threads(cfg)?;
    let reps = cfg.reps.unwrap_or(500);
    let seed = cfg.seed.unwrap_or(0);
    let methods: Vec<_> =
        cfg.methods.clone().unwrap_or_else(|| vec![ModelArg::Mzip, ModelArg::Poisson]).into_iter().map(Into::into).collect();
    let se_methods: Vec<_> = cfg
        .se_methods
        .clone()
        .unwrap_or_else(|| vec![SeArg::Delta, SeArg::DeltaRobust])
        .into_iter()
        .map(Into::into)
        .collect();
    let d = MediationSpec::default();
    let spec = MediationSpec {
        c: cfg.cvals.clone(),
        scale: cfg.scale.map_or(d.scale, Into::into),
        level: cfg.level.unwrap_or(d.level),
        boot_reps: cfg.boot_reps.unwrap_or(d.boot_reps),
        ..d
    };
    spec.validate()?;
    let report = run_study(&scenario, reps, &methods, &se_methods, &spec, seed, threads)?;
    if let Some(path) = &cfg.out {
        write_report_csv(&report, create(path)?)?;
    }
    let summary = SimulateReport { schema_version: SCHEMA_VERSION, command: "simulate", scenario: name, config: scenario, seed, report };
    emit_json(&summary, None, stdout)
}

/// One CSV row per (method, effect, SE method).
pub fn write_report_csv<W: Write>(report: &SimulationReport, writer: W) -> CliResult<()> {
    let err = |e: csv::Error| CliError::input(format!("cannot write CSV: {e}"));
    let mut wtr = csv::Writer::from_writer(writer);
    for row in &report.rows {
        wtr.serialize(row).map_err(err)?;
    }
    wtr.flush().map_err(|e| CliError::input(format!("cannot write CSV: {e}")))
}

/// Writes one simulated dataset as CSV.
pub fn generate_cmd(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<()> {
    let (_, scenario) = resolve_scenario(cfg)?;
    let data = generate(&scenario, cfg.seed.unwrap_or(0))?;
    match &cfg.out {
        Some(path) => write_dataset(&data, create(path)?),
        None => write_dataset(&data, stdout),
    }
}
