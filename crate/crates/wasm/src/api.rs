//! JSON request handlers behind the browser bindings.

use mzipmed_core::simulation::{generate, true_effects, zero_fractions, ScenarioConfig, PRESET_NAMES};
use mzipmed_core::{mediate, EffectSet, MediationSpec, OutcomeModel, Scale, SeMethod};
use serde::{Deserialize, Serialize};

/// Largest sample size accepted from the page.
pub const MAX_N: usize = 20_000;
/// Largest number of grid points accepted for effect curves.
pub const MAX_POINTS: usize = 400;

fn parse<'a, T: Deserialize<'a>>(request: &'a str) -> Result<T, String> {
    serde_json::from_str(request).map_err(|e| format!("invalid request: {e}"))
}

fn render<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn err(e: mzipmed_core::Error) -> String {
    e.to_string()
}

fn check_n(n: usize) -> Result<(), String> {
    if n == 0 || n > MAX_N {
        return Err(format!("n must be between 1 and {MAX_N}, got {n}"));
    }
    Ok(())
}

pub fn preset_names() -> String {
    serde_json::to_string(&PRESET_NAMES).expect("names serialize")
}

pub fn preset_config(name: &str) -> Result<String, String> {
    let cfg = ScenarioConfig::preset(name)
        .ok_or_else(|| format!("unknown preset '{name}'; valid presets: {}", PRESET_NAMES.join(", ")))?;
    render(&cfg)
}

fn default_x() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRequest {
    pub scenario: ScenarioConfig,
    pub scale: Scale,
    #[serde(default = "default_x")]
    pub x: f64,
    #[serde(default)]
    pub x_star: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub points: usize,
}

#[derive(Debug, Serialize)]
pub struct CurveResponse {
    pub c: Vec<f64>,
    pub nde: Vec<f64>,
    pub nie: Vec<f64>,
    pub te: Vec<f64>,
    /// `null` where the total effect is null.
    pub pm: Vec<Option<f64>>,
}

/// True effects of `scenario` evaluated at evenly spaced covariate values.
pub fn effect_curve(request: &str) -> Result<String, String> {
    let req: CurveRequest = parse(request)?;
    req.scenario.validate().map_err(err)?;
    if !(2..=MAX_POINTS).contains(&req.points) {
        return Err(format!("points must be between 2 and {MAX_POINTS}"));
    }
    if !(req.c_min.is_finite() && req.c_max.is_finite() && req.c_min < req.c_max) {
        return Err("c_min must be finite and below c_max".into());
    }
    let mut out = CurveResponse { c: vec![], nde: vec![], nie: vec![], te: vec![], pm: vec![] };
    let step = (req.c_max - req.c_min) / (req.points - 1) as f64;
    for i in 0..req.points {
        let c = req.c_min + step * i as f64;
        let spec = MediationSpec {
            x: req.x,
            x_star: req.x_star,
            c: Some(vec![c]),
            mediator_type: req.scenario.mediator.kind(),
            interaction: req.scenario.interaction(),
            scale: req.scale,
            ..MediationSpec::default()
        };
        let e = true_effects(&req.scenario, &spec).map_err(err)?;
        out.c.push(c);
        out.nde.push(e.nde.estimate);
        out.nie.push(e.nie.estimate);
        out.te.push(e.te.estimate);
        out.pm.push(e.pm);
    }
    render(&out)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRequest {
    pub scenario: ScenarioConfig,
    pub n: usize,
    pub seed: u64,
    pub scale: Scale,
    #[serde(default)]
    pub robust: bool,
}

/// Estimates from one outcome model, or the reason they are unavailable.
#[derive(Debug, Serialize)]
pub struct ModelEstimate {
    pub effects: Option<EffectSet>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SimulateResponse {
    pub n: usize,
    pub c: f64,
    pub truth: EffectSet,
    pub mzip: ModelEstimate,
    pub poisson: ModelEstimate,
    pub zero_fraction: [f64; 2],
}

/// Draws one dataset and estimates effects at the scenario's covariate value.
pub fn simulate_fit(request: &str) -> Result<String, String> {
    let req: SimulateRequest = parse(request)?;
    check_n(req.n)?;
    let scenario = req.scenario.with_n(req.n);
    scenario.validate().map_err(err)?;
    let data = generate(&scenario, req.seed).map_err(err)?;
    let spec = MediationSpec {
        c: Some(vec![scenario.c_eval]),
        mediator_type: scenario.mediator.kind(),
        interaction: scenario.interaction(),
        scale: req.scale,
        se_method: if req.robust { SeMethod::DeltaRobust } else { SeMethod::DeltaModel },
        ..MediationSpec::default()
    };
    let truth = true_effects(&scenario, &spec).map_err(err)?;
    let estimate = |model| match mediate(&data, &MediationSpec { outcome_model: model, ..spec.clone() }) {
        Ok(r) => ModelEstimate { effects: Some(r.effects), error: None },
        Err(e) => ModelEstimate { effects: None, error: Some(e.to_string()) },
    };
    let (control, treated) = zero_fractions(&data).map_err(err)?;
    render(&SimulateResponse {
        n: req.n,
        c: scenario.c_eval,
        truth,
        mzip: estimate(OutcomeModel::Mzip),
        poisson: estimate(OutcomeModel::Poisson),
        zero_fraction: [control, treated],
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionRequest {
    pub scenario: ScenarioConfig,
    pub n: usize,
    pub seed: u64,
    /// Counts above this value are pooled into the last bin.
    pub max_count: usize,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct ArmSummary {
    pub n: usize,
    /// Relative frequency of `0..=max_count`; the last bin holds the tail.
    pub frequency: Vec<f64>,
    pub mean: f64,
    pub zero_fraction: f64,
}

#[derive(Debug, Serialize)]
pub struct DistributionResponse {
    pub bins: Vec<usize>,
    pub control: ArmSummary,
    pub treated: ArmSummary,
}

fn summarize(y: &[f64], max_count: usize) -> ArmSummary {
    let mut counts = vec![0usize; max_count + 1];
    for &v in y {
        counts[(v as usize).min(max_count)] += 1;
    }
    let n = y.len();
    let denom = n.max(1) as f64;
    ArmSummary {
        n,
        frequency: counts.iter().map(|&k| k as f64 / denom).collect(),
        mean: y.iter().sum::<f64>() / denom,
        zero_fraction: counts[0] as f64 / denom,
    }
}

/// Histogram of the simulated outcome in each exposure arm.
pub fn outcome_distribution(request: &str) -> Result<String, String> {
    let req: DistributionRequest = parse(request)?;
    check_n(req.n)?;
    if req.max_count == 0 || req.max_count > 200 {
        return Err("max_count must be between 1 and 200".into());
    }
    let scenario = req.scenario.with_n(req.n);
    let data = generate(&scenario, req.seed).map_err(err)?;
    let (y, x) = (data.column("y").map_err(err)?, data.column("x").map_err(err)?);
    let arm = |level: f64| -> Vec<f64> { y.iter().zip(x).filter(|(_, &xi)| xi == level).map(|(&v, _)| v).collect() };
    render(&DistributionResponse {
        bins: (0..=req.max_count).collect(),
        control: summarize(&arm(0.0), req.max_count),
        treated: summarize(&arm(1.0), req.max_count),
    })
}
