//! Browser demo bindings. Each operation takes a JSON request and returns a
//! JSON response, so the logic in [`api`] is testable natively.

pub mod api;

use wasm_bindgen::prelude::*;

fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Parameters of a named scenario, as JSON.
#[wasm_bindgen(js_name = presetConfig)]
pub fn preset_config(name: &str) -> Result<String, JsValue> {
    to_js(api::preset_config(name))
}

/// Names of the built-in scenarios, as a JSON array.
#[wasm_bindgen(js_name = presetNames)]
pub fn preset_names() -> String {
    api::preset_names()
}

/// True NDE, NIE, TE and proportion mediated across a covariate grid.
#[wasm_bindgen(js_name = effectCurve)]
pub fn effect_curve(request: &str) -> Result<String, JsValue> {
    to_js(api::effect_curve(request))
}

/// Simulates one dataset and compares MZIP and Poisson effect estimates with the truth.
#[wasm_bindgen(js_name = simulateFit)]
pub fn simulate_fit(request: &str) -> Result<String, JsValue> {
    to_js(api::simulate_fit(request))
}

/// Outcome histograms by exposure arm for one simulated dataset.
#[wasm_bindgen(js_name = outcomeDistribution)]
pub fn outcome_distribution(request: &str) -> Result<String, JsValue> {
    to_js(api::outcome_distribution(request))
}
