//! Browser bindings for the DOF analyzer. Every export takes plain strings or
//! numbers and returns a JSON string; `www/index.html` draws the results.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use mimo_dof::channel::{AntennaConfig, CognitionScenario};
use mimo_dof::dof::{dof_cooperation, dof_formula, inner_region, outer_region, RegionJson};
use mimo_dof::rates::{log_grid, simulate_point};
use mimo_dof::region::regions_equal;

/// Caps on browser-side work.
const MAX_ANTENNAS: u32 = 8;
const MAX_TRIALS: u32 = 50;

#[derive(Serialize)]
struct RegionView {
    inner: RegionJson,
    outer: RegionJson,
    equal: bool,
    eta: u32,
    /// Vertices as floats, for drawing.
    polygon: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct ScenarioRow {
    scenario: CognitionScenario,
    eta: u32,
}

#[derive(Serialize)]
struct DofTable {
    config: AntennaConfig,
    rows: Vec<ScenarioRow>,
    cooperation: u32,
}

#[derive(Serialize)]
struct RateCurve {
    rho: Vec<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
    rsum: Vec<f64>,
    slope: f64,
    intercept: f64,
    target: u32,
}

fn parse_config(s: &str) -> Result<AntennaConfig, String> {
    let c: AntennaConfig = s.parse().map_err(|e| format!("{e}"))?;
    if [c.m1, c.m2, c.n1, c.n2].iter().any(|&n| n > MAX_ANTENNAS) {
        return Err(format!("antenna counts are capped at {MAX_ANTENNAS} in the demo"));
    }
    Ok(c)
}

fn parse_scenario(s: &str) -> Result<CognitionScenario, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn region_view(config: &str, scenario: &str) -> Result<String, String> {
    let c = parse_config(config)?;
    let s = parse_scenario(scenario)?;
    let inner = inner_region(c, s);
    let outer = outer_region(c, s);
    let polygon = outer
        .vertices()
        .iter()
        .map(|v| [ratio(&v.d1), ratio(&v.d2)])
        .collect();
    to_json(&RegionView {
        equal: regions_equal(&inner, &outer),
        inner: RegionJson::new(c, s, &inner),
        outer: RegionJson::new(c, s, &outer),
        eta: dof_formula(c, s),
        polygon,
    })
}

fn ratio(r: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn dof_table_view(config: &str) -> Result<String, String> {
    let c = parse_config(config)?;
    let rows = CognitionScenario::all().map(|s| ScenarioRow { scenario: s, eta: dof_formula(c, s) }).collect();
    to_json(&DofTable { config: c, rows, cooperation: dof_cooperation(c) })
}

pub fn rate_curve_view(config: &str, scenario: &str, d1: u32, d2: u32, trials: u32, seed: u64) -> Result<String, String> {
    let c = parse_config(config)?;
    let s = parse_scenario(scenario)?;
    let trials = trials.clamp(1, MAX_TRIALS);
    let grid = log_grid(1e4, 1e10, 7);
    let sum = simulate_point(c, s, d1, d2, &grid, 5, trials, seed).map_err(|e| e.to_string())?;
    let m = sum.mean;
    to_json(&RateCurve {
        rsum: m.sum_rates(),
        rho: m.rho_grid,
        r1: m.r1_rates,
        r2: m.r2_rates,
        slope: m.slope,
        intercept: m.intercept,
        target: d1 + d2,
    })
}

/// Inner and outer regions for `config` ("M1,M2,N1,N2") and `scenario` ("T1,T2,R1,R2").
#[wasm_bindgen]
pub fn region(config: &str, scenario: &str) -> Result<String, JsValue> {
    region_view(config, scenario).map_err(|e| JsValue::from_str(&e))
}

/// Sum DOF for all 16 cognition scenarios.
#[wasm_bindgen]
pub fn dof_table(config: &str) -> Result<String, JsValue> {
    dof_table_view(config).map_err(|e| JsValue::from_str(&e))
}

/// Mean rate curve of the zero-forcing scheme at `(d1, d2)`.
#[wasm_bindgen]
pub fn rate_curve(config: &str, scenario: &str, d1: u32, d2: u32, trials: u32, seed: u32) -> Result<String, JsValue> {
    rate_curve_view(config, scenario, d1, d2, trials, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}
