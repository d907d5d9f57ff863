//! Browser bindings for the flooding simulator. Each export returns a JSON
//! string; the plain functions in [`demo`] do the work and are tested natively.

use wasm_bindgen::prelude::*;

pub mod demo;

fn to_js(r: Result<serde_json::Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// Node positions, edges and the relay set for a fixture name
/// (`fig3`, `grid:25`, ...) or, when `fixture` is empty, a random layout.
#[wasm_bindgen]
pub fn topology(fixture: &str, node_count: u32, seed: u32, range: f64) -> Result<String, JsError> {
    to_js(demo::topology(fixture, node_count, seed, range))
}

/// Relay and blind flooding on the same topology, with per-second network totals.
#[wasm_bindgen]
pub fn simulate(
    fixture: &str,
    node_count: u32,
    seed: u32,
    range: f64,
    duration_s: f64,
) -> Result<String, JsError> {
    to_js(demo::simulate(fixture, node_count, seed, range, duration_s))
}

/// Greedy relay set size against the exhaustive minimum on random small graphs.
#[wasm_bindgen]
pub fn oracle_gap(trials: u32, node_count: u32, seed: u32) -> Result<String, JsError> {
    to_js(demo::oracle_gap(trials, node_count, seed))
}
