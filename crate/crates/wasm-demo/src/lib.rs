//! Browser bindings: run a `projeq` job from its JSON text.
//!
//! The page in `www/` builds job configs for three operations (verify an
//! integral, generate a normal-form pair, trace a geodesic) and draws the
//! returned trajectory on a canvas.

use projeq::cli::config::parse_config;
use projeq::cli::{evaluate, JobOutput};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Runs a job and returns `{"ok": true, "report": .., "trajectory": ..}`
/// or `{"ok": false, "error": ..}`.
pub fn run_job_value(text: &str) -> Value {
    let config = match parse_config(text) {
        Ok(c) => c,
        Err(e) => return json!({"ok": false, "error": format!("config error at {e}")}),
    };
    match evaluate(&config) {
        Ok(JobOutput { report, trajectory }) => {
            let trajectory = trajectory.map(|t| {
                json!({
                    "t": t.times,
                    "x": t.states.iter().map(|s| s.x).collect::<Vec<_>>(),
                    "y": t.states.iter().map(|s| s.y).collect::<Vec<_>>(),
                    "H": t.energy,
                    "F": t.integrals.first(),
                })
            });
            json!({"ok": true, "report": report, "trajectory": trajectory})
        }
        Err(e) => json!({"ok": false, "error": e.to_string()}),
    }
}

#[wasm_bindgen]
pub fn run_job(text: &str) -> String {
    run_job_value(text).to_string()
}

#[wasm_bindgen]
pub fn version() -> String {
    projeq::cli::report::VERSION.to_string()
}
