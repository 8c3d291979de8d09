//! Shared fixtures for the benchmarks in `benches/`.

use drrsim_core::{load_scenario, ValidatedScenario};

/// Loads one of the scenarios shipped in the repository's `scenarios/`.
pub fn bundled(name: &str) -> ValidatedScenario {
    let path = format!("{}/../../scenarios/{name}.toml", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    load_scenario(&text).unwrap_or_else(|e| panic!("{path}: {e}"))
}
