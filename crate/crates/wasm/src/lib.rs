//! Browser entry points for `www/index.html`.
//!
//! Each export wraps a plain Rust function of the same name with a `_impl`
//! suffix so the logic can be tested off the browser.

use bbqram::experiments::{entropy_by_layer, layer_entropies as read_entropies, McSettings, Workload};
use bbqram::gates::DecompositionRegistry;
use bbqram::mitigation::{mitigated_query_many, MitigationConfig};
use bbqram::model::{build_query_circuit, circuit_stats, AddressState, ClassicalData, QramGeometry};
use bbqram::noise::NoiseModel;
use wasm_bindgen::prelude::*;

/// Largest tree the page offers; keeps a click under a few seconds.
pub const MAX_DEMO_LAYERS: usize = 6;

fn check_layers(layers: usize) -> Result<(), String> {
    if (1..=MAX_DEMO_LAYERS).contains(&layers) {
        Ok(())
    } else {
        Err(format!("layers must lie in 1..={MAX_DEMO_LAYERS}"))
    }
}

pub fn layer_entropies_impl(layers: usize, address: &str) -> Result<Vec<f64>, String> {
    check_layers(layers)?;
    let a = AddressState::parse(address, layers).map_err(|e| e.to_string())?;
    let r = entropy_by_layer(layers, &a).map_err(|e| e.to_string())?;
    Ok(read_entropies(&r))
}

pub fn gate_stats_impl(layers: usize, data: &str) -> Result<String, String> {
    check_layers(layers)?;
    let g = QramGeometry::new(layers).map_err(|e| e.to_string())?;
    let d = ClassicalData::parse(data, &g).map_err(|e| e.to_string())?;
    let c = build_query_circuit(g, &d).map_err(|e| e.to_string())?;
    let s = circuit_stats(&c, &DecompositionRegistry::standard()).map_err(|e| e.to_string())?;
    serde_json::to_string(&s).map_err(|e| e.to_string())
}

/// `[F, half-width]` pairs, flattened, one pair per rate in `rates`.
pub fn fidelity_curve_impl(layers: usize, k: usize, rates: &[f64], samples: usize, seed: u64) -> Result<Vec<f64>, String> {
    check_layers(layers)?;
    let w = Workload::standard(layers).map_err(|e| e.to_string())?;
    let c = w.circuit().map_err(|e| e.to_string())?;
    let config = MitigationConfig::new(k);
    config.validate(&w.geometry).map_err(|e| e.to_string())?;
    let s = McSettings::new(samples, seed);
    let mut out = Vec::with_capacity(2 * rates.len());
    for &e_t in rates {
        let model = NoiseModel::new(e_t).map_err(|e| e.to_string())?;
        let est = mitigated_query_many(&c, &w.address, &w.data, &model, &[config], s.samples, s.seed, s.options)
            .map_err(|e| e.to_string())?[0];
        out.extend([est.fidelity, est.fidelity_ci]);
    }
    Ok(out)
}

/// Von Neumann entropy of the first router of each layer after loading
/// `address` (`uniform`, `basis:<bits>`, `bell:<a>,<b>`, `product:<symbols>`).
#[wasm_bindgen]
pub fn layer_entropies(layers: usize, address: &str) -> Result<Vec<f64>, JsError> {
    layer_entropies_impl(layers, address).map_err(|e| JsError::new(&e))
}

/// CZ counts and depths as JSON.
#[wasm_bindgen]
pub fn gate_stats(layers: usize, data: &str) -> Result<String, JsError> {
    gate_stats_impl(layers, data).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fidelity_curve(layers: usize, k: usize, rates: Vec<f64>, samples: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    fidelity_curve_impl(layers, k, &rates, samples, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropies_fall_with_depth() {
        let s = layer_entropies_impl(3, "uniform").unwrap();
        assert_eq!(s.len(), 3);
        assert!(s[0] > s[1] && s[1] > s[2]);
        assert!(layer_entropies_impl(3, "basis:10").is_err());
        assert!(layer_entropies_impl(9, "uniform").is_err());
    }

    #[test]
    fn stats_are_json() {
        let text = gate_stats_impl(2, "all-ones").unwrap();
        assert!(text.contains("\"count_reduction\""));
    }

    #[test]
    fn curve_starts_at_one() {
        let v = fidelity_curve_impl(2, 0, &[0.0, 1e-3], 200, 1).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 1.0);
        assert!(v[2] < 1.0);
    }
}
