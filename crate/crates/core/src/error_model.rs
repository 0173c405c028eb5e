//! Layered circuit failure estimate.
//!
//! For a circuit of depth `d`, layer `j` has an average gate error
//! `avg_j = Σ_i E_i·N_i / Σ_i N_i` over its gate kinds and holds `m_j`
//! gates. The probability that at least one gate fails is
//! `s = 1 − Π_j (1 − avg_j)^{m_j}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Median single-qubit gate error quoted for IBM Heron devices.
pub const HERON_SINGLE_QUBIT_RATE: f64 = 0.0003;
/// Median two-qubit CZ error quoted for IBM Heron devices.
pub const HERON_TWO_QUBIT_RATE: f64 = 0.0032;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErrorModelError {
    #[error("circuit has no layers")]
    EmptyCircuit,
    #[error("layer {layer} has no gates")]
    EmptyLayer { layer: usize },
    #[error("error rate {rate} in layer {layer} outside [0, 1]")]
    RateOutOfRange { layer: usize, rate: f64 },
    #[error("city count {0} outside 2..=10")]
    UnsupportedSize(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCount {
    pub kind: String,
    pub count: u64,
    pub error_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub gates: Vec<GateCount>,
    /// Gates in this layer; defaults to the sum of `gates[].count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
}

impl LayerSpec {
    pub fn gate_total(&self) -> u64 {
        self.gates.iter().map(|g| g.count).sum()
    }

    pub fn m(&self) -> u64 {
        self.m.unwrap_or_else(|| self.gate_total())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitErrorReport {
    /// Probability that at least one gate fails.
    pub s: f64,
    pub layer_average_rates: Vec<f64>,
    pub depth: usize,
}

pub fn estimate_circuit_error(layers: &[LayerSpec]) -> Result<CircuitErrorReport, ErrorModelError> {
    if layers.is_empty() {
        return Err(ErrorModelError::EmptyCircuit);
    }
    let mut survive = 1.0;
    let mut averages = Vec::with_capacity(layers.len());
    for (j, layer) in layers.iter().enumerate() {
        let total = layer.gate_total();
        if total == 0 || layer.m() == 0 {
            return Err(ErrorModelError::EmptyLayer { layer: j });
        }
        if let Some(g) = layer.gates.iter().find(|g| !(0.0..=1.0).contains(&g.error_rate)) {
            return Err(ErrorModelError::RateOutOfRange { layer: j, rate: g.error_rate });
        }
        let weighted: f64 = layer.gates.iter().map(|g| g.error_rate * g.count as f64).sum();
        let avg = weighted / total as f64;
        averages.push(avg);
        survive *= (1.0 - avg).powf(layer.m() as f64);
    }
    Ok(CircuitErrorReport { s: (1.0 - survive).clamp(0.0, 1.0), layer_average_rates: averages, depth: layers.len() })
}

/// Layers of the path-search circuit for `k` cities: one layer of `Ry` on
/// the `2k` path qubits (plus the ancilla when requested), then one layer of
/// measurements.
pub fn qaco_circuit_layers(
    k: usize,
    include_ancilla: bool,
    gate_rate: f64,
    measurement_rate: f64,
) -> Result<Vec<LayerSpec>, ErrorModelError> {
    if !(2..=10).contains(&k) {
        return Err(ErrorModelError::UnsupportedSize(k));
    }
    for rate in [gate_rate, measurement_rate] {
        if !(0.0..=1.0).contains(&rate) {
            return Err(ErrorModelError::RateOutOfRange { layer: 0, rate });
        }
    }
    let qubits = 2 * k as u64 + u64::from(include_ancilla);
    let layer = |kind: &str, rate| LayerSpec {
        gates: vec![GateCount { kind: kind.to_string(), count: qubits, error_rate: rate }],
        m: None,
    };
    Ok(vec![layer("ry", gate_rate), layer("measure", measurement_rate)])
}

/// The four-city circuit (9 qubits with ancilla) at Heron's single-qubit rate.
pub fn heron_4city_preset(measurement_rate: f64) -> Vec<LayerSpec> {
    qaco_circuit_layers(4, true, HERON_SINGLE_QUBIT_RATE, measurement_rate).expect("fixed valid preset")
}
