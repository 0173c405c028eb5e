//! A small statevector simulator for the path-search circuit.
//!
//! The circuit is shallow: one `Ry` per qubit on `|0…0⟩` followed by a
//! computational-basis measurement, with `X` used for mutations. Noise is
//! injected as Monte Carlo trajectories.
//!
//! Qubit ordering: qubit `q` is bit `q` (least significant first) of a basis
//! index, and bit `i` of a returned [`BitString`] is the outcome of qubit `i`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_QUBITS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("register size {0} outside 1..={MAX_QUBITS}")]
    InvalidQubitCount(usize),
    #[error("angle {0} outside the allowed range")]
    AngleOutOfRange(f64),
    #[error("noise rate {0} outside [0, 1]")]
    InvalidRate(f64),
    #[error("invalid bit string `{0}`")]
    InvalidBits(String),
}

/// Measured outcomes, bit `i` belonging to qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Pack into an integer with bit `i` at position `i`. Only meaningful for
    /// strings of at most 64 bits.
    pub fn to_index(&self) -> u64 {
        self.0.iter().enumerate().fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn from_index(index: u64, len: usize) -> Self {
        Self((0..len).map(|i| (index >> i) & 1 == 1).collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(QuantumError::InvalidBits(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self, QuantumError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QuantumError::InvalidQubitCount(n_qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of each basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check(&self, q: usize) -> Result<(), QuantumError> {
        if q >= self.n_qubits {
            Err(QuantumError::QubitOutOfRange { qubit: q, n: self.n_qubits })
        } else {
            Ok(())
        }
    }

    fn pairs(&self, q: usize) -> impl Iterator<Item = (usize, usize)> {
        let mask = 1usize << q;
        (0..self.amplitudes.len()).filter(move |i| i & mask == 0).map(move |i| (i, i | mask))
    }

    /// `Ry(θ)` on qubit `q`: `|0⟩ → cos(θ/2)|0⟩ + sin(θ/2)|1⟩`.
    pub fn apply_ry(mut self, q: usize, theta: f64) -> Result<Self, QuantumError> {
        self.check(q)?;
        if !theta.is_finite() {
            return Err(QuantumError::AngleOutOfRange(theta));
        }
        let (s, c) = (theta / 2.0).sin_cos();
        for (i0, i1) in self.pairs(q).collect::<Vec<_>>() {
            let (a0, a1) = (self.amplitudes[i0], self.amplitudes[i1]);
            self.amplitudes[i0] = a0 * c - a1 * s;
            self.amplitudes[i1] = a0 * s + a1 * c;
        }
        Ok(self)
    }

    /// Pauli-X on qubit `q`.
    pub fn apply_x(mut self, q: usize) -> Result<Self, QuantumError> {
        self.check(q)?;
        for (i0, i1) in self.pairs(q).collect::<Vec<_>>() {
            self.amplitudes.swap(i0, i1);
        }
        Ok(self)
    }

    /// Pauli-Z on qubit `q`.
    pub fn apply_z(mut self, q: usize) -> Result<Self, QuantumError> {
        self.check(q)?;
        for (_, i1) in self.pairs(q).collect::<Vec<_>>() {
            self.amplitudes[i1] = -self.amplitudes[i1];
        }
        Ok(self)
    }

    /// Reset qubit `q` to `|0⟩` along one trajectory: measure it, and flip it
    /// back if the outcome was 1.
    pub fn reset<R: Rng + ?Sized>(mut self, q: usize, rng: &mut R) -> Result<Self, QuantumError> {
        self.check(q)?;
        let mask = 1usize << q;
        let p1: f64 = self.amplitudes.iter().enumerate().filter(|(i, _)| i & mask != 0).map(|(_, a)| a.norm_sqr()).sum();
        let outcome_one = rng.gen::<f64>() < p1;
        let keep_norm = if outcome_one { p1 } else { 1.0 - p1 }.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & mask != 0) == outcome_one {
                *a /= keep_norm;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if outcome_one {
            self = self.apply_x(q)?;
        }
        Ok(self)
    }

    /// Sample every qubit in the computational basis (Born rule).
    pub fn measure_all<R: Rng + ?Sized>(self, rng: &mut R) -> BitString {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let last = self.amplitudes.len() - 1;
        let index = self
            .amplitudes
            .iter()
            .position(|a| {
                acc += a.norm_sqr();
                u < acc
            })
            .unwrap_or(last);
        BitString::from_index(index as u64, self.n_qubits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    BitFlip,
    ThermalRelaxation,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::BitFlip => "bitflip",
            NoiseKind::ThermalRelaxation => "thermal",
        }
    }
}

impl FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(NoiseKind::None),
            "bitflip" | "bit-flip" | "bit_flip" => Ok(NoiseKind::BitFlip),
            "thermal" | "thermal-relaxation" | "thermal_relaxation" => Ok(NoiseKind::ThermalRelaxation),
            other => Err(format!("unknown noise kind `{other}`")),
        }
    }
}

/// A noise channel and its per-operation rate.
///
/// * `BitFlip`: after every gate and again before measurement, each affected
///   qubit is flipped with probability `rate`.
/// * `ThermalRelaxation`: after every gate, the qubit is reset to `|0⟩` with
///   probability `rate` and, independently, dephased by `Z` with probability
///   `rate / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub rate: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, rate: f64) -> Result<Self, QuantumError> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(QuantumError::InvalidRate(rate));
        }
        Ok(Self { kind, rate })
    }

    pub const fn none() -> Self {
        Self { kind: NoiseKind::None, rate: 0.0 }
    }

    pub fn bit_flip(rate: f64) -> Result<Self, QuantumError> {
        Self::new(NoiseKind::BitFlip, rate)
    }

    pub fn thermal(rate: f64) -> Result<Self, QuantumError> {
        Self::new(NoiseKind::ThermalRelaxation, rate)
    }

    /// Rate that actually applies; zero when the kind is `None`.
    pub fn effective_rate(&self) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            _ => self.rate,
        }
    }

    fn after_gate<R: Rng + ?Sized>(&self, state: StateVector, q: usize, rng: &mut R) -> StateVector {
        let r = self.effective_rate();
        match self.kind {
            NoiseKind::None => state,
            NoiseKind::BitFlip => {
                if rng.gen_bool(r) {
                    state.apply_x(q).expect("qubit checked by caller")
                } else {
                    state
                }
            }
            NoiseKind::ThermalRelaxation => {
                let state = if rng.gen_bool(r) { state.reset(q, rng).expect("qubit checked") } else { state };
                if rng.gen_bool(r / 2.0) {
                    state.apply_z(q).expect("qubit checked")
                } else {
                    state
                }
            }
        }
    }

    fn before_measure<R: Rng + ?Sized>(&self, state: StateVector, q: usize, rng: &mut R) -> StateVector {
        if self.kind == NoiseKind::BitFlip && rng.gen_bool(self.rate) {
            state.apply_x(q).expect("qubit checked by caller")
        } else {
            state
        }
    }

    /// One trajectory of a single qubit prepared by `Ry(theta)` and measured.
    fn sample_qubit<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> bool {
        let mut p_one = (theta / 2.0).sin().powi(2);
        let r = self.effective_rate();
        let mut flip_readout = false;
        match self.kind {
            NoiseKind::None => {}
            NoiseKind::BitFlip => {
                if rng.gen_bool(r) {
                    p_one = 1.0 - p_one;
                }
                flip_readout = rng.gen_bool(r);
            }
            NoiseKind::ThermalRelaxation => {
                if rng.gen_bool(r) {
                    p_one = 0.0;
                }
                // Dephasing leaves computational-basis statistics untouched,
                // but the event is still drawn so the stream layout matches
                // the channel definition.
                let _ = rng.gen_bool(r / 2.0);
            }
        }
        (rng.gen::<f64>() < p_one) ^ flip_readout
    }
}

/// Rotation angles for the path register, one per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleVector(Vec<f64>);

impl AngleVector {
    pub fn new(thetas: Vec<f64>) -> Result<Self, QuantumError> {
        if thetas.is_empty() || thetas.len() > MAX_QUBITS {
            return Err(QuantumError::InvalidQubitCount(thetas.len()));
        }
        if let Some(&t) = thetas.iter().find(|t| !t.is_finite()) {
            return Err(QuantumError::AngleOutOfRange(t));
        }
        Ok(Self(thetas))
    }

    pub fn thetas(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn thetas_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Sample the path register `⊗ Ry(θ_i)|0⟩` once under `noise`.
///
/// The register is a product state and the noise channels act on single
/// qubits, so each qubit's trajectory is simulated on its own.
/// [`noisy_sample_statevector`] runs the same trajectories on the full state.
pub fn noisy_sample<R: Rng + ?Sized>(angles: &AngleVector, noise: &NoiseSpec, rng: &mut R) -> BitString {
    BitString(angles.thetas().iter().map(|&t| noise.sample_qubit(t, rng)).collect())
}

/// Full-statevector trajectory version of [`noisy_sample`].
pub fn noisy_sample_statevector<R: Rng + ?Sized>(
    angles: &AngleVector,
    noise: &NoiseSpec,
    rng: &mut R,
) -> BitString {
    let n = angles.len();
    let mut state = StateVector::new(n).expect("AngleVector length is within 1..=MAX_QUBITS");
    for (q, &theta) in angles.thetas().iter().enumerate() {
        state = state.apply_ry(q, theta).expect("validated");
        state = noise.after_gate(state, q, rng);
    }
    for q in 0..n {
        state = noise.before_measure(state, q, rng);
    }
    state.measure_all(rng)
}

/// Prepare the ancilla with `Ry(theta)` and measure it.
pub fn sample_ancilla<R: Rng + ?Sized>(theta: f64, noise: &NoiseSpec, rng: &mut R) -> Result<bool, QuantumError> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(QuantumError::AngleOutOfRange(theta));
    }
    Ok(noise.sample_qubit(theta, rng))
}

/// Clamp bounds for pheromone angles.
pub const THETA_MIN: f64 = 0.01 * PI;
pub const THETA_MAX: f64 = 0.99 * PI;
