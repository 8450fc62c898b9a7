//! Random workloads and error configurations shared by the integration tests.
#![allow(dead_code)]

use bbqram::model::{AddressState, CircuitIR, ClassicalData, QramGeometry};
use bbqram::noise::{ErrorConfiguration, GateError, InjectedError, Pauli};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

/// Normalized address state with 1 to `2^L` distinct components.
pub fn random_address<R: Rng>(layers: usize, rng: &mut R) -> AddressState {
    let n = 1usize << layers;
    let mut addrs: Vec<usize> = (0..n).collect();
    addrs.shuffle(rng);
    let k = rng.gen_range(1..=n);
    let raw: Vec<(Complex64, usize)> = addrs[..k]
        .iter()
        .map(|&a| (Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), a))
        .collect();
    let norm = raw.iter().map(|(c, _)| c.norm_sqr()).sum::<f64>().sqrt();
    let comps = raw.into_iter().map(|(c, a)| (c / norm, a)).collect();
    AddressState::new(layers, comps).expect("normalized")
}

pub fn random_data<R: Rng>(geometry: &QramGeometry, rng: &mut R) -> ClassicalData {
    ClassicalData::new((0..geometry.memory_size()).map(|_| rng.gen_range(0..2u8)).collect()).expect("bits")
}

fn random_pauli<R: Rng>(rng: &mut R) -> Pauli {
    Pauli::ALL[rng.gen_range(0..3)]
}

/// Up to four gate errors on the operands of random gates plus an optional
/// injection at a random boundary.
pub fn random_errors<R: Rng>(circuit: &CircuitIR, rng: &mut R) -> ErrorConfiguration {
    let mut errors = ErrorConfiguration::empty();
    for _ in 0..rng.gen_range(0..=4) {
        let position = rng.gen_range(0..circuit.len());
        let qubits = &circuit.gates()[position].qubits;
        let mut paulis = vec![(qubits[rng.gen_range(0..qubits.len())], random_pauli(rng))];
        if qubits.len() > 1 && rng.gen_bool(0.5) {
            paulis.push((qubits[rng.gen_range(0..qubits.len())], random_pauli(rng)));
        }
        errors.gate_errors.push(GateError { position, paulis });
    }
    if rng.gen_bool(0.5) {
        errors.injections.push(InjectedError {
            before_gate: rng.gen_range(0..=circuit.len()),
            qubit: rng.gen_range(0..circuit.geometry().qubit_count()),
            pauli: random_pauli(rng),
        });
    }
    errors.validate(circuit).expect("valid configuration");
    errors
}
