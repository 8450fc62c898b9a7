use std::collections::HashMap;

use num_complex::Complex64;

use crate::ecs::state::{gram_sum, EcsState, Tag};
use crate::error::{Error, Result};
use crate::model::{AddressState, CircuitIR, ClassicalData, QramGeometry};
use crate::noise::ErrorConfiguration;

/// Applies the circuit, inserting injections before their gate and each gate's
/// sampled Paulis right after it.
pub fn run_circuit(state: &mut EcsState, circuit: &CircuitIR, errors: &ErrorConfiguration) -> Result<()> {
    let mut gate_errors = errors.gate_errors.iter().peekable();
    let mut injections = errors.injections.iter().peekable();
    for (i, gate) in circuit.gates().iter().enumerate() {
        while let Some(inj) = injections.next_if(|e| e.before_gate == i) {
            state.apply_pauli(inj.qubit, inj.pauli)?;
        }
        state.apply_gate(gate)?;
        while let Some(e) = gate_errors.next_if(|e| e.position == i) {
            for &(q, p) in &e.paulis {
                state.apply_pauli(q, p)?;
            }
        }
    }
    for inj in injections {
        if inj.before_gate != circuit.len() {
            return Err(Error::InvalidParameter(format!(
                "injection before gate {} is out of order",
                inj.before_gate
            )));
        }
        state.apply_pauli(inj.qubit, inj.pauli)?;
    }
    if let Some(e) = gate_errors.next() {
        return Err(Error::InvalidParameter(format!(
            "gate error at {} is out of order or past the end",
            e.position
        )));
    }
    Ok(())
}

/// `<psi_ideal|AD_k>` for the address/data part of one component.
fn ideal_overlap(
    ad: &[Tag],
    layers: usize,
    alpha: &HashMap<usize, Complex64>,
    address: &AddressState,
    data: &ClassicalData,
) -> Complex64 {
    if ad.iter().all(|t| t.is_computational()) {
        let i = ad[..layers]
            .iter()
            .fold(0usize, |acc, &t| (acc << 1) | (t == Tag::One) as usize);
        return match alpha.get(&i) {
            Some(a) if Tag::from_bit(data.get(i)) == ad[layers] => a.conj(),
            _ => Complex64::new(0.0, 0.0),
        };
    }
    let mut total = Complex64::new(0.0, 0.0);
    for &(a, i) in address.components() {
        let mut ov = Tag::from_bit(data.get(i)).overlap(ad[layers]);
        for (layer, &t) in ad[..layers].iter().enumerate() {
            if ov == 0.0 {
                break;
            }
            ov *= Tag::from_bit(address.bit(i, layer + 1)).overlap(t);
        }
        total += a.conj() * ov;
    }
    total
}

/// `<psi_ideal| Tr_R rho |psi_ideal>` where `R` is every qubit other than the
/// address register and `D`. Components sharing a router pattern are summed
/// before the pairwise overlaps.
pub fn query_fidelity(
    state: &EcsState,
    geometry: &QramGeometry,
    address: &AddressState,
    data: &ClassicalData,
) -> Result<f64> {
    address.check(geometry)?;
    data.check(geometry)?;
    if state.qubit_count() != geometry.qubit_count() {
        return Err(Error::SizeMismatch(format!(
            "state has {} qubits, geometry needs {}",
            state.qubit_count(),
            geometry.qubit_count()
        )));
    }
    let l = geometry.layers();
    let alpha = address.amplitude_map();
    let mut index: HashMap<&[Tag], usize> = HashMap::new();
    let mut groups: Vec<(&[Tag], Complex64)> = Vec::new();
    for k in 0..state.len() {
        let tags = state.tags(k);
        let a = ideal_overlap(&tags[..=l], l, &alpha, address, data);
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let routers = &tags[l + 1..];
        let s = state.amplitude(k) * a;
        match index.get(routers) {
            Some(&g) => groups[g].1 += s,
            None => {
                index.insert(routers, groups.len());
                groups.push((routers, s));
            }
        }
    }
    Ok(gram_sum(&groups).clamp(0.0, 1.0))
}

/// Total `|alpha_i|^2` over addresses whose root-to-leaf path has no errored
/// node or leaf.
pub fn error_free_amplitude_mass(
    address: &AddressState,
    errors: &ErrorConfiguration,
    circuit: &CircuitIR,
) -> Result<f64> {
    let geometry = circuit.geometry();
    address.check(geometry)?;
    let errored = errors.errored_elements(circuit)?;
    Ok(address
        .components()
        .iter()
        .filter(|&&(_, i)| !errored.iter().any(|&e| geometry.path_contains(i, e)))
        .map(|(a, _)| a.norm_sqr())
        .sum())
}

/// Noiseless-run helper: build, simulate and score in one call.
pub fn simulate_query(
    circuit: &CircuitIR,
    address: &AddressState,
    data: &ClassicalData,
    errors: &ErrorConfiguration,
) -> Result<(EcsState, f64)> {
    let geometry = circuit.geometry();
    let mut state = EcsState::init_state(geometry, address)?;
    run_circuit(&mut state, circuit, errors)?;
    let f = query_fidelity(&state, geometry, address, data)?;
    Ok((state, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_query_circuit, GateKind, PathElement, Phase, QubitRole};
    use crate::noise::{GateError, Pauli};

    #[test]
    fn noiseless_is_perfect_for_all_small_cases() {
        for l in 1..=2 {
            let g = QramGeometry::new(l).unwrap();
            let n = g.memory_size();
            for word in 0..(1usize << n) {
                let bits = (0..n).map(|i| ((word >> i) & 1) as u8).collect();
                let data = ClassicalData::new(bits).unwrap();
                let c = build_query_circuit(g, &data).unwrap();
                let mut addresses: Vec<_> = (0..n).map(|i| AddressState::basis(l, i).unwrap()).collect();
                addresses.push(AddressState::uniform(l));
                for a in &addresses {
                    let (s, f) = simulate_query(&c, a, &data, &ErrorConfiguration::empty()).unwrap();
                    assert!((f - 1.0).abs() < 1e-12, "l={l} data={data} f={f}");
                    // routers and incidents back in |0>, leaves hold the data
                    for k in 0..s.len() {
                        for node in g.nodes() {
                            assert_eq!(s.tag(k, g.qubit(QubitRole::Control(node))), Tag::Zero);
                            assert_eq!(s.tag(k, g.qubit(QubitRole::Incident(node))), Tag::Zero);
                        }
                        for i in 0..n {
                            let leaf = s.tag(k, g.qubit(QubitRole::Leaf(i)));
                            assert_eq!(leaf, Tag::from_bit(data.get(i)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn larger_trees_are_noiselessly_exact() {
        for l in 3..=6 {
            let g = QramGeometry::new(l).unwrap();
            let data = ClassicalData::ones(&g);
            let c = build_query_circuit(g, &data).unwrap();
            let a = AddressState::uniform(l);
            let (s, f) = simulate_query(&c, &a, &data, &ErrorConfiguration::empty()).unwrap();
            assert_eq!(s.len(), g.memory_size());
            assert!((f - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn wrong_data_gives_zero() {
        let g = QramGeometry::new(2).unwrap();
        let data = ClassicalData::parse("0000", &g).unwrap();
        let c = build_query_circuit(g, &data).unwrap();
        let a = AddressState::basis(2, 2).unwrap();
        let mut s = EcsState::init_state(&g, &a).unwrap();
        run_circuit(&mut s, &c, &ErrorConfiguration::empty()).unwrap();
        s.apply_pauli(g.qubit(QubitRole::Data), Pauli::X).unwrap();
        assert_eq!(query_fidelity(&s, &g, &a, &data).unwrap(), 0.0);
    }

    #[test]
    fn far_branch_error_is_harmless() {
        let g = QramGeometry::new(2).unwrap();
        let data = ClassicalData::parse("0101", &g).unwrap();
        let c = build_query_circuit(g, &data).unwrap();
        let a = AddressState::basis(2, 0).unwrap();
        // X on the control of node 3 (serving addresses 10, 11) right after data writing
        let pos = c.boundary_after(Phase::DataWriting) - 1;
        let errors = ErrorConfiguration {
            gate_errors: vec![GateError {
                position: pos,
                paulis: vec![(g.qubit(QubitRole::Control(3)), Pauli::X)],
            }],
            injections: vec![],
        };
        let (_, f) = simulate_query(&c, &a, &data, &errors).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_mass() {
        let g = QramGeometry::new(2).unwrap();
        let c = build_query_circuit(g, &ClassicalData::ones(&g)).unwrap();
        let a = AddressState::uniform(2);
        assert_eq!(error_free_amplitude_mass(&a, &ErrorConfiguration::empty(), &c).unwrap(), 1.0);
        let pos = c
            .gates()
            .iter()
            .position(|x| x.kind == GateKind::RoutingUp && x.qubits[0] == g.qubit(QubitRole::Control(2)))
            .unwrap();
        let e = ErrorConfiguration {
            gate_errors: vec![GateError {
                position: pos,
                paulis: vec![(c.gates()[pos].qubits[1], Pauli::Z)],
            }],
            injections: vec![],
        };
        assert_eq!(e.errored_elements(&c).unwrap().into_iter().next(), Some(PathElement::Node(2)));
        assert!((error_free_amplitude_mass(&a, &e, &c).unwrap() - 0.5).abs() < 1e-15);
    }
}
