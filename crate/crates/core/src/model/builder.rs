//! Canonical five-phase query circuit.
//!
//! Retrieval copies the routed data into `D` with a CNOT and then runs the
//! upward routing backwards, so every router and leaf returns to its
//! pre-retrieval value. Swapping `I_1` into `D` instead would leave
//! address-dependent residue in the tree and break the trace over routers.

use crate::error::Result;
use crate::model::{
    CircuitIR, ClassicalData, GateApp, GateKind, Phase, QramGeometry, QubitRole,
};

fn route(geometry: &QramGeometry, kind: GateKind, node: usize, phase: Phase) -> GateApp {
    let r = geometry.router(node);
    GateApp::new(kind, vec![r.control, r.input, r.left, r.right], phase)
}

fn address_loading(geometry: &QramGeometry) -> Vec<GateApp> {
    let phase = Phase::AddressLoading;
    let root_in = geometry.qubit(QubitRole::Incident(1));
    let mut gates = Vec::new();
    for layer in 1..=geometry.layers() {
        gates.push(GateApp::new(
            GateKind::Swap,
            vec![geometry.qubit(QubitRole::Address(layer)), root_in],
            phase,
        ));
        for upper in 1..layer {
            for node in geometry.nodes_in_layer(upper) {
                gates.push(route(geometry, GateKind::RoutingDown, node, phase));
            }
        }
        for node in geometry.nodes_in_layer(layer) {
            gates.push(GateApp::new(
                GateKind::Swap,
                vec![
                    geometry.qubit(QubitRole::Incident(node)),
                    geometry.qubit(QubitRole::Control(node)),
                ],
                phase,
            ));
        }
    }
    gates
}

pub fn build_query_circuit(geometry: QramGeometry, data: &ClassicalData) -> Result<CircuitIR> {
    data.check(&geometry)?;
    let l = geometry.layers();
    let mut gates = address_loading(&geometry);

    for (i, &bit) in data.bits().iter().enumerate() {
        if bit == 1 {
            gates.push(GateApp::new(
                GateKind::X,
                vec![geometry.qubit(QubitRole::Leaf(i))],
                Phase::DataLoading,
            ));
        }
    }

    for node in geometry.nodes_in_layer(l) {
        gates.push(route(&geometry, GateKind::RoutingUp, node, Phase::DataWriting));
    }

    let phase = Phase::DataRetrieval;
    for layer in (1..l).rev() {
        for node in geometry.nodes_in_layer(layer) {
            gates.push(route(&geometry, GateKind::RoutingUp, node, phase));
        }
    }
    let root_in = geometry.qubit(QubitRole::Incident(1));
    let d = geometry.qubit(QubitRole::Data);
    gates.push(GateApp::new(GateKind::H, vec![d], phase));
    gates.push(GateApp::new(GateKind::Cz, vec![root_in, d], phase));
    gates.push(GateApp::new(GateKind::H, vec![d], phase));
    for layer in 1..=l {
        for node in geometry.nodes_in_layer(layer) {
            gates.push(route(&geometry, GateKind::RoutingUp, node, phase));
        }
    }

    let mut retrieval = address_loading(&geometry);
    retrieval.reverse();
    for g in &mut retrieval {
        g.phase = Phase::AddressRetrieval;
    }
    gates.extend(retrieval);

    CircuitIR::from_gates(geometry, gates)
}
