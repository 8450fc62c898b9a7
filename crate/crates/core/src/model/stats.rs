//! CZ counts and greedy CZ depth under the optimized and baseline
//! decompositions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::registry::DecompositionRegistry;
use crate::model::{CircuitIR, GateApp, GateKind, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CzTally {
    pub cz_count: usize,
    pub cz_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SchemeStats {
    pub total: CzTally,
    pub per_phase: BTreeMap<Phase, CzTally>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateStats {
    pub gate_count: usize,
    pub optimized: SchemeStats,
    pub baseline: SchemeStats,
    /// `(baseline - optimized) / baseline` for the CZ count; absent when the
    /// baseline is zero.
    pub count_reduction: Option<f64>,
    pub depth_reduction: Option<f64>,
}

/// Greedy layering: each CZ goes one layer after the latest CZ on either of
/// its qubits.
pub fn greedy_depth(pairs: &[(usize, usize)]) -> usize {
    let mut last: BTreeMap<usize, usize> = BTreeMap::new();
    let mut depth = 0;
    for &(a, b) in pairs {
        let layer = last.get(&a).copied().unwrap_or(0).max(last.get(&b).copied().unwrap_or(0)) + 1;
        last.insert(a, layer);
        last.insert(b, layer);
        depth = depth.max(layer);
    }
    depth
}

fn expand(
    gates: &[GateApp],
    registry: &DecompositionRegistry,
    baseline: bool,
) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for gate in gates {
        if !matches!(gate.kind, GateKind::Cz | GateKind::Swap) && !gate.kind.is_routing() {
            continue;
        }
        let case = gate.connectivity.ok_or_else(|| Error::UnknownConnectivity {
            op: gate.kind.token().to_string(),
            case: "none".to_string(),
        })?;
        if case.operand_count() != gate.qubits.len() {
            return Err(Error::UnknownConnectivity {
                op: gate.kind.token().to_string(),
                case: case.to_string(),
            });
        }
        let slots = if baseline {
            registry.baseline_pairs(gate.kind, case)?
        } else {
            registry.optimized_pairs(gate.kind, case)?
        };
        out.extend(slots.into_iter().map(|(a, b)| (gate.qubits[a], gate.qubits[b])));
    }
    Ok(out)
}

fn scheme(circuit: &CircuitIR, registry: &DecompositionRegistry, baseline: bool) -> Result<SchemeStats> {
    let all = expand(circuit.gates(), registry, baseline)?;
    let mut per_phase = BTreeMap::new();
    for phase in Phase::ALL {
        let pairs = expand(&circuit.gates()[circuit.phase_range(phase)], registry, baseline)?;
        per_phase.insert(
            phase,
            CzTally {
                cz_count: pairs.len(),
                cz_depth: greedy_depth(&pairs),
            },
        );
    }
    Ok(SchemeStats {
        total: CzTally {
            cz_count: all.len(),
            cz_depth: greedy_depth(&all),
        },
        per_phase,
    })
}

fn reduction(baseline: usize, optimized: usize) -> Option<f64> {
    (baseline > 0).then(|| (baseline as f64 - optimized as f64) / baseline as f64)
}

pub fn circuit_stats(circuit: &CircuitIR, registry: &DecompositionRegistry) -> Result<GateStats> {
    let optimized = scheme(circuit, registry, false)?;
    let baseline = scheme(circuit, registry, true)?;
    Ok(GateStats {
        gate_count: circuit.len(),
        count_reduction: reduction(baseline.total.cz_count, optimized.total.cz_count),
        depth_reduction: reduction(baseline.total.cz_depth, optimized.total.cz_depth),
        optimized,
        baseline,
    })
}
