use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::reference::RefGate;
use crate::gates::registry::{DecompositionRegistry, RegistryOp};
use crate::model::{CircuitIR, GateKind, Phase, QramGeometry, QubitRole};

/// Targeted depolarizing injection at a phase boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionSpec {
    pub qubit: usize,
    /// Events fire right after the last gate of this phase.
    pub phase: Phase,
    /// Each of X, Y, Z fires with probability `p / 3`.
    pub p: f64,
}

/// Pauli gate noise. Rates are total probabilities of a non-identity Pauli:
/// a single-qubit site draws X, Y or Z with `e_s / 3` each, a CZ site draws
/// each of the 15 non-identity pairs with `e_t / 15`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub e_t: f64,
    pub e_s: f64,
    pub registry: DecompositionRegistry,
    pub injections: Vec<InjectionSpec>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    pub fn new(e_t: f64) -> Result<Self> {
        Self::with_rates(e_t, e_t / 10.0)
    }

    pub fn with_rates(e_t: f64, e_s: f64) -> Result<Self> {
        let m = Self {
            e_t,
            e_s,
            registry: DecompositionRegistry::standard(),
            injections: Vec::new(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn noiseless() -> Self {
        Self {
            e_t: 0.0,
            e_s: 0.0,
            registry: DecompositionRegistry::standard(),
            injections: Vec::new(),
        }
    }

    pub fn with_injection(mut self, spec: InjectionSpec) -> Result<Self> {
        self.injections.push(spec);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} = {v} is outside [0, 1]")))
            }
        };
        unit("e_t", self.e_t)?;
        unit("e_s", self.e_s)?;
        for inj in &self.injections {
            unit("injection p", inj.p)?;
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.e_t == 0.0 && self.e_s == 0.0 && self.injections.iter().all(|i| i.p == 0.0)
    }
}

/// `e_d = 4p/3` for an injection that applies each Pauli with `p / 3`.
pub fn injection_rate(p: f64) -> Result<f64> {
    if !(0.0..=0.75).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} is outside [0, 3/4]")));
    }
    Ok(4.0 * p / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SiteKind {
    /// Post-gate single-qubit depolarizing.
    Single(usize),
    /// Post-gate two-qubit depolarizing.
    Pair(usize, usize),
    /// Injection on a qubit just before gate `before_gate`.
    Inject(usize),
}

/// One independent error location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub position: usize,
    pub kind: SiteKind,
    pub p: f64,
}

fn push_constituents(
    sites: &mut Vec<Site>,
    position: usize,
    qubits: &[usize],
    gates: &[RefGate],
    model: &NoiseModel,
) {
    for g in gates {
        let site = match *g {
            RefGate::Cz(a, b) => Site {
                position,
                kind: SiteKind::Pair(qubits[a], qubits[b]),
                p: model.e_t,
            },
            RefGate::H(a) | RefGate::X(a) | RefGate::Z(a) | RefGate::Ry(_, a) => Site {
                position,
                kind: SiteKind::Single(qubits[a]),
                p: model.e_s,
            },
        };
        sites.push(site);
    }
}

/// Error sites of a circuit in application order. Sites with zero
/// probability are omitted.
pub fn error_sites(circuit: &CircuitIR, model: &NoiseModel) -> Result<Vec<Site>> {
    model.validate()?;
    let mut sites = Vec::new();
    let mut injections: Vec<(usize, &InjectionSpec)> = model
        .injections
        .iter()
        .map(|s| (circuit.boundary_after(s.phase), s))
        .collect();
    injections.sort_by_key(|(b, _)| *b);
    let count = circuit.geometry().qubit_count();
    for &(_, inj) in &injections {
        if inj.qubit >= count {
            return Err(Error::OperandOutOfRange {
                qubit: inj.qubit,
                count,
            });
        }
    }
    let mut inj_iter = injections.into_iter().peekable();
    let mut recipes = std::collections::HashMap::new();
    for (i, gate) in circuit.gates().iter().enumerate() {
        while let Some((b, spec)) = inj_iter.next_if(|(b, _)| *b == i) {
            sites.push(Site {
                position: b,
                kind: SiteKind::Inject(spec.qubit),
                p: spec.p,
            });
        }
        match gate.kind {
            GateKind::H | GateKind::X => sites.push(Site {
                position: i,
                kind: SiteKind::Single(gate.qubits[0]),
                p: model.e_s,
            }),
            GateKind::Cz => sites.push(Site {
                position: i,
                kind: SiteKind::Pair(gate.qubits[0], gate.qubits[1]),
                p: model.e_t,
            }),
            GateKind::Swap | GateKind::RoutingDown | GateKind::RoutingUp => {
                let op = RegistryOp::for_gate(gate.kind).expect("composite gate");
                let case = gate.connectivity.ok_or_else(|| Error::UnknownConnectivity {
                    op: op.to_string(),
                    case: "none".into(),
                })?;
                let recipe = match recipes.entry((op, case)) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(model.registry.constituents(op, case)?)
                    }
                };
                push_constituents(&mut sites, i, &gate.qubits, recipe, model);
            }
            GateKind::PauliX | GateKind::PauliY | GateKind::PauliZ => {}
        }
    }
    for (b, spec) in inj_iter {
        sites.push(Site {
            position: b,
            kind: SiteKind::Inject(spec.qubit),
            p: spec.p,
        });
    }
    sites.retain(|s| s.p > 0.0);
    Ok(sites)
}

/// Default injection target for a node: its control qubit.
pub fn node_injection(geometry: &QramGeometry, node: usize, p: f64) -> InjectionSpec {
    InjectionSpec {
        qubit: geometry.qubit(QubitRole::Control(node)),
        phase: Phase::DataLoading,
        p,
    }
}
