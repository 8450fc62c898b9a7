use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CircuitIR, PathElement, QramGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Index 0..15 of a non-identity two-qubit Pauli, `(first, second)` with
    /// `None` meaning identity.
    pub fn pair_from_index(index: usize) -> (Option<Pauli>, Option<Pauli>) {
        debug_assert!(index < 15);
        let code = index + 1;
        let pick = |c: usize| match c {
            0 => None,
            c => Some(Pauli::ALL[c - 1]),
        };
        (pick(code / 4), pick(code % 4))
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" => Ok(Pauli::X),
            "Y" => Ok(Pauli::Y),
            "Z" => Ok(Pauli::Z),
            _ => Err(Error::InvalidParameter(format!("unknown Pauli {s:?}"))),
        }
    }
}

/// Paulis applied right after gate `position`, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateError {
    pub position: usize,
    pub paulis: Vec<(usize, Pauli)>,
}

/// A Pauli applied just before gate `before_gate` (or at the end of the
/// circuit when it equals the gate count).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedError {
    pub before_gate: usize,
    pub qubit: usize,
    pub pauli: Pauli,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorConfiguration {
    pub gate_errors: Vec<GateError>,
    pub injections: Vec<InjectedError>,
}

impl ErrorConfiguration {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.gate_errors.is_empty() && self.injections.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.gate_errors.iter().map(|e| e.paulis.len()).sum::<usize>() + self.injections.len()
    }

    /// Sorts events by position and checks them against `circuit`.
    pub fn validate(&mut self, circuit: &CircuitIR) -> Result<()> {
        self.gate_errors.sort_by_key(|e| e.position);
        self.injections.sort_by_key(|e| e.before_gate);
        let count = circuit.geometry().qubit_count();
        for e in &self.gate_errors {
            if e.position >= circuit.len() {
                return Err(Error::InvalidParameter(format!(
                    "error at gate {} but the circuit has {} gates",
                    e.position,
                    circuit.len()
                )));
            }
            if e.paulis.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "identity error string at gate {}",
                    e.position
                )));
            }
            if let Some(&(qubit, _)) = e.paulis.iter().find(|(q, _)| *q >= count) {
                return Err(Error::OperandOutOfRange { qubit, count });
            }
        }
        for inj in &self.injections {
            if inj.before_gate > circuit.len() {
                return Err(Error::InvalidParameter(format!(
                    "injection before gate {} beyond circuit end",
                    inj.before_gate
                )));
            }
            if inj.qubit >= count {
                return Err(Error::OperandOutOfRange {
                    qubit: inj.qubit,
                    count,
                });
            }
        }
        Ok(())
    }

    /// Path elements touched by an error. Gate errors belong to the first
    /// tree operand of their gate; injections to their qubit.
    pub fn errored_elements(&self, circuit: &CircuitIR) -> Result<BTreeSet<PathElement>> {
        let geometry = circuit.geometry();
        let mut out = BTreeSet::new();
        for e in &self.gate_errors {
            let gate = circuit.gates().get(e.position).ok_or_else(|| {
                Error::InvalidParameter(format!("no gate at position {}", e.position))
            })?;
            out.insert(gate_element(geometry, &gate.qubits)?);
        }
        for inj in &self.injections {
            out.insert(geometry.element_of(inj.qubit)?);
        }
        Ok(out)
    }
}

pub fn gate_element(geometry: &QramGeometry, qubits: &[usize]) -> Result<PathElement> {
    for &q in qubits {
        if q > geometry.layers() {
            return geometry.element_of(q);
        }
    }
    Ok(PathElement::Node(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indices_cover_fifteen() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..15 {
            let p = Pauli::pair_from_index(i);
            assert_ne!(p, (None, None));
            assert!(seen.insert(p));
        }
    }
}
