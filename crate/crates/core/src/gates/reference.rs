//! Decomposition circuits over CZ and single-qubit rotations.
//!
//! Text format: one gate per line, `GATE q<slot> [q<slot>]`, where the gate is
//! `H`, `X`, `Z`, `CZ` or `RY(<angle>)`. Slots index the operands of the
//! composite gate being decomposed.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::unitary::{cz, embed, hadamard, pauli_x, pauli_z, ry, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RefGate {
    H(usize),
    X(usize),
    Z(usize),
    Ry(f64, usize),
    Cz(usize, usize),
}

impl RefGate {
    pub fn slots(&self) -> Vec<usize> {
        match *self {
            RefGate::H(a) | RefGate::X(a) | RefGate::Z(a) | RefGate::Ry(_, a) => vec![a],
            RefGate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn is_cz(&self) -> bool {
        matches!(self, RefGate::Cz(..))
    }

    fn matrix(&self) -> CMatrix {
        match *self {
            RefGate::H(_) => hadamard(),
            RefGate::X(_) => pauli_x(),
            RefGate::Z(_) => pauli_z(),
            RefGate::Ry(t, _) => ry(t),
            RefGate::Cz(..) => cz(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCircuit {
    pub operands: usize,
    pub gates: Vec<RefGate>,
}

impl ReferenceCircuit {
    pub fn new(operands: usize, gates: Vec<RefGate>) -> Result<Self> {
        for g in &gates {
            let slots = g.slots();
            if let Some(&s) = slots.iter().find(|&&s| s >= operands) {
                return Err(Error::OperandOutOfRange {
                    qubit: s,
                    count: operands,
                });
            }
            if slots.len() == 2 && slots[0] == slots[1] {
                return Err(Error::InvalidParameter("CZ on a single slot".into()));
            }
        }
        Ok(Self { operands, gates })
    }

    pub fn cz_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_cz()).count()
    }

    pub fn single_qubit_count(&self) -> usize {
        self.gates.len() - self.cz_count()
    }

    pub fn cz_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.gates.iter().filter_map(|g| match *g {
            RefGate::Cz(a, b) => Some((a, b)),
            _ => None,
        })
    }

    pub fn unitary(&self) -> CMatrix {
        let dim = 1 << self.operands;
        let mut u = CMatrix::identity(dim, dim);
        for g in &self.gates {
            u = embed(&g.matrix(), &g.slots(), self.operands) * u;
        }
        u
    }

    /// Copy of the circuit with gate `index` removed.
    pub fn without(&self, index: usize) -> Self {
        let mut gates = self.gates.clone();
        gates.remove(index);
        Self {
            operands: self.operands,
            gates,
        }
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let _ = match *g {
                RefGate::H(a) => writeln!(out, "H q{a}"),
                RefGate::X(a) => writeln!(out, "X q{a}"),
                RefGate::Z(a) => writeln!(out, "Z q{a}"),
                RefGate::Ry(t, a) => writeln!(out, "RY({t:?}) q{a}"),
                RefGate::Cz(a, b) => writeln!(out, "CZ q{a} q{b}"),
            };
        }
        out
    }

    pub fn parse(text: &str, operands: usize) -> Result<Self> {
        let mut gates = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: n + 1, msg };
            let mut fields = line.split_whitespace();
            let name = fields.next().unwrap_or_default();
            let slots = fields
                .map(|f| {
                    f.strip_prefix('q')
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| err(format!("bad operand {f:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let want = if name == "CZ" { 2 } else { 1 };
            if slots.len() != want {
                return Err(err(format!("{name} takes {want} operands")));
            }
            let gate = match name {
                "H" => RefGate::H(slots[0]),
                "X" => RefGate::X(slots[0]),
                "Z" => RefGate::Z(slots[0]),
                "CZ" => RefGate::Cz(slots[0], slots[1]),
                _ => {
                    let angle = name
                        .strip_prefix("RY(")
                        .and_then(|s| s.strip_suffix(')'))
                        .and_then(|s| s.parse::<f64>().ok())
                        .ok_or_else(|| err(format!("unknown gate {name:?}")))?;
                    RefGate::Ry(angle, slots[0])
                }
            };
            gates.push(gate);
        }
        Self::new(operands, gates).map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })
    }
}

fn cnot(control: usize, target: usize, out: &mut Vec<RefGate>) {
    out.extend([RefGate::H(target), RefGate::Cz(control, target), RefGate::H(target)]);
}

fn controlled_h(control: usize, target: usize, out: &mut Vec<RefGate>) {
    out.extend([
        RefGate::Ry(-FRAC_PI_4, target),
        RefGate::Cz(control, target),
        RefGate::Ry(FRAC_PI_4, target),
    ]);
}

/// Upward-routing block on `(c, t1, t2)` where `c` and `t1` only touch `t2`.
/// `flip_control` conjugates the control with X, which moves into a `Z` on
/// `t2` after the control CZ.
fn uprime_block(c: usize, t1: usize, t2: usize, flip_control: bool, out: &mut Vec<RefGate>) {
    cnot(t2, t1, out);
    controlled_h(t1, t2, out);
    out.push(RefGate::Cz(c, t2));
    if flip_control {
        out.push(RefGate::Z(t2));
    }
    controlled_h(t1, t2, out);
    cnot(t2, t1, out);
}

/// 5-CZ circuit for the 3-qubit upward routing unitary, control adjacent to
/// `target2` only.
pub fn uprime_one_target() -> ReferenceCircuit {
    let mut gates = Vec::new();
    uprime_block(0, 1, 2, false, &mut gates);
    ReferenceCircuit::new(3, gates).expect("valid slots")
}

/// 10-CZ router over `(control, input, left, right)` with the input adjacent to
/// the other three.
pub fn router_star() -> ReferenceCircuit {
    let mut gates = Vec::new();
    uprime_block(0, 2, 1, true, &mut gates);
    uprime_block(0, 3, 1, false, &mut gates);
    ReferenceCircuit::new(4, gates).expect("valid slots")
}

pub fn swap_three_cz() -> ReferenceCircuit {
    let mut gates = Vec::new();
    cnot(0, 1, &mut gates);
    cnot(1, 0, &mut gates);
    cnot(0, 1, &mut gates);
    ReferenceCircuit::new(2, gates).expect("valid slots")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::unitary::{max_abs_diff, router_matrix, routing_unitary, swap, RoutingKind};

    #[test]
    fn counts() {
        assert_eq!(uprime_one_target().cz_count(), 5);
        assert_eq!(uprime_one_target().single_qubit_count(), 8);
        assert_eq!(router_star().cz_count(), 10);
        assert_eq!(router_star().single_qubit_count(), 17);
        assert_eq!(swap_three_cz().cz_count(), 3);
        assert_eq!(swap_three_cz().single_qubit_count(), 6);
    }

    #[test]
    fn circuits_compose_to_targets() {
        let u = routing_unitary(RoutingKind::UPrime).matrix;
        assert!(max_abs_diff(&uprime_one_target().unitary(), &u) < 1e-12);
        assert!(max_abs_diff(&router_star().unitary(), &router_matrix()) < 1e-12);
        assert!(max_abs_diff(&swap_three_cz().unitary(), &swap()) < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let r = router_star();
        let back = ReferenceCircuit::parse(&r.dump(), 4).unwrap();
        assert_eq!(back, r);
        assert!(ReferenceCircuit::parse("CZ q0 q4\n", 4).is_err());
        assert!(ReferenceCircuit::parse("CZ q0\n", 4).is_err());
        assert!(ReferenceCircuit::parse("RX(1.0) q0\n", 4).is_err());
    }
}
