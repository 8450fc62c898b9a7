//! Circuit intermediate representation and its line-oriented text format.
//!
//! Each line is `PHASE GATE q1 [q2 [q3 [q4]]]` with qubits written by role
//! (`A1`, `D`, `C3`, `I5`, `F2`). Blank lines and lines starting with `#` are
//! ignored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QramGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Swap,
    RoutingDown,
    RoutingUp,
    Cz,
    PauliX,
    PauliY,
    PauliZ,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::PauliX | GateKind::PauliY | GateKind::PauliZ => 1,
            GateKind::Swap | GateKind::Cz => 2,
            GateKind::RoutingDown | GateKind::RoutingUp => 4,
        }
    }

    pub fn is_routing(self) -> bool {
        matches!(self, GateKind::RoutingDown | GateKind::RoutingUp)
    }

    pub fn token(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Swap => "SWAP",
            GateKind::RoutingDown => "ROUTE_DOWN",
            GateKind::RoutingUp => "ROUTE_UP",
            GateKind::Cz => "CZ",
            GateKind::PauliX => "PX",
            GateKind::PauliY => "PY",
            GateKind::PauliZ => "PZ",
        }
    }

    /// Default connectivity annotation for CZ accounting.
    pub fn default_connectivity(self) -> Option<Connectivity> {
        match self {
            GateKind::Swap | GateKind::Cz => Some(Connectivity::Pair),
            GateKind::RoutingDown | GateKind::RoutingUp => Some(Connectivity::StarFourQubit),
            _ => None,
        }
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "SWAP" => GateKind::Swap,
            "ROUTE_DOWN" => GateKind::RoutingDown,
            "ROUTE_UP" => GateKind::RoutingUp,
            "CZ" => GateKind::Cz,
            "PX" => GateKind::PauliX,
            "PY" => GateKind::PauliY,
            "PZ" => GateKind::PauliZ,
            _ => return Err(Error::InvalidParameter(format!("unknown gate {s:?}"))),
        })
    }
}

/// The five query phases, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    AddressLoading,
    DataLoading,
    DataWriting,
    DataRetrieval,
    AddressRetrieval,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::AddressLoading,
        Phase::DataLoading,
        Phase::DataWriting,
        Phase::DataRetrieval,
        Phase::AddressRetrieval,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Phase::AddressLoading => "address_loading",
            Phase::DataLoading => "data_loading",
            Phase::DataWriting => "data_writing",
            Phase::DataRetrieval => "data_retrieval",
            Phase::AddressRetrieval => "address_retrieval",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Phase::ALL
            .into_iter()
            .find(|p| p.token() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown phase {s:?}")))
    }
}

/// Qubit connectivity assumed when booking the CZ cost of a composite gate.
///
/// Three-qubit cases use operand order `(control, target1, target2)`; the
/// four-qubit cases use `(control, input, left, right)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Connectivity {
    /// Two adjacent qubits.
    Pair,
    /// Control touches `target2` only; the targets touch each other.
    ControlAdjacentOneTarget,
    /// Control touches both targets; the targets do not touch.
    ControlAdjacentTwoTargets,
    /// The input qubit touches the control and both outputs.
    StarFourQubit,
    /// The control touches the input and both outputs.
    ControlHubFourQubit,
}

impl Connectivity {
    pub const ALL: [Connectivity; 5] = [
        Connectivity::Pair,
        Connectivity::ControlAdjacentOneTarget,
        Connectivity::ControlAdjacentTwoTargets,
        Connectivity::StarFourQubit,
        Connectivity::ControlHubFourQubit,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Connectivity::Pair => "pair",
            Connectivity::ControlAdjacentOneTarget => "one_target",
            Connectivity::ControlAdjacentTwoTargets => "two_targets",
            Connectivity::StarFourQubit => "star",
            Connectivity::ControlHubFourQubit => "control_hub",
        }
    }

    pub fn operand_count(self) -> usize {
        match self {
            Connectivity::Pair => 2,
            Connectivity::ControlAdjacentOneTarget | Connectivity::ControlAdjacentTwoTargets => 3,
            Connectivity::StarFourQubit | Connectivity::ControlHubFourQubit => 4,
        }
    }

    /// Operand-slot pairs that may host a CZ.
    pub fn edges(self) -> &'static [(usize, usize)] {
        match self {
            Connectivity::Pair => &[(0, 1)],
            Connectivity::ControlAdjacentOneTarget => &[(0, 2), (1, 2)],
            Connectivity::ControlAdjacentTwoTargets => &[(0, 1), (0, 2)],
            Connectivity::StarFourQubit => &[(1, 0), (1, 2), (1, 3)],
            Connectivity::ControlHubFourQubit => &[(0, 1), (0, 2), (0, 3)],
        }
    }

    pub fn is_edge(self, a: usize, b: usize) -> bool {
        self.edges()
            .iter()
            .any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Connectivity::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown connectivity case {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateApp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub phase: Phase,
    pub connectivity: Option<Connectivity>,
}

impl GateApp {
    pub fn new(kind: GateKind, qubits: Vec<usize>, phase: Phase) -> Self {
        debug_assert_eq!(qubits.len(), kind.arity());
        Self {
            kind,
            qubits,
            phase,
            connectivity: kind.default_connectivity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitIR {
    geometry: QramGeometry,
    gates: Vec<GateApp>,
}

impl CircuitIR {
    pub fn new(geometry: QramGeometry) -> Self {
        Self {
            geometry,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(geometry: QramGeometry, gates: Vec<GateApp>) -> Result<Self> {
        let mut circuit = Self::new(geometry);
        for gate in gates {
            circuit.push(gate)?;
        }
        Ok(circuit)
    }

    pub fn push(&mut self, gate: GateApp) -> Result<()> {
        if gate.qubits.len() != gate.kind.arity() {
            return Err(Error::InvalidParameter(format!(
                "{} takes {} operands, got {}",
                gate.kind.token(),
                gate.kind.arity(),
                gate.qubits.len()
            )));
        }
        let count = self.geometry.qubit_count();
        if let Some(&qubit) = gate.qubits.iter().find(|&&q| q >= count) {
            return Err(Error::OperandOutOfRange { qubit, count });
        }
        for (i, q) in gate.qubits.iter().enumerate() {
            if gate.qubits[..i].contains(q) {
                return Err(Error::InvalidParameter(format!(
                    "{} repeats operand {}",
                    gate.kind.token(),
                    self.geometry.name(*q)
                )));
            }
        }
        if let Some(last) = self.gates.last() {
            if gate.phase < last.phase {
                return Err(Error::InvalidParameter(format!(
                    "phase {} after {} breaks canonical order",
                    gate.phase, last.phase
                )));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn geometry(&self) -> &QramGeometry {
        &self.geometry
    }

    pub fn gates(&self) -> &[GateApp] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Index range of the gates carrying `phase`.
    pub fn phase_range(&self, phase: Phase) -> std::ops::Range<usize> {
        let start = self.gates.partition_point(|g| g.phase < phase);
        let end = self.gates.partition_point(|g| g.phase <= phase);
        start..end
    }

    /// Gate index right after the last gate of `phase` (the phase boundary).
    pub fn boundary_after(&self, phase: Phase) -> usize {
        self.phase_range(phase).end
    }

    /// Keeps only the gates of the phases up to and including `phase`.
    pub fn truncated_after(&self, phase: Phase) -> Self {
        Self {
            geometry: self.geometry,
            gates: self.gates[..self.boundary_after(phase)].to_vec(),
        }
    }

    pub fn phases_in_order(&self) -> bool {
        self.gates.windows(2).all(|w| w[0].phase <= w[1].phase)
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for gate in &self.gates {
            out.push_str(gate.phase.token());
            out.push(' ');
            out.push_str(gate.kind.token());
            for &q in &gate.qubits {
                out.push(' ');
                out.push_str(&self.geometry.name(q));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, geometry: QramGeometry) -> Result<Self> {
        let mut circuit = Self::new(geometry);
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |e: Error| Error::Parse {
                line: n + 1,
                msg: e.to_string(),
            };
            let mut fields = line.split_whitespace();
            let phase: Phase = fields.next().unwrap_or_default().parse().map_err(err)?;
            let kind: GateKind = fields
                .next()
                .ok_or_else(|| err(Error::InvalidParameter("missing gate".into())))?
                .parse()
                .map_err(err)?;
            let qubits = fields
                .map(|name| geometry.parse_qubit(name))
                .collect::<Result<Vec<_>>>()
                .map_err(err)?;
            circuit.push(GateApp::new_checked(kind, qubits, phase).map_err(err)?).map_err(err)?;
        }
        Ok(circuit)
    }
}

impl GateApp {
    fn new_checked(kind: GateKind, qubits: Vec<usize>, phase: Phase) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidParameter(format!(
                "{} takes {} operands, got {}",
                kind.token(),
                kind.arity(),
                qubits.len()
            )));
        }
        Ok(Self::new(kind, qubits, phase))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_order_phases() {
        let g = QramGeometry::new(1).unwrap();
        let mut c = CircuitIR::new(g);
        c.push(GateApp::new(GateKind::X, vec![3], Phase::DataLoading)).unwrap();
        let err = c.push(GateApp::new(GateKind::X, vec![3], Phase::AddressLoading));
        assert!(err.is_err());
    }

    #[test]
    fn parse_reports_line() {
        let g = QramGeometry::new(1).unwrap();
        let text = "address_loading SWAP A1 I1\n\ndata_loading X F9\n";
        match CircuitIR::parse(text, g) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(CircuitIR::parse("data_loading SWAP A1\n", g).is_err());
        assert!(CircuitIR::parse("data_loading SWAP A1 A1\n", g).is_err());
    }

    #[test]
    fn connectivity_edges() {
        assert!(Connectivity::StarFourQubit.is_edge(0, 1));
        assert!(!Connectivity::StarFourQubit.is_edge(0, 2));
        assert!(Connectivity::ControlAdjacentOneTarget.is_edge(2, 1));
        assert!(!Connectivity::ControlAdjacentOneTarget.is_edge(0, 1));
        for c in Connectivity::ALL {
            assert_eq!(c.token().parse::<Connectivity>().unwrap(), c);
        }
    }
}
