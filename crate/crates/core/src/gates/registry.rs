use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::reference::{self, RefGate, ReferenceCircuit};
use crate::model::{Connectivity, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegistryOp {
    RoutingDown,
    RoutingUp,
    Cswap,
    Swap,
}

impl RegistryOp {
    pub const ALL: [RegistryOp; 4] = [
        RegistryOp::RoutingDown,
        RegistryOp::RoutingUp,
        RegistryOp::Cswap,
        RegistryOp::Swap,
    ];

    pub fn for_gate(kind: GateKind) -> Option<Self> {
        match kind {
            GateKind::RoutingDown => Some(RegistryOp::RoutingDown),
            GateKind::RoutingUp => Some(RegistryOp::RoutingUp),
            GateKind::Swap => Some(RegistryOp::Swap),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            RegistryOp::RoutingDown => "route_down",
            RegistryOp::RoutingUp => "route_up",
            RegistryOp::Cswap => "cswap",
            RegistryOp::Swap => "swap",
        }
    }
}

impl fmt::Display for RegistryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for RegistryOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegistryOp::ALL
            .into_iter()
            .find(|o| o.token() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown registry operation {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub cz_count: usize,
    pub single_qubit_count: Option<usize>,
    pub reference: Option<ReferenceCircuit>,
    pub note: String,
}

impl RegistryEntry {
    fn counted(cz_count: usize, note: &str) -> Self {
        Self {
            cz_count,
            single_qubit_count: None,
            reference: None,
            note: note.to_string(),
        }
    }

    fn with_circuit(circuit: ReferenceCircuit, note: &str) -> Self {
        Self {
            cz_count: circuit.cz_count(),
            single_qubit_count: Some(circuit.single_qubit_count()),
            reference: Some(circuit),
            note: note.to_string(),
        }
    }
}

pub type RegistryKey = (RegistryOp, Connectivity);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRegistry {
    entries: BTreeMap<RegistryKey, RegistryEntry>,
}

impl Default for DecompositionRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl DecompositionRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        use Connectivity::*;
        use RegistryOp::*;
        let mut r = Self::empty();
        r.insert(
            (RoutingUp, ControlAdjacentOneTarget),
            RegistryEntry::with_circuit(reference::uprime_one_target(), "U' with control touching one target"),
        );
        r.insert(
            (RoutingUp, ControlAdjacentTwoTargets),
            RegistryEntry::counted(8, "U' with control touching both targets"),
        );
        r.insert(
            (RoutingDown, ControlAdjacentTwoTargets),
            RegistryEntry::counted(7, "U'' downward routing"),
        );
        let star = reference::router_star();
        r.insert(
            (RoutingDown, StarFourQubit),
            RegistryEntry::with_circuit(star.clone(), "two U' blocks sharing the input qubit"),
        );
        r.insert(
            (RoutingUp, StarFourQubit),
            RegistryEntry::with_circuit(star, "two U' blocks sharing the input qubit"),
        );
        r.insert(
            (RoutingUp, ControlHubFourQubit),
            RegistryEntry::counted(12, "four-qubit upward routing U'''"),
        );
        r.insert(
            (Cswap, ControlAdjacentOneTarget),
            RegistryEntry::counted(8, "standard CSWAP"),
        );
        r.insert(
            (Cswap, ControlAdjacentTwoTargets),
            RegistryEntry::counted(10, "standard CSWAP"),
        );
        r.insert(
            (Swap, Pair),
            RegistryEntry::with_circuit(reference::swap_three_cz(), "three CNOTs"),
        );
        r
    }

    pub fn insert(&mut self, key: RegistryKey, entry: RegistryEntry) {
        self.entries.insert(key, entry);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&RegistryKey, &RegistryEntry)> {
        self.entries.iter()
    }

    pub fn get(&self, op: RegistryOp, case: Connectivity) -> Result<&RegistryEntry> {
        self.entries
            .get(&(op, case))
            .ok_or_else(|| Error::UnknownConnectivity {
                op: op.to_string(),
                case: case.to_string(),
            })
    }

    /// Overrides the gate counts of an entry. A reference circuit is kept only
    /// if it still matches the new counts.
    pub fn set_counts(
        &mut self,
        op: RegistryOp,
        case: Connectivity,
        cz: Option<usize>,
        sq: Option<usize>,
    ) {
        let entry = self
            .entries
            .entry((op, case))
            .or_insert_with(|| RegistryEntry::counted(0, "configured"));
        if let Some(cz) = cz {
            entry.cz_count = cz;
        }
        if let Some(sq) = sq {
            entry.single_qubit_count = Some(sq);
        }
        let keep = entry.reference.as_ref().is_some_and(|r| {
            r.cz_count() == entry.cz_count && Some(r.single_qubit_count()) == entry.single_qubit_count
        });
        if !keep {
            entry.reference = None;
        }
    }

    /// CZ operand slots in decomposition order. Count-only entries cycle over
    /// the edges allowed by the connectivity case.
    pub fn cz_pairs(&self, op: RegistryOp, case: Connectivity) -> Result<Vec<(usize, usize)>> {
        let entry = self.get(op, case)?;
        Ok(match &entry.reference {
            Some(r) => r.cz_pairs().collect(),
            None => {
                let edges = case.edges();
                (0..entry.cz_count).map(|i| edges[i % edges.len()]).collect()
            }
        })
    }

    /// Constituent gates used as noise sites. Count-only entries get a
    /// synthesized sequence with the registered counts.
    pub fn constituents(&self, op: RegistryOp, case: Connectivity) -> Result<Vec<RefGate>> {
        let entry = self.get(op, case)?;
        if let Some(r) = &entry.reference {
            return Ok(r.gates.clone());
        }
        let sq = entry.single_qubit_count.unwrap_or(0);
        let pairs = self.cz_pairs(op, case)?;
        let n = case.operand_count();
        let total = pairs.len() + sq;
        let mut gates = Vec::with_capacity(total);
        let (mut ci, mut si) = (0, 0);
        for step in 0..total {
            // spread single-qubit gates evenly between the CZs
            let want_sq = (step + 1) * sq / total.max(1) > si;
            if want_sq && si < sq || ci >= pairs.len() {
                gates.push(RefGate::H(si % n));
                si += 1;
            } else {
                gates.push(RefGate::Cz(pairs[ci].0, pairs[ci].1));
                ci += 1;
            }
        }
        Ok(gates)
    }

    /// CZ slots of the standard-CSWAP baseline for a composite gate.
    pub fn baseline_pairs(&self, kind: GateKind, case: Connectivity) -> Result<Vec<(usize, usize)>> {
        let map = |pairs: Vec<(usize, usize)>, slots: [usize; 3]| -> Vec<(usize, usize)> {
            pairs.into_iter().map(|(a, b)| (slots[a], slots[b])).collect()
        };
        match (kind, case) {
            (GateKind::Cz, _) => Ok(vec![(0, 1)]),
            (GateKind::Swap, _) => self.cz_pairs(RegistryOp::Swap, case),
            (GateKind::RoutingDown | GateKind::RoutingUp, Connectivity::StarFourQubit) => {
                let p = self.cz_pairs(RegistryOp::Cswap, Connectivity::ControlAdjacentOneTarget)?;
                let mut out = map(p.clone(), [0, 2, 1]);
                out.extend(map(p, [0, 3, 1]));
                Ok(out)
            }
            (GateKind::RoutingDown | GateKind::RoutingUp, Connectivity::ControlHubFourQubit) => {
                let p = self.cz_pairs(RegistryOp::Cswap, Connectivity::ControlAdjacentTwoTargets)?;
                let mut out = map(p.clone(), [0, 1, 2]);
                out.extend(map(p, [0, 1, 3]));
                Ok(out)
            }
            (GateKind::RoutingDown | GateKind::RoutingUp, c) => self.cz_pairs(RegistryOp::Cswap, c),
            (k, c) => Err(Error::UnknownConnectivity {
                op: k.token().to_string(),
                case: c.to_string(),
            }),
        }
    }

    /// CZ slots of the optimized decomposition for a composite gate.
    pub fn optimized_pairs(&self, kind: GateKind, case: Connectivity) -> Result<Vec<(usize, usize)>> {
        match kind {
            GateKind::Cz => Ok(vec![(0, 1)]),
            _ => match RegistryOp::for_gate(kind) {
                Some(op) => self.cz_pairs(op, case),
                None => Ok(Vec::new()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Connectivity::*;

    #[test]
    fn standard_counts() {
        let r = DecompositionRegistry::standard();
        let cz = |op, case| r.get(op, case).unwrap().cz_count;
        assert_eq!(cz(RegistryOp::RoutingUp, ControlAdjacentOneTarget), 5);
        assert_eq!(cz(RegistryOp::RoutingUp, ControlAdjacentTwoTargets), 8);
        assert_eq!(cz(RegistryOp::RoutingDown, ControlAdjacentTwoTargets), 7);
        assert_eq!(cz(RegistryOp::RoutingUp, ControlHubFourQubit), 12);
        assert_eq!(cz(RegistryOp::Cswap, ControlAdjacentOneTarget), 8);
        assert_eq!(cz(RegistryOp::Cswap, ControlAdjacentTwoTargets), 10);
        assert_eq!(cz(RegistryOp::Swap, Pair), 3);
        assert_eq!(cz(RegistryOp::RoutingDown, StarFourQubit), 10);
        for (_, e) in r.entries() {
            if let Some(c) = &e.reference {
                assert_eq!(c.cz_count(), e.cz_count);
            }
        }
    }

    #[test]
    fn baseline_router_is_two_cswaps() {
        let r = DecompositionRegistry::standard();
        assert_eq!(r.baseline_pairs(GateKind::RoutingDown, StarFourQubit).unwrap().len(), 16);
        assert_eq!(r.baseline_pairs(GateKind::RoutingUp, ControlHubFourQubit).unwrap().len(), 20);
        for (a, b) in r.baseline_pairs(GateKind::RoutingUp, StarFourQubit).unwrap() {
            assert!(StarFourQubit.is_edge(a, b));
        }
    }

    #[test]
    fn synthesized_constituents_keep_counts() {
        let mut r = DecompositionRegistry::standard();
        r.set_counts(RegistryOp::RoutingUp, StarFourQubit, None, Some(16));
        assert!(r.get(RegistryOp::RoutingUp, StarFourQubit).unwrap().reference.is_none());
        let g = r.constituents(RegistryOp::RoutingUp, StarFourQubit).unwrap();
        assert_eq!(g.iter().filter(|g| g.is_cz()).count(), 10);
        assert_eq!(g.len(), 26);
        for g in &g {
            if let RefGate::Cz(a, b) = *g {
                assert!(StarFourQubit.is_edge(a, b));
            }
        }
        r.set_counts(RegistryOp::Swap, Pair, Some(3), Some(6));
        assert!(r.get(RegistryOp::Swap, Pair).unwrap().reference.is_some());
    }

    #[test]
    fn unknown_case_errors() {
        let r = DecompositionRegistry::standard();
        assert!(matches!(
            r.get(RegistryOp::RoutingDown, ControlHubFourQubit),
            Err(Error::UnknownConnectivity { .. })
        ));
    }
}
