//! Tree geometry and logical qubit roles of an `L`-layer bucket-brigade QRAM.
//!
//! Nodes use heap order: the root is node 1, node `k` has children `2k` and
//! `2k + 1`, and node `k` sits on layer `floor(log2 k) + 1`. Every node owns a
//! control qubit `C_k` and an incident qubit `I_k`; the layer-`L` nodes route
//! to the leaf qubits `F_0 .. F_{N-1}`.
//!
//! Qubit indices are laid out as
//!
//! ```text
//! A_1 .. A_L | D | C_1 .. C_{N-1} | I_1 .. I_{N-1} | F_0 .. F_{N-1}
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported tree depth. Beyond this the sparse engine still works in
/// principle but address bitstrings no longer fit comfortably in a `u64`.
pub const MAX_LAYERS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QramGeometry {
    layers: usize,
}

/// The role of a logical qubit. Address indices are 1-based (`A1` is the
/// root-level routing bit), node indices use heap order, leaves are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QubitRole {
    Address(usize),
    Data,
    Control(usize),
    Incident(usize),
    Leaf(usize),
}

/// A position on a root-to-leaf path. Errors are attributed to these when
/// computing the error-free amplitude mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathElement {
    Node(usize),
    Leaf(usize),
}

/// The two outputs a router at some node writes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouterOperands {
    pub control: usize,
    pub input: usize,
    pub left: usize,
    pub right: usize,
}

impl QramGeometry {
    pub fn new(layers: usize) -> Result<Self> {
        if layers == 0 || layers > MAX_LAYERS {
            return Err(Error::InvalidParameter(format!(
                "layers must be in 1..={MAX_LAYERS}, got {layers}"
            )));
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    /// `N = 2^L`.
    pub fn memory_size(&self) -> usize {
        1 << self.layers
    }

    /// `2^L - 1`.
    pub fn node_count(&self) -> usize {
        self.memory_size() - 1
    }

    /// `L + 1 + 2(2^L - 1) + 2^L`.
    pub fn qubit_count(&self) -> usize {
        self.layers + 1 + 2 * self.node_count() + self.memory_size()
    }

    pub fn layer_of(&self, node: usize) -> usize {
        debug_assert!(node >= 1);
        (usize::BITS - node.leading_zeros()) as usize
    }

    pub fn nodes_in_layer(&self, layer: usize) -> std::ops::Range<usize> {
        debug_assert!((1..=self.layers).contains(&layer));
        (1 << (layer - 1))..(1 << layer)
    }

    pub fn nodes(&self) -> std::ops::Range<usize> {
        1..self.memory_size()
    }

    pub fn qubit(&self, role: QubitRole) -> usize {
        let l = self.layers;
        let nodes = self.node_count();
        match role {
            QubitRole::Address(a) => {
                debug_assert!((1..=l).contains(&a));
                a - 1
            }
            QubitRole::Data => l,
            QubitRole::Control(k) => {
                debug_assert!((1..=nodes).contains(&k));
                l + k
            }
            QubitRole::Incident(k) => {
                debug_assert!((1..=nodes).contains(&k));
                l + nodes + k
            }
            QubitRole::Leaf(i) => {
                debug_assert!(i < self.memory_size());
                l + 1 + 2 * nodes + i
            }
        }
    }

    pub fn role(&self, qubit: usize) -> Result<QubitRole> {
        let l = self.layers;
        let nodes = self.node_count();
        let role = if qubit < l {
            QubitRole::Address(qubit + 1)
        } else if qubit == l {
            QubitRole::Data
        } else if qubit <= l + nodes {
            QubitRole::Control(qubit - l)
        } else if qubit <= l + 2 * nodes {
            QubitRole::Incident(qubit - l - nodes)
        } else if qubit < self.qubit_count() {
            QubitRole::Leaf(qubit - l - 1 - 2 * nodes)
        } else {
            return Err(Error::OperandOutOfRange {
                qubit,
                count: self.qubit_count(),
            });
        };
        Ok(role)
    }

    /// Checks that a role refers to an existing qubit of this tree.
    pub fn contains(&self, role: QubitRole) -> bool {
        match role {
            QubitRole::Address(a) => (1..=self.layers).contains(&a),
            QubitRole::Data => true,
            QubitRole::Control(k) | QubitRole::Incident(k) => (1..=self.node_count()).contains(&k),
            QubitRole::Leaf(i) => i < self.memory_size(),
        }
    }

    pub fn name(&self, qubit: usize) -> String {
        match self.role(qubit) {
            Ok(role) => role.to_string(),
            Err(_) => format!("q{qubit}"),
        }
    }

    /// Operands of the router at `node`: its control, its incident, and the
    /// incident (or leaf) qubits of its two children.
    pub fn router(&self, node: usize) -> RouterOperands {
        let (left, right) = if self.layer_of(node) < self.layers {
            (
                self.qubit(QubitRole::Incident(2 * node)),
                self.qubit(QubitRole::Incident(2 * node + 1)),
            )
        } else {
            let first = 2 * (node - (1 << (self.layers - 1)));
            (
                self.qubit(QubitRole::Leaf(first)),
                self.qubit(QubitRole::Leaf(first + 1)),
            )
        };
        RouterOperands {
            control: self.qubit(QubitRole::Control(node)),
            input: self.qubit(QubitRole::Incident(node)),
            left,
            right,
        }
    }

    /// The node on `layer` traversed when querying `address` (big-endian, the
    /// first address bit selects the root's child).
    pub fn path_node(&self, address: usize, layer: usize) -> usize {
        (1 << (layer - 1)) | (address >> (self.layers - layer + 1))
    }

    /// Whether `node`'s subtree contains leaf `address`.
    pub fn node_serves(&self, node: usize, address: usize) -> bool {
        self.path_node(address, self.layer_of(node)) == node
    }

    /// Path element owning a qubit. Address and data qubits sit above the
    /// root, so they are attributed to it.
    pub fn element_of(&self, qubit: usize) -> Result<PathElement> {
        Ok(match self.role(qubit)? {
            QubitRole::Address(_) | QubitRole::Data => PathElement::Node(1),
            QubitRole::Control(k) | QubitRole::Incident(k) => PathElement::Node(k),
            QubitRole::Leaf(i) => PathElement::Leaf(i),
        })
    }

    /// Whether the root-to-leaf path of `address` passes through `element`.
    pub fn path_contains(&self, address: usize, element: PathElement) -> bool {
        match element {
            PathElement::Node(k) => self.node_serves(k, address),
            PathElement::Leaf(i) => i == address,
        }
    }

    pub fn parse_qubit(&self, name: &str) -> Result<usize> {
        let role: QubitRole = name.parse()?;
        if !self.contains(role) {
            return Err(Error::InvalidParameter(format!(
                "qubit {name} does not exist in a {}-layer tree",
                self.layers
            )));
        }
        Ok(self.qubit(role))
    }
}

impl fmt::Display for QubitRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitRole::Address(a) => write!(f, "A{a}"),
            QubitRole::Data => write!(f, "D"),
            QubitRole::Control(k) => write!(f, "C{k}"),
            QubitRole::Incident(k) => write!(f, "I{k}"),
            QubitRole::Leaf(i) => write!(f, "F{i}"),
        }
    }
}

impl FromStr for QubitRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad qubit name {s:?}"));
        if s == "D" {
            return Ok(QubitRole::Data);
        }
        let mut chars = s.chars();
        let prefix = chars.next().ok_or_else(bad)?;
        let index: usize = chars.as_str().parse().map_err(|_| bad())?;
        match prefix {
            'A' if index >= 1 => Ok(QubitRole::Address(index)),
            'C' if index >= 1 => Ok(QubitRole::Control(index)),
            'I' if index >= 1 => Ok(QubitRole::Incident(index)),
            'F' => Ok(QubitRole::Leaf(index)),
            _ => Err(bad()),
        }
    }
}
