mod builder;
mod circuit;
mod data;
mod geometry;
mod stats;

pub use builder::build_query_circuit;
pub use circuit::{CircuitIR, Connectivity, GateApp, GateKind, Phase};
pub use data::{AddressState, ClassicalData};
pub use geometry::{PathElement, QramGeometry, QubitRole, RouterOperands, MAX_LAYERS};
pub use stats::{circuit_stats, greedy_depth, CzTally, GateStats, SchemeStats};
