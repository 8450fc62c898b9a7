pub mod reference;
pub mod registry;
pub mod unitary;
pub mod verify;

pub use reference::{RefGate, ReferenceCircuit};
pub use registry::{DecompositionRegistry, RegistryEntry, RegistryKey, RegistryOp};
pub use unitary::{routing_unitary, CMatrix, GateUnitary, RoutingKind};
pub use verify::{verify_reference_circuit, verify_routing_equivalence, Scenario, VerificationReport};
