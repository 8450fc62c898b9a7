//! State-vector oracle for small systems.

mod density;
mod state;
mod teleport;

pub use density::{
    dense_query_fidelity, eigenvalues, entanglement_entropy, ideal_output, reduced_density,
    state_fidelity, MAX_SUBSET,
};
pub use state::{dense_run, run_dense, DenseState, MAX_ACTIVE};
pub use teleport::{teleport_retrieval, TeleportMode};
