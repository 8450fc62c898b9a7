//! Sparse simulation over product components with `|0>`, `|1>`, `|+>`, `|->`
//! factors. Gate cost is linear in the number of components.

mod fidelity;
mod state;

pub use fidelity::{error_free_amplitude_mass, query_fidelity, run_circuit, simulate_query};
pub use state::{tag_overlap, EcsState, Tag, DEFAULT_CAP_FACTOR};
