//! Seeded experiment runners, fits and the CSV/JSON result schema.

mod runners;
pub mod schema;
pub mod stats;

pub use runners::{
    cardinal_vector, entropy_by_layer, injection_experiment, injection_oracle, layer_entropies, mitigation_sweep,
    scaling_experiment, teleport_experiment, threshold_contour, ContourResult, McSettings, Workload, CARDINAL_STATES,
    LINEAR_DOMAIN_MIN,
};
pub use schema::{ExperimentResult, FitRecord, Row, FIXED_COLUMNS};
pub use stats::{linear_fit, mean_ci, LineFit, WEIGHTING_RATIO};
