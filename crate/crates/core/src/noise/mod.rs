//! Pauli gate noise, Monte Carlo configuration sampling, targeted injection
//! and readout correction.

pub mod calibration;
mod events;
mod model;
pub mod readout;
mod sampling;

pub use events::{gate_element, ErrorConfiguration, GateError, InjectedError, Pauli};
pub use model::{error_sites, injection_rate, node_injection, InjectionSpec, NoiseModel, Site, SiteKind};
pub use readout::{apply_readout, correct_readout, Response};
pub use sampling::{sample_configuration, sample_rng, Sampler, SamplingMode};
