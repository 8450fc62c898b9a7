//! Bucket-brigade QRAM circuits with a sparse product-state simulator, a dense
//! state-vector oracle, Pauli noise sampling and router post-selection.

pub mod config;
pub mod dense;
pub mod ecs;
pub mod experiments;
pub mod error;
pub mod gates;
pub mod mitigation;
pub mod model;
pub mod noise;
mod par;

pub use error::{Error, Result};
