//! Minimal dense-network substrate: matrices, dense layers, reverse-mode
//! gradients and the Adam optimizer. Just enough for the three small
//! networks this crate trains, with gradients checkable against finite
//! differences.

mod activation;
mod adam;
mod layer;
pub mod loss;
mod matrix;
mod network;

pub use activation::Activation;
pub use adam::{adam_step, AdamParams, AdamState};
pub use layer::{DenseLayer, LayerGrads};
pub use matrix::Matrix;
pub use network::Network;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: String,
        expected: String,
        actual: String,
    },
    #[error("backward called without a recorded forward pass")]
    NoForwardTrace,
    #[error("value {value} is not a probability in {context}")]
    ProbabilityDomain { value: f64, context: &'static str },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite value produced in {context}")]
    NonFinite { context: String },
}
