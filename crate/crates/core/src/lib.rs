//! From-scratch implementation of a hybrid CNN x LSTM image classifier and
//! its CNN-only baseline: dense f64 tensors, every layer's forward and
//! backward pass written out, categorical cross-entropy with Adadelta
//! updates, and a deterministic image pipeline.
//!
//! The intended entry points are:
//!
//! - [`model::build_hybrid`] / [`model::build_cnn_only`] to assemble a
//!   network, then [`model::forward`], [`model::backward`], and
//!   [`optim::adadelta_step`] to train it;
//! - [`data::load_dataset`] and [`data::batches`] for ingestion and epoch
//!   iteration;
//! - [`rng::Rng`] for every random stream, so runs are reproducible
//!   bit-exactly from a single seed.

pub mod data;
pub mod error;
pub mod layers;
pub mod loss;
pub mod model;
pub mod optim;
pub mod rng;
pub mod tensor;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use error::{Error, Result};
pub use tensor::{glorot_init, EwiseOp, Tensor};
