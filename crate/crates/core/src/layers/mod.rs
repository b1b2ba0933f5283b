//! Network layers, each as a pure forward function plus an explicit backward
//! function returning input- and parameter-gradients.
//!
//! Backward functions compute gradients of the scalar `sum(grad_out * forward)`
//! with respect to each argument; chaining them realizes backpropagation.

pub mod activation;
pub mod conv;
pub mod dense;
pub mod dropout;
pub mod lstm;
pub mod merge;
pub mod pool;
pub mod softmax;

pub use activation::{relu, relu_backward};
pub use conv::{conv2d_backward, conv2d_forward};
pub use dense::{dense_backward, dense_forward, Activation, DenseCache};
pub use dropout::{dropout_apply, dropout_backward, DropoutMask};
pub use lstm::{
    lstm_backward, lstm_sequence_forward, lstm_step, LstmParams, LstmSequenceCache, LstmState,
    LstmStepCache,
};
pub use merge::{merge_mul_backward, merge_mul_forward};
pub use pool::{maxpool2x2_backward, maxpool2x2_forward};
pub use softmax::{softmax, softmax_backward};

use crate::error::{Error, Result};

/// One layer of a network description. Hyperparameters are validated by the
/// constructors, so a held `LayerSpec` is always well-formed.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    /// Valid (no padding) 3x3-style cross-correlation. Parameters live in the
    /// graph's store under `<name>.w` / `<name>.b`.
    Conv2d {
        name: String,
        in_channels: usize,
        out_channels: usize,
        kh: usize,
        kw: usize,
    },
    Relu,
    MaxPool2x2,
    Dropout {
        p: f64,
    },
    Flatten,
    /// Fully connected `[units x inputs]` layer, optional ReLU.
    Dense {
        name: String,
        inputs: usize,
        units: usize,
        relu: bool,
    },
    /// LSTM over a `[T x input_dim]` sequence; emits all hidden states or the
    /// final one. Parameters under `<name>.w_f` ... `<name>.b_o`.
    Lstm {
        name: String,
        input_dim: usize,
        hidden: usize,
        return_sequence: bool,
    },
    /// Elementwise product of the two branch outputs.
    MergeMul,
    Softmax,
}

impl LayerSpec {
    pub fn conv2d(
        name: &str,
        in_channels: usize,
        out_channels: usize,
        kh: usize,
        kw: usize,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || kh == 0 || kw == 0 {
            return Err(Error::Config(format!(
                "conv2d '{name}' extents must be positive ({in_channels}, {out_channels}, {kh}x{kw})"
            )));
        }
        Ok(LayerSpec::Conv2d {
            name: name.to_string(),
            in_channels,
            out_channels,
            kh,
            kw,
        })
    }

    pub fn dropout(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Config(format!(
                "dropout probability must be in [0, 1), got {p}"
            )));
        }
        Ok(LayerSpec::Dropout { p })
    }

    pub fn dense(name: &str, inputs: usize, units: usize, relu: bool) -> Result<Self> {
        if inputs == 0 || units == 0 {
            return Err(Error::Config(format!(
                "dense '{name}' extents must be positive ({inputs} -> {units})"
            )));
        }
        Ok(LayerSpec::Dense {
            name: name.to_string(),
            inputs,
            units,
            relu,
        })
    }

    pub fn lstm(
        name: &str,
        input_dim: usize,
        hidden: usize,
        return_sequence: bool,
    ) -> Result<Self> {
        if input_dim == 0 || hidden == 0 {
            return Err(Error::Config(format!(
                "lstm '{name}' extents must be positive ({input_dim} -> {hidden})"
            )));
        }
        Ok(LayerSpec::Lstm {
            name: name.to_string(),
            input_dim,
            hidden,
            return_sequence,
        })
    }
}
