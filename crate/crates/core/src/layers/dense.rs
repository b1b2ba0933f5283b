//! Fully connected layer: `activation(W x + b)` with `W: [m x n]`.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    None,
}

/// Saved forward state needed by [`dense_backward`].
#[derive(Debug, Clone)]
pub struct DenseCache {
    pub input: Tensor,
    /// Pre-activation `W x + b`; the ReLU mask derives from its sign.
    pub pre: Tensor,
    pub activation: Activation,
}

pub fn dense_forward(
    input: &Tensor,
    w: &Tensor,
    b: &Tensor,
    activation: Activation,
) -> Result<(Tensor, DenseCache)> {
    if b.rank() != 1 || w.rank() != 2 || w.shape()[0] != b.shape()[0] {
        return Err(Error::Dimension(format!(
            "dense weight {:?} and bias {:?} are inconsistent",
            w.shape(),
            b.shape()
        )));
    }
    let pre = w.matvec(input)?.add(b)?;
    let out = match activation {
        Activation::Relu => super::activation::relu(&pre),
        Activation::None => pre.clone(),
    };
    Ok((
        out,
        DenseCache {
            input: input.clone(),
            pre,
            activation,
        },
    ))
}

/// Gradients w.r.t. (input, W, b).
pub fn dense_backward(
    w: &Tensor,
    cache: &DenseCache,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    if grad_out.shape() != cache.pre.shape() {
        return Err(Error::Dimension(format!(
            "dense grad_out {:?} does not match layer output {:?}",
            grad_out.shape(),
            cache.pre.shape()
        )));
    }
    // gradient at the pre-activation
    let g = match cache.activation {
        Activation::Relu => super::activation::relu_backward(&cache.pre, grad_out),
        Activation::None => grad_out.clone(),
    };
    let (m, n) = (w.shape()[0], w.shape()[1]);
    let mut gw = vec![0.0; m * n];
    for i in 0..m {
        let gi = g.data()[i];
        let row = &mut gw[i * n..(i + 1) * n];
        for (dst, &x) in row.iter_mut().zip(cache.input.data()) {
            *dst = gi * x;
        }
    }
    let grad_input = w.matvec_t(&g)?;
    Ok((grad_input, Tensor::new(&[m, n], gw)?, g))
}
