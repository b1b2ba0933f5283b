//! Inverted dropout: train-time zeroing with 1/(1-p) rescaling of survivors,
//! so inference is a pure pass-through.

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Mask produced by a dropout application. In training mode the entries take
/// only the values 0 and 1/(1-p); the inference mask is all ones so that
/// applying it is the identity.
#[derive(Debug, Clone)]
pub struct DropoutMask {
    pub mask: Tensor,
    pub p: f64,
}

/// Apply dropout to `input`.
///
/// Training: each element is zeroed independently with probability `p` and
/// survivors are scaled by 1/(1-p). Inference: identity. Consumes one draw
/// per element from `rng` in flat order when training.
pub fn dropout_apply(
    input: &Tensor,
    p: f64,
    rng: &mut Rng,
    training: bool,
) -> Result<(Tensor, DropoutMask)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Config(format!(
            "dropout probability must be in [0, 1), got {p}"
        )));
    }
    if !training || p == 0.0 {
        let mask = Tensor::filled(input.shape(), 1.0);
        return Ok((input.clone(), DropoutMask { mask, p }));
    }
    let keep_scale = 1.0 / (1.0 - p);
    let mask_data: Vec<f64> = (0..input.len())
        .map(|_| if rng.next_f64() < p { 0.0 } else { keep_scale })
        .collect();
    let mask = Tensor::new(input.shape(), mask_data)?;
    let out = input.mul(&mask)?;
    Ok((out, DropoutMask { mask, p }))
}

/// Gradient through the mask: `grad_in = grad_out * mask`.
pub fn dropout_backward(mask: &DropoutMask, grad_out: &Tensor) -> Result<Tensor> {
    grad_out.mul(&mask.mask)
}
