//! 2x2 stride-2 max pooling.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Forward pass over `[H x W x C]`. A trailing odd row/column is dropped.
///
/// Returns the pooled tensor plus, for each output element (row-major order),
/// the flat index into the input of the element that won its 2x2 window. Ties
/// go to the first maximal position in row-major window order, which is where
/// the backward pass routes the gradient.
pub fn maxpool2x2_forward(input: &Tensor) -> Result<(Tensor, Vec<usize>)> {
    if input.rank() != 3 {
        return Err(Error::Dimension(format!(
            "maxpool2x2 expects [HxWxC], got {:?}",
            input.shape()
        )));
    }
    let (h, w, c) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    if h < 2 || w < 2 {
        return Err(Error::Dimension(format!(
            "maxpool2x2 input {:?} is smaller than the 2x2 window",
            input.shape()
        )));
    }
    let (oh, ow) = (h / 2, w / 2);
    let ind = input.data();
    let mut out = vec![0.0; oh * ow * c];
    let mut arg = vec![0usize; oh * ow * c];

    for y in 0..oh {
        for x in 0..ow {
            for ch in 0..c {
                let mut best_idx = ((2 * y) * w + 2 * x) * c + ch;
                let mut best = ind[best_idx];
                for dy in 0..2 {
                    for dx in 0..2 {
                        let idx = ((2 * y + dy) * w + (2 * x + dx)) * c + ch;
                        if ind[idx] > best {
                            best = ind[idx];
                            best_idx = idx;
                        }
                    }
                }
                let o = (y * ow + x) * c + ch;
                out[o] = best;
                arg[o] = best_idx;
            }
        }
    }
    Ok((Tensor::new(&[oh, ow, c], out)?, arg))
}

/// Routes each output gradient back to the input position recorded by the
/// forward pass.
pub fn maxpool2x2_backward(
    input_shape: &[usize],
    indices: &[usize],
    grad_out: &Tensor,
) -> Result<Tensor> {
    if grad_out.len() != indices.len() {
        return Err(Error::Usage(format!(
            "maxpool backward: {} recorded indices but grad_out has {} elements",
            indices.len(),
            grad_out.len()
        )));
    }
    let mut gin = Tensor::zeros(input_shape);
    let data = gin.data_mut();
    for (&idx, &g) in indices.iter().zip(grad_out.data()) {
        data[idx] += g;
    }
    Ok(gin)
}
