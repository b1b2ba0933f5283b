//! Valid-padding 2D cross-correlation.
//!
//! Input is `[H x W x Cin]`, kernels are `[Kh x Kw x Cin x Cout]`, bias is
//! `[Cout]`; the output is `[(H-Kh+1) x (W-Kw+1) x Cout]`. No padding, no
//! stride, no dilation.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn check_shapes(input: &Tensor, kernels: &Tensor, bias: Option<&Tensor>) -> Result<(usize, usize)> {
    if input.rank() != 3 || kernels.rank() != 4 {
        return Err(Error::Dimension(format!(
            "conv2d expects input [HxWxCin] and kernels [KhxKwxCinxCout], got {:?} and {:?}",
            input.shape(),
            kernels.shape()
        )));
    }
    let (h, w, cin) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (kh, kw, kcin, cout) = (
        kernels.shape()[0],
        kernels.shape()[1],
        kernels.shape()[2],
        kernels.shape()[3],
    );
    if kcin != cin {
        return Err(Error::Dimension(format!(
            "conv2d channel mismatch: input {:?} vs kernels {:?}",
            input.shape(),
            kernels.shape()
        )));
    }
    if kh > h || kw > w {
        return Err(Error::Dimension(format!(
            "conv2d kernel {:?} larger than input {:?}",
            kernels.shape(),
            input.shape()
        )));
    }
    if let Some(b) = bias {
        if b.rank() != 1 || b.shape()[0] != cout {
            return Err(Error::Dimension(format!(
                "conv2d bias shape {:?} does not match {cout} output channels",
                b.shape()
            )));
        }
    }
    Ok((h - kh + 1, w - kw + 1))
}

/// Forward pass: `out[y,x,o] = b[o] + sum_{dy,dx,c} in[y+dy, x+dx, c] * k[dy,dx,c,o]`.
pub fn conv2d_forward(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (oh, ow) = check_shapes(input, kernels, Some(bias))?;
    let (w, cin) = (input.shape()[1], input.shape()[2]);
    let (kh, kw, cout) = (kernels.shape()[0], kernels.shape()[1], kernels.shape()[3]);

    let ind = input.data();
    let kd = kernels.data();
    let bd = bias.data();
    let mut out = vec![0.0; oh * ow * cout];

    for y in 0..oh {
        for x in 0..ow {
            let dst = &mut out[(y * ow + x) * cout..(y * ow + x + 1) * cout];
            dst.copy_from_slice(bd);
            for dy in 0..kh {
                for dx in 0..kw {
                    let in_base = ((y + dy) * w + (x + dx)) * cin;
                    for c in 0..cin {
                        let v = ind[in_base + c];
                        let k_base = ((dy * kw + dx) * cin + c) * cout;
                        for o in 0..cout {
                            dst[o] += v * kd[k_base + o];
                        }
                    }
                }
            }
        }
    }
    Tensor::new(&[oh, ow, cout], out)
}

/// Gradients of `sum(grad_out * conv2d_forward(input, kernels, bias))` with
/// respect to the input, the kernels, and the bias.
pub fn conv2d_backward(
    input: &Tensor,
    kernels: &Tensor,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (oh, ow) = check_shapes(input, kernels, None)?;
    let (kh, kw, cout) = (kernels.shape()[0], kernels.shape()[1], kernels.shape()[3]);
    if grad_out.shape() != [oh, ow, cout] {
        return Err(Error::Dimension(format!(
            "conv2d grad_out shape {:?} does not match output [{oh}, {ow}, {cout}]",
            grad_out.shape()
        )));
    }
    let (w, cin) = (input.shape()[1], input.shape()[2]);

    let ind = input.data();
    let kd = kernels.data();
    let gd = grad_out.data();
    let mut gin = vec![0.0; input.len()];
    let mut gk = vec![0.0; kernels.len()];
    let mut gb = vec![0.0; cout];

    for y in 0..oh {
        for x in 0..ow {
            let g_base = (y * ow + x) * cout;
            for o in 0..cout {
                gb[o] += gd[g_base + o];
            }
            for dy in 0..kh {
                for dx in 0..kw {
                    let in_base = ((y + dy) * w + (x + dx)) * cin;
                    for c in 0..cin {
                        let v = ind[in_base + c];
                        let k_base = ((dy * kw + dx) * cin + c) * cout;
                        let mut acc = 0.0;
                        for o in 0..cout {
                            let g = gd[g_base + o];
                            gk[k_base + o] += v * g;
                            acc += kd[k_base + o] * g;
                        }
                        gin[in_base + c] += acc;
                    }
                }
            }
        }
    }

    Ok((
        Tensor::new(input.shape(), gin)?,
        Tensor::new(kernels.shape(), gk)?,
        Tensor::new(&[cout], gb)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_kernel_passes_input_through() {
        let input = Tensor::new(&[3, 3, 1], (1..=9).map(f64::from).collect()).unwrap();
        let kernel = Tensor::new(&[1, 1, 1, 1], vec![1.0]).unwrap();
        let bias = Tensor::zeros(&[1]);
        let out = conv2d_forward(&input, &kernel, &bias).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn all_ones_kernel_computes_local_sums() {
        let input = Tensor::filled(&[5, 5, 1], 1.0);
        let kernel = Tensor::filled(&[3, 3, 1, 1], 1.0);
        let bias = Tensor::zeros(&[1]);
        let out = conv2d_forward(&input, &kernel, &bias).unwrap();
        assert_eq!(out.shape(), &[3, 3, 1]);
        assert!(out.data().iter().all(|&v| v == 9.0));
    }

    #[test]
    fn kernel_larger_than_input_is_rejected() {
        let input = Tensor::zeros(&[2, 2, 1]);
        let kernel = Tensor::zeros(&[3, 3, 1, 1]);
        let bias = Tensor::zeros(&[1]);
        assert!(matches!(
            conv2d_forward(&input, &kernel, &bias),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn zero_grad_out_gives_zero_gradients() {
        let input = Tensor::filled(&[4, 4, 2], 0.5);
        let kernels = Tensor::filled(&[3, 3, 2, 3], 0.25);
        let grad_out = Tensor::zeros(&[2, 2, 3]);
        let (gi, gk, gb) = conv2d_backward(&input, &kernels, &grad_out).unwrap();
        assert!(gi.data().iter().all(|&v| v == 0.0));
        assert!(gk.data().iter().all(|&v| v == 0.0));
        assert!(gb.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grad_bias_sums_grad_out_over_positions() {
        let input = Tensor::filled(&[4, 4, 1], 1.0);
        let kernels = Tensor::filled(&[3, 3, 1, 2], 1.0);
        let mut g = Tensor::zeros(&[2, 2, 2]);
        for (i, v) in g.data_mut().iter_mut().enumerate() {
            *v = i as f64;
        }
        let (_, _, gb) = conv2d_backward(&input, &kernels, &g).unwrap();
        // channel 0 collects even flat indices, channel 1 odd ones
        assert_eq!(gb.data(), &[0.0 + 2.0 + 4.0 + 6.0, 1.0 + 3.0 + 5.0 + 7.0]);
    }

    #[test]
    fn forward_is_linear_in_the_input_with_zero_bias() {
        let mut rng = crate::rng::Rng::new(5);
        let input = Tensor::new(
            &[5, 5, 2],
            (0..50).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let kernels = Tensor::new(
            &[3, 3, 2, 2],
            (0..36).map(|_| rng.uniform(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let bias = Tensor::zeros(&[2]);
        let a = conv2d_forward(&input.scale(3.0), &kernels, &bias).unwrap();
        let b = conv2d_forward(&input, &kernels, &bias).unwrap().scale(3.0);
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
