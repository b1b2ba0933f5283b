//! Numerically safe softmax over a logit vector.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// `y_k = exp(x_k) / sum_j exp(x_j)`, computed after subtracting the maximum
/// logit so large inputs cannot overflow.
pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    if logits.rank() != 1 {
        return Err(Error::Dimension(format!(
            "softmax expects a rank-1 logit vector, got {:?}",
            logits.shape()
        )));
    }
    let max = logits
        .data()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.data().iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Tensor::new(logits.shape(), exps.iter().map(|&e| e / total).collect())
}

/// Standalone softmax Jacobian-vector product:
/// `dx_k = y_k * (dy_k - sum_j dy_j y_j)`.
///
/// The training path never calls this (the cross-entropy gradient is fused);
/// it exists so the layer's own gradient can be checked in isolation.
pub fn softmax_backward(output: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if output.shape() != grad_out.shape() {
        return Err(Error::Dimension(format!(
            "softmax backward shapes differ: {:?} vs {:?}",
            output.shape(),
            grad_out.shape()
        )));
    }
    let dot: f64 = output
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&y, &g)| y * g)
        .sum();
    Tensor::new(
        output.shape(),
        output
            .data()
            .iter()
            .zip(grad_out.data())
            .map(|(&y, &g)| y * (g - dot))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_give_uniform_probabilities() {
        let y = softmax(&Tensor::from_vec(vec![0.0; 4])).unwrap();
        assert_eq!(y.data(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn shift_invariance() {
        let x = Tensor::from_vec(vec![0.3, -1.2, 2.5, 0.0]);
        let shifted = x.map(|v| v + 123.456);
        let a = softmax(&x).unwrap();
        let b = softmax(&shifted).unwrap();
        for (p, q) in a.data().iter().zip(b.data()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn known_row() {
        let y = softmax(&Tensor::from_vec(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
        let expect = [0.03206, 0.08714, 0.23688, 0.64391];
        for (got, want) in y.data().iter().zip(expect) {
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn huge_logits_do_not_overflow() {
        let y = softmax(&Tensor::from_vec(vec![1e4, 1e4 - 1.0])).unwrap();
        assert!(y.data().iter().all(|v| v.is_finite()));
        let s: f64 = y.data().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn output_sums_to_one_and_preserves_argmax() {
        let x = Tensor::from_vec(vec![0.1, 5.0, -3.0, 2.2, 5.0]);
        let y = softmax(&x).unwrap();
        assert!((y.sum() - 1.0).abs() < 1e-12);
        assert!(y.data().iter().all(|&p| p >= 0.0));
        assert_eq!(x.argmax().unwrap(), y.argmax().unwrap());
    }
}
