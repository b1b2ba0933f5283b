//! Elementwise activations and the scalar nonlinearities the gates use.

use crate::tensor::Tensor;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// ReLU applied elementwise to a tensor of any rank.
pub fn relu(input: &Tensor) -> Tensor {
    input.map(|x| if x > 0.0 { x } else { 0.0 })
}

/// Gradient of `sum(grad_out * relu(input))` w.r.t. `input`.
///
/// The subgradient at exactly zero is taken as 0.
pub fn relu_backward(input: &Tensor, grad_out: &Tensor) -> Tensor {
    debug_assert_eq!(input.shape(), grad_out.shape());
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(input.shape(), data).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_clamps_negatives() {
        let t = Tensor::from_vec(vec![-2.0, -0.5, 0.0, 0.5, 2.0]);
        assert_eq!(relu(&t).data(), &[0.0, 0.0, 0.0, 0.5, 2.0]);
    }

    #[test]
    fn relu_backward_masks_by_input_sign() {
        let x = Tensor::from_vec(vec![-1.0, 0.0, 2.0]);
        let g = Tensor::from_vec(vec![5.0, 5.0, 5.0]);
        assert_eq!(relu_backward(&x, &g).data(), &[0.0, 0.0, 5.0]);
    }

    #[test]
    fn sigmoid_midpoint() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(100.0) > 1.0 - 1e-12);
        assert!(sigmoid(-100.0) < 1e-12);
    }
}
