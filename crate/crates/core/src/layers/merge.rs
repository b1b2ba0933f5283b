//! Elementwise-product merge of two equal-length branch outputs.

use crate::error::Result;
use crate::tensor::Tensor;

pub fn merge_mul_forward(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    a.mul(b)
}

/// Product rule: `grad_a = grad_out * b`, `grad_b = grad_out * a`.
pub fn merge_mul_backward(a: &Tensor, b: &Tensor, grad_out: &Tensor) -> Result<(Tensor, Tensor)> {
    Ok((grad_out.mul(b)?, grad_out.mul(a)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_are_the_neutral_element() {
        let a = Tensor::from_vec(vec![0.5, -1.5, 2.0]);
        let ones = Tensor::filled(&[3], 1.0);
        assert_eq!(merge_mul_forward(&a, &ones).unwrap(), a);
    }

    #[test]
    fn zeros_annihilate() {
        let a = Tensor::from_vec(vec![0.5, -1.5, 2.0]);
        let zeros = Tensor::zeros(&[3]);
        assert!(merge_mul_forward(&a, &zeros)
            .unwrap()
            .data()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn backward_swaps_operands() {
        let a = Tensor::from_vec(vec![2.0, 3.0]);
        let b = Tensor::from_vec(vec![5.0, 7.0]);
        let g = Tensor::from_vec(vec![1.0, 1.0]);
        let (ga, gb) = merge_mul_backward(&a, &b, &g).unwrap();
        assert_eq!(ga, b);
        assert_eq!(gb, a);
    }
}
