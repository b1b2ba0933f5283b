//! Categorical cross-entropy with the fused softmax gradient.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Floor applied to probabilities before the log so a saturated output cannot
/// produce an infinite loss.
pub const PROB_FLOOR: f64 = 1e-12;

/// Batch loss plus the gradient with respect to the logits that produced
/// `probs` (valid because softmax and cross-entropy are differentiated as one
/// composite: `(probs - onehot) / batch`).
#[derive(Debug, Clone)]
pub struct LossReport {
    pub loss: f64,
    pub grad_logits: Tensor,
}

/// Mean negative log-likelihood of the true classes.
///
/// `probs` and `onehot` are both `[batch x classes]`. Every probability row
/// must sum to 1 within 1e-6 and every label row must be exactly one-hot.
pub fn cross_entropy(probs: &Tensor, onehot: &Tensor) -> Result<LossReport> {
    if probs.rank() != 2 || probs.shape() != onehot.shape() {
        return Err(Error::Dimension(format!(
            "cross_entropy expects matching [batch x classes] tensors, got {:?} and {:?}",
            probs.shape(),
            onehot.shape()
        )));
    }
    let (batch, classes) = (probs.shape()[0], probs.shape()[1]);
    let mut loss = 0.0;
    for r in 0..batch {
        let p_row = &probs.data()[r * classes..(r + 1) * classes];
        let y_row = &onehot.data()[r * classes..(r + 1) * classes];

        let row_sum: f64 = p_row.iter().sum();
        if (row_sum - 1.0).abs() > 1e-6 {
            return Err(Error::Dimension(format!(
                "probability row {r} sums to {row_sum}, expected 1"
            )));
        }
        let mut ones = 0;
        let mut true_class = 0;
        for (k, &v) in y_row.iter().enumerate() {
            if v == 1.0 {
                ones += 1;
                true_class = k;
            } else if v != 0.0 {
                return Err(Error::Label(format!(
                    "row {r} is not a one-hot vector: entry {k} is {v}"
                )));
            }
        }
        if ones != 1 {
            return Err(Error::Label(format!(
                "row {r} is not a one-hot vector: {ones} entries set"
            )));
        }
        loss -= p_row[true_class].max(PROB_FLOOR).ln();
    }
    loss /= batch as f64;

    let scale = 1.0 / batch as f64;
    let grad = probs
        .data()
        .iter()
        .zip(onehot.data())
        .map(|(&p, &y)| (p - y) * scale)
        .collect();
    Ok(LossReport {
        loss,
        grad_logits: Tensor::new(probs.shape(), grad)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_zero_loss() {
        let probs = Tensor::new(&[1, 4], vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let onehot = probs.clone();
        let report = cross_entropy(&probs, &onehot).unwrap();
        assert_eq!(report.loss, 0.0);
        assert!(report.grad_logits.data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn uniform_probs_give_ln4() {
        let probs = Tensor::filled(&[2, 4], 0.25);
        let onehot = Tensor::new(&[2, 4], vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let report = cross_entropy(&probs, &onehot).unwrap();
        assert!((report.loss - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn malformed_one_hot_identifies_row() {
        let probs = Tensor::filled(&[3, 2], 0.5);
        let mut bad = Tensor::new(&[3, 2], vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        bad.data_mut()[2] = 0.5; // row 1 now holds [0.5, 1.0]
        let err = cross_entropy(&probs, &bad).unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
    }

    #[test]
    fn saturated_wrong_prediction_stays_finite() {
        let probs = Tensor::new(&[1, 2], vec![1.0, 0.0]).unwrap();
        let onehot = Tensor::new(&[1, 2], vec![0.0, 1.0]).unwrap();
        let report = cross_entropy(&probs, &onehot).unwrap();
        assert!(report.loss.is_finite());
        assert!((report.loss - (-PROB_FLOOR.ln())).abs() < 1e-9);
    }
}
