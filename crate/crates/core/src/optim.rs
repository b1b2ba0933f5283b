//! Adadelta parameter updates.
//!
//! Per element, with decay `rho` and conditioning constant `eps`:
//!
//! ```text
//! Eg2  <- rho * Eg2  + (1 - rho) * g^2
//! dx    = -sqrt(Edx2 + eps) / sqrt(Eg2 + eps) * g
//! Edx2 <- rho * Edx2 + (1 - rho) * dx^2
//! p    <- p + lr * dx
//! ```
//!
//! `lr` is a constant multiplier on the update (1.0 by default).

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Hyperparameters shared by every parameter's accumulator pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdadeltaParams {
    pub rho: f64,
    pub eps: f64,
    pub lr: f64,
}

impl Default for AdadeltaParams {
    fn default() -> Self {
        AdadeltaParams {
            rho: 0.95,
            eps: 1e-6,
            lr: 1.0,
        }
    }
}

impl AdadeltaParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Config(format!(
                "adadelta rho must be in [0, 1), got {}",
                self.rho
            )));
        }
        if self.eps <= 0.0 {
            return Err(Error::Config(format!(
                "adadelta eps must be positive, got {}",
                self.eps
            )));
        }
        Ok(())
    }
}

/// Decayed accumulators of squared gradients and squared updates, one pair
/// per parameter tensor, shaped like it.
#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    pub eg2: Tensor,
    pub edx2: Tensor,
}

impl AdadeltaState {
    pub fn new(shape: &[usize]) -> Self {
        AdadeltaState {
            eg2: Tensor::zeros(shape),
            edx2: Tensor::zeros(shape),
        }
    }
}

/// One Adadelta update. Returns the new parameter tensor and accumulator
/// state; the inputs are left untouched.
pub fn adadelta_step(
    param: &Tensor,
    grad: &Tensor,
    state: &AdadeltaState,
    hp: &AdadeltaParams,
) -> Result<(Tensor, AdadeltaState)> {
    hp.validate()?;
    if param.shape() != grad.shape()
        || param.shape() != state.eg2.shape()
        || param.shape() != state.edx2.shape()
    {
        return Err(Error::Dimension(format!(
            "adadelta shapes disagree: param {:?}, grad {:?}, eg2 {:?}, edx2 {:?}",
            param.shape(),
            grad.shape(),
            state.eg2.shape(),
            state.edx2.shape()
        )));
    }
    let n = param.len();
    let mut new_param = vec![0.0; n];
    let mut new_eg2 = vec![0.0; n];
    let mut new_edx2 = vec![0.0; n];
    for idx in 0..n {
        let g = grad.data()[idx];
        let eg2 = hp.rho * state.eg2.data()[idx] + (1.0 - hp.rho) * g * g;
        let dx = -((state.edx2.data()[idx] + hp.eps).sqrt() / (eg2 + hp.eps).sqrt()) * g;
        let edx2 = hp.rho * state.edx2.data()[idx] + (1.0 - hp.rho) * dx * dx;
        new_eg2[idx] = eg2;
        new_edx2[idx] = edx2;
        new_param[idx] = param.data()[idx] + hp.lr * dx;
    }
    Ok((
        Tensor::new(param.shape(), new_param)?,
        AdadeltaState {
            eg2: Tensor::new(param.shape(), new_eg2)?,
            edx2: Tensor::new(param.shape(), new_edx2)?,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_only_decays_accumulators() {
        let hp = AdadeltaParams::default();
        let param = Tensor::from_vec(vec![1.0, -2.0]);
        let state = AdadeltaState {
            eg2: Tensor::from_vec(vec![0.4, 0.6]),
            edx2: Tensor::from_vec(vec![0.2, 0.1]),
        };
        let grad = Tensor::zeros(&[2]);
        let (p, s) = adadelta_step(&param, &grad, &state, &hp).unwrap();
        assert_eq!(p, param);
        assert_eq!(s.eg2.data(), &[0.4 * 0.95, 0.6 * 0.95]);
        assert_eq!(s.edx2.data(), &[0.2 * 0.95, 0.1 * 0.95]);
    }

    #[test]
    fn first_step_hand_value() {
        let hp = AdadeltaParams::default();
        let param = Tensor::from_vec(vec![0.0]);
        let state = AdadeltaState::new(&[1]);
        let grad = Tensor::from_vec(vec![1.0]);
        let (p, s) = adadelta_step(&param, &grad, &state, &hp).unwrap();
        // Eg2 = 0.05, dx = -sqrt(1e-6)/sqrt(0.050001)
        assert!((s.eg2.data()[0] - 0.05).abs() < 1e-15);
        let expected = -(1e-6f64.sqrt() / 0.050001f64.sqrt());
        assert!((p.data()[0] - expected).abs() < 1e-15);
        assert!((p.data()[0] - (-0.0044721)).abs() < 1e-7);
    }

    #[test]
    fn update_opposes_gradient() {
        let hp = AdadeltaParams::default();
        let param = Tensor::zeros(&[3]);
        let mut state = AdadeltaState::new(&[3]);
        let grad = Tensor::from_vec(vec![0.5, -2.0, 1e-3]);
        let mut p = param;
        for _ in 0..10 {
            let (np, ns) = adadelta_step(&p, &grad, &state, &hp).unwrap();
            p = np;
            state = ns;
        }
        assert!(p.data()[0] < 0.0);
        assert!(p.data()[1] > 0.0);
        assert!(p.data()[2] < 0.0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let hp = AdadeltaParams::default();
        let param = Tensor::zeros(&[2]);
        let state = AdadeltaState::new(&[2]);
        let grad = Tensor::zeros(&[3]);
        assert!(adadelta_step(&param, &grad, &state, &hp).is_err());
    }
}
