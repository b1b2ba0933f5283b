//! LSTM cell and sequence with backpropagation through time.
//!
//! One step computes, with `z = [h_prev, x]` (hidden part first) and
//! `sigma` the logistic function:
//!
//! ```text
//! f = sigma(W_f z + b_f)          forget gate
//! i = sigma(W_i z + b_i)          input gate
//! c_hat = tanh(W_c z + b_c)       candidate cell values
//! c = f * c_prev + i * c_hat      cell state
//! o = sigma(W_o z + b_o)          output gate
//! h = o * tanh(c)                 hidden state
//! ```
//!
//! Every gate weight is `[hidden x (hidden + input)]`, every bias `[hidden]`.

use crate::error::{Error, Result};
use crate::layers::activation::sigmoid;
use crate::tensor::Tensor;

/// The four gate weight matrices and biases of one LSTM layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_f: Tensor,
    pub w_i: Tensor,
    pub w_c: Tensor,
    pub w_o: Tensor,
    pub b_f: Tensor,
    pub b_i: Tensor,
    pub b_c: Tensor,
    pub b_o: Tensor,
}

impl LstmParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        w_f: Tensor,
        w_i: Tensor,
        w_c: Tensor,
        w_o: Tensor,
        b_f: Tensor,
        b_i: Tensor,
        b_c: Tensor,
        b_o: Tensor,
    ) -> Result<Self> {
        let p = LstmParams {
            w_f,
            w_i,
            w_c,
            w_o,
            b_f,
            b_i,
            b_c,
            b_o,
        };
        p.validate()?;
        Ok(p)
    }

    /// All-zero parameters for a given geometry.
    pub fn zeros(hidden: usize, input_dim: usize) -> Self {
        let w = || Tensor::zeros(&[hidden, hidden + input_dim]);
        let b = || Tensor::zeros(&[hidden]);
        LstmParams {
            w_f: w(),
            w_i: w(),
            w_c: w(),
            w_o: w(),
            b_f: b(),
            b_i: b(),
            b_c: b(),
            b_o: b(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ws = self.w_f.shape();
        if self.w_f.rank() != 2 {
            return Err(Error::Dimension(format!(
                "lstm weights must be rank-2, got {ws:?}"
            )));
        }
        for (name, w) in [("w_i", &self.w_i), ("w_c", &self.w_c), ("w_o", &self.w_o)] {
            if w.shape() != ws {
                return Err(Error::Dimension(format!(
                    "lstm gate weight {name} shape {:?} differs from w_f {ws:?}",
                    w.shape()
                )));
            }
        }
        let hidden = ws[0];
        if ws[1] <= hidden {
            return Err(Error::Dimension(format!(
                "lstm weight {ws:?} leaves no input columns after the {hidden} hidden ones"
            )));
        }
        for (name, b) in [
            ("b_f", &self.b_f),
            ("b_i", &self.b_i),
            ("b_c", &self.b_c),
            ("b_o", &self.b_o),
        ] {
            if b.shape() != [hidden] {
                return Err(Error::Dimension(format!(
                    "lstm bias {name} shape {:?} does not match hidden extent {hidden}",
                    b.shape()
                )));
            }
        }
        Ok(())
    }

    pub fn hidden(&self) -> usize {
        self.w_f.shape()[0]
    }

    pub fn input_dim(&self) -> usize {
        self.w_f.shape()[1] - self.w_f.shape()[0]
    }

    /// Elementwise sum, used to accumulate gradients across timesteps/items.
    pub fn add(&self, other: &LstmParams) -> Result<LstmParams> {
        Ok(LstmParams {
            w_f: self.w_f.add(&other.w_f)?,
            w_i: self.w_i.add(&other.w_i)?,
            w_c: self.w_c.add(&other.w_c)?,
            w_o: self.w_o.add(&other.w_o)?,
            b_f: self.b_f.add(&other.b_f)?,
            b_i: self.b_i.add(&other.b_i)?,
            b_c: self.b_c.add(&other.b_c)?,
            b_o: self.b_o.add(&other.b_o)?,
        })
    }
}

/// Hidden and cell state after a step.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Tensor,
    pub c: Tensor,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: Tensor::zeros(&[hidden]),
            c: Tensor::zeros(&[hidden]),
        }
    }
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub struct LstmStepCache {
    /// Concatenated `[h_prev, x]`.
    pub z: Tensor,
    pub f: Tensor,
    pub i: Tensor,
    pub c_hat: Tensor,
    pub o: Tensor,
    pub c_prev: Tensor,
    pub c: Tensor,
    pub tanh_c: Tensor,
}

/// Caches for a whole sequence plus the geometry of the run.
#[derive(Debug, Clone)]
pub struct LstmSequenceCache {
    pub steps: Vec<LstmStepCache>,
    pub hidden: usize,
    pub input_dim: usize,
    pub return_sequence: bool,
}

/// One LSTM timestep.
pub fn lstm_step(
    x: &Tensor,
    prev: &LstmState,
    params: &LstmParams,
) -> Result<(LstmState, LstmStepCache)> {
    params.validate()?;
    let hidden = params.hidden();
    let input_dim = params.input_dim();
    if x.shape() != [input_dim] {
        return Err(Error::Dimension(format!(
            "lstm input {:?} does not match expected [{input_dim}]",
            x.shape()
        )));
    }
    if prev.h.shape() != [hidden] || prev.c.shape() != [hidden] {
        return Err(Error::Dimension(format!(
            "lstm state shapes {:?}/{:?} do not match hidden extent {hidden}",
            prev.h.shape(),
            prev.c.shape()
        )));
    }

    let z = Tensor::concat1(&[&prev.h, x])?;
    let f = params.w_f.matvec(&z)?.add(&params.b_f)?.map(sigmoid);
    let i = params.w_i.matvec(&z)?.add(&params.b_i)?.map(sigmoid);
    let c_hat = params.w_c.matvec(&z)?.add(&params.b_c)?.map(f64::tanh);
    let c = f.mul(&prev.c)?.add(&i.mul(&c_hat)?)?;
    let o = params.w_o.matvec(&z)?.add(&params.b_o)?.map(sigmoid);
    let tanh_c = c.map(f64::tanh);
    let h = o.mul(&tanh_c)?;

    let cache = LstmStepCache {
        z,
        f,
        i,
        c_hat,
        o,
        c_prev: prev.c.clone(),
        c: c.clone(),
        tanh_c,
    };
    Ok((LstmState { h, c }, cache))
}

/// Run the cell over a `[T x input_dim]` sequence from a zero initial state.
///
/// Returns `[T x hidden]` when `return_sequence` is set, otherwise the final
/// hidden state `[hidden]`.
pub fn lstm_sequence_forward(
    xs: &Tensor,
    params: &LstmParams,
    return_sequence: bool,
) -> Result<(Tensor, LstmSequenceCache)> {
    if xs.rank() != 2 {
        return Err(Error::Dimension(format!(
            "lstm sequence input must be [T x d], got {:?}",
            xs.shape()
        )));
    }
    let t_steps = xs.shape()[0];
    let hidden = params.hidden();
    let mut state = LstmState::zeros(hidden);
    let mut steps = Vec::with_capacity(t_steps);
    let mut hs = Vec::with_capacity(t_steps);
    for t in 0..t_steps {
        let x_t = xs.row(t)?;
        let (next, cache) = lstm_step(&x_t, &state, params)?;
        steps.push(cache);
        hs.push(next.h.clone());
        state = next;
    }
    let out = if return_sequence {
        Tensor::stack(&hs)?
    } else {
        state.h
    };
    let cache = LstmSequenceCache {
        steps,
        hidden,
        input_dim: params.input_dim(),
        return_sequence,
    };
    Ok((out, cache))
}

/// Backpropagation through time.
///
/// `grad_out` is `[T x hidden]` for a sequence-returning forward pass or
/// `[hidden]` for a final-state one. Returns the gradient w.r.t. the input
/// sequence `[T x d]` and the parameter gradients.
pub fn lstm_backward(
    params: &LstmParams,
    cache: &LstmSequenceCache,
    grad_out: &Tensor,
) -> Result<(Tensor, LstmParams)> {
    let t_steps = cache.steps.len();
    if t_steps == 0 {
        return Err(Error::Usage(
            "lstm_backward on an empty forward cache".into(),
        ));
    }
    let hidden = cache.hidden;
    let input_dim = cache.input_dim;
    if params.hidden() != hidden || params.input_dim() != input_dim {
        return Err(Error::Usage(format!(
            "lstm_backward params ({}x{}) do not match the cached run ({hidden}x{input_dim})",
            params.hidden(),
            params.input_dim()
        )));
    }
    if cache.return_sequence {
        if grad_out.shape() != [t_steps, hidden] {
            return Err(Error::Dimension(format!(
                "grad_out {:?} does not match sequence output [{t_steps}, {hidden}]",
                grad_out.shape()
            )));
        }
    } else if grad_out.shape() != [hidden] {
        return Err(Error::Dimension(format!(
            "grad_out {:?} does not match final state [{hidden}]",
            grad_out.shape()
        )));
    }

    let mut grads = LstmParams::zeros(hidden, input_dim);
    let mut grad_xs = vec![0.0; t_steps * input_dim];
    let mut dh_next = Tensor::zeros(&[hidden]);
    let mut dc_next = Tensor::zeros(&[hidden]);

    for t in (0..t_steps).rev() {
        let s = &cache.steps[t];
        // gradient arriving at h_t: upstream slice plus the recurrent carry
        let mut dh = dh_next.clone();
        if cache.return_sequence {
            dh = dh.add(&grad_out.row(t)?)?;
        } else if t == t_steps - 1 {
            dh = dh.add(grad_out)?;
        }

        // h = o * tanh(c)
        let d_o = dh.mul(&s.tanh_c)?;
        let dtanh = s.tanh_c.map(|v| 1.0 - v * v);
        let dc = dc_next.add(&dh.mul(&s.o)?.mul(&dtanh)?)?;

        // c = f * c_prev + i * c_hat
        let d_f = dc.mul(&s.c_prev)?;
        let d_i = dc.mul(&s.c_hat)?;
        let d_c_hat = dc.mul(&s.i)?;
        dc_next = dc.mul(&s.f)?;

        // through the gate nonlinearities to the pre-activations
        let da_f = d_f.mul(&s.f.map(|v| v * (1.0 - v)))?;
        let da_i = d_i.mul(&s.i.map(|v| v * (1.0 - v)))?;
        let da_c = d_c_hat.mul(&s.c_hat.map(|v| 1.0 - v * v))?;
        let da_o = d_o.mul(&s.o.map(|v| v * (1.0 - v)))?;

        accumulate_gate(&mut grads.w_f, &mut grads.b_f, &da_f, &s.z)?;
        accumulate_gate(&mut grads.w_i, &mut grads.b_i, &da_i, &s.z)?;
        accumulate_gate(&mut grads.w_c, &mut grads.b_c, &da_c, &s.z)?;
        accumulate_gate(&mut grads.w_o, &mut grads.b_o, &da_o, &s.z)?;

        // dz = sum over gates of W_g^T da_g, then split into [h_prev | x]
        let dz = params
            .w_f
            .matvec_t(&da_f)?
            .add(&params.w_i.matvec_t(&da_i)?)?
            .add(&params.w_c.matvec_t(&da_c)?)?
            .add(&params.w_o.matvec_t(&da_o)?)?;
        let dz_data = dz.data();
        dh_next = Tensor::new(&[hidden], dz_data[..hidden].to_vec())?;
        grad_xs[t * input_dim..(t + 1) * input_dim].copy_from_slice(&dz_data[hidden..]);
    }

    Ok((Tensor::new(&[t_steps, input_dim], grad_xs)?, grads))
}

/// `gw += outer(da, z)`, `gb += da`.
fn accumulate_gate(gw: &mut Tensor, gb: &mut Tensor, da: &Tensor, z: &Tensor) -> Result<()> {
    let cols = z.len();
    {
        let gw_data = gw.data_mut();
        for (r, &g) in da.data().iter().enumerate() {
            let row = &mut gw_data[r * cols..(r + 1) * cols];
            for (dst, &zv) in row.iter_mut().zip(z.data()) {
                *dst += g * zv;
            }
        }
    }
    let gb_data = gb.data_mut();
    for (dst, &g) in gb_data.iter_mut().zip(da.data()) {
        *dst += g;
    }
    Ok(())
}
