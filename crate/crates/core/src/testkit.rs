//! Scalar reference oracles and a finite-difference harness.
//!
//! Everything here is deliberately written as naive scalar loops over plain
//! slices, independent of the tensor code paths it is used to check. The
//! module only exists for the test suites (feature `testkit`); it is not part
//! of the production API.

use crate::layers::{LstmParams, LstmState};
use crate::tensor::Tensor;

/// Naive triple-loop matrix product of row-major `a [m x k]` and `b [k x n]`.
pub fn matmul_oracle(a: &[f64], m: usize, k: usize, b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut acc = 0.0;
            for p in 0..k {
                acc += a[i * k + p] * b[p * n + j];
            }
            out[i * n + j] = acc;
        }
    }
    out
}

/// Quintuple-loop valid cross-correlation over row-major buffers.
/// Input `[h x w x cin]`, kernels `[kh x kw x cin x cout]`, bias `[cout]`.
#[allow(clippy::too_many_arguments)]
pub fn conv2d_oracle(
    input: &[f64],
    h: usize,
    w: usize,
    cin: usize,
    kernels: &[f64],
    kh: usize,
    kw: usize,
    cout: usize,
    bias: &[f64],
) -> Vec<f64> {
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let mut out = vec![0.0; oh * ow * cout];
    for y in 0..oh {
        for x in 0..ow {
            for o in 0..cout {
                let mut acc = bias[o];
                for dy in 0..kh {
                    for dx in 0..kw {
                        for c in 0..cin {
                            let iv = input[((y + dy) * w + (x + dx)) * cin + c];
                            let kv = kernels[((dy * kw + dx) * cin + c) * cout + o];
                            acc += iv * kv;
                        }
                    }
                }
                out[(y * ow + x) * cout + o] = acc;
            }
        }
    }
    out
}

/// Window-scan max pooling oracle (2x2, stride 2, trailing odd edge dropped).
pub fn maxpool2x2_oracle(input: &[f64], h: usize, w: usize, c: usize) -> Vec<f64> {
    let (oh, ow) = (h / 2, w / 2);
    let mut out = vec![0.0; oh * ow * c];
    for y in 0..oh {
        for x in 0..ow {
            for ch in 0..c {
                let mut best = f64::NEG_INFINITY;
                for dy in 0..2 {
                    for dx in 0..2 {
                        let v = input[((2 * y + dy) * w + (2 * x + dx)) * c + ch];
                        if v > best {
                            best = v;
                        }
                    }
                }
                out[(y * ow + x) * c + ch] = best;
            }
        }
    }
    out
}

/// Scalar non-vectorized LSTM forward: steps through the gate equations one
/// hidden unit at a time. Returns `(h, c)` trajectories, each `t_steps` rows
/// of `hidden` values.
pub fn lstm_oracle(
    xs: &[f64],
    t_steps: usize,
    input_dim: usize,
    params: &LstmParams,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let hidden = params.hidden();
    let sigma = |v: f64| 1.0 / (1.0 + (-v).exp());
    let gate = |w: &Tensor, b: &Tensor, z: &[f64], j: usize| -> f64 {
        let cols = hidden + input_dim;
        let mut acc = b.data()[j];
        for (p, zv) in z.iter().enumerate() {
            acc += w.data()[j * cols + p] * zv;
        }
        acc
    };

    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    let mut hs = Vec::with_capacity(t_steps);
    let mut cs = Vec::with_capacity(t_steps);
    for t in 0..t_steps {
        let mut z = h.clone();
        z.extend_from_slice(&xs[t * input_dim..(t + 1) * input_dim]);
        let mut nh = vec![0.0; hidden];
        let mut nc = vec![0.0; hidden];
        for j in 0..hidden {
            let f = sigma(gate(&params.w_f, &params.b_f, &z, j));
            let i = sigma(gate(&params.w_i, &params.b_i, &z, j));
            let c_hat = gate(&params.w_c, &params.b_c, &z, j).tanh();
            let cj = f * c[j] + i * c_hat;
            let o = sigma(gate(&params.w_o, &params.b_o, &z, j));
            nc[j] = cj;
            nh[j] = o * cj.tanh();
        }
        h = nh.clone();
        c = nc.clone();
        hs.push(nh);
        cs.push(nc);
    }
    (hs, cs)
}

/// Scalar BPTT oracle for the loss `sum(grad_out * h_T)` (final-state output).
///
/// With `block_c_recurrence` set, the cell-state carry `dc * f` between
/// timesteps is severed, isolating what the hidden-state path alone
/// contributes; the difference against a full run measures the C-path share
/// of a gradient.
pub fn lstm_bptt_oracle(
    xs: &[f64],
    t_steps: usize,
    input_dim: usize,
    params: &LstmParams,
    grad_h_final: &[f64],
    block_c_recurrence: bool,
) -> Vec<f64> {
    let hidden = params.hidden();
    let cols = hidden + input_dim;
    let sigma = |v: f64| 1.0 / (1.0 + (-v).exp());

    // forward, caching per-step gate values
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    let mut zs = Vec::new();
    let mut fs = Vec::new();
    let mut is = Vec::new();
    let mut chats = Vec::new();
    let mut os = Vec::new();
    let mut cprevs = Vec::new();
    let mut cvals = Vec::new();
    for t in 0..t_steps {
        let mut z = h.clone();
        z.extend_from_slice(&xs[t * input_dim..(t + 1) * input_dim]);
        let mut f = vec![0.0; hidden];
        let mut i = vec![0.0; hidden];
        let mut c_hat = vec![0.0; hidden];
        let mut o = vec![0.0; hidden];
        let mut nc = vec![0.0; hidden];
        let mut nh = vec![0.0; hidden];
        for j in 0..hidden {
            let pre = |w: &Tensor, b: &Tensor| -> f64 {
                let mut acc = b.data()[j];
                for (p, zv) in z.iter().enumerate() {
                    acc += w.data()[j * cols + p] * zv;
                }
                acc
            };
            f[j] = sigma(pre(&params.w_f, &params.b_f));
            i[j] = sigma(pre(&params.w_i, &params.b_i));
            c_hat[j] = pre(&params.w_c, &params.b_c).tanh();
            nc[j] = f[j] * c[j] + i[j] * c_hat[j];
            o[j] = sigma(pre(&params.w_o, &params.b_o));
            nh[j] = o[j] * nc[j].tanh();
        }
        zs.push(z);
        fs.push(f);
        is.push(i);
        chats.push(c_hat);
        os.push(o);
        cprevs.push(c.clone());
        cvals.push(nc.clone());
        h = nh;
        c = nc;
    }

    // backward
    let mut grad_xs = vec![0.0; t_steps * input_dim];
    let mut dh = grad_h_final.to_vec();
    let mut dc = vec![0.0; hidden];
    for t in (0..t_steps).rev() {
        let mut dz = vec![0.0; cols];
        for j in 0..hidden {
            let tanh_c = cvals[t][j].tanh();
            let d_o = dh[j] * tanh_c;
            let dcj = dc[j] + dh[j] * os[t][j] * (1.0 - tanh_c * tanh_c);
            let d_f = dcj * cprevs[t][j];
            let d_i = dcj * chats[t][j];
            let d_chat = dcj * is[t][j];
            dc[j] = if block_c_recurrence {
                0.0
            } else {
                dcj * fs[t][j]
            };

            let da_f = d_f * fs[t][j] * (1.0 - fs[t][j]);
            let da_i = d_i * is[t][j] * (1.0 - is[t][j]);
            let da_c = d_chat * (1.0 - chats[t][j] * chats[t][j]);
            let da_o = d_o * os[t][j] * (1.0 - os[t][j]);
            for (p, dzp) in dz.iter_mut().enumerate() {
                *dzp += params.w_f.data()[j * cols + p] * da_f
                    + params.w_i.data()[j * cols + p] * da_i
                    + params.w_c.data()[j * cols + p] * da_c
                    + params.w_o.data()[j * cols + p] * da_o;
            }
        }
        dh = dz[..hidden].to_vec();
        grad_xs[t * input_dim..(t + 1) * input_dim].copy_from_slice(&dz[hidden..]);
    }
    grad_xs
}

/// Scalar Adadelta recurrence for a single parameter element.
pub struct AdadeltaScalarOracle {
    pub rho: f64,
    pub eps: f64,
    pub lr: f64,
    pub eg2: f64,
    pub edx2: f64,
}

impl AdadeltaScalarOracle {
    pub fn new(rho: f64, eps: f64, lr: f64) -> Self {
        AdadeltaScalarOracle {
            rho,
            eps,
            lr,
            eg2: 0.0,
            edx2: 0.0,
        }
    }

    /// Apply one update to `param`, returning the new value.
    pub fn step(&mut self, param: f64, g: f64) -> f64 {
        self.eg2 = self.rho * self.eg2 + (1.0 - self.rho) * g * g;
        let dx = -((self.edx2 + self.eps).sqrt() / (self.eg2 + self.eps).sqrt()) * g;
        self.edx2 = self.rho * self.edx2 + (1.0 - self.rho) * dx * dx;
        param + self.lr * dx
    }
}

/// Scalar bilinear sample of an `[h x w]` single-channel buffer with
/// corner-aligned coordinates.
pub fn bilinear_sample_oracle(src: &[f64], h: usize, w: usize, sy: f64, sx: f64) -> f64 {
    let y0 = sy.floor() as usize;
    let x0 = sx.floor() as usize;
    let y1 = (y0 + 1).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let fy = sy - y0 as f64;
    let fx = sx - x0 as f64;
    let top = (1.0 - fx) * src[y0 * w + x0] + fx * src[y0 * w + x1];
    let bot = (1.0 - fx) * src[y1 * w + x0] + fx * src[y1 * w + x1];
    (1.0 - fy) * top + fy * bot
}

/// Central finite difference of a scalar function at `x`, one coordinate at
/// a time: `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn central_diff(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe);
        probe[i] = orig - h;
        let minus = f(&probe);
        probe[i] = orig;
        grad[i] = (plus - minus) / (2.0 * h);
    }
    grad
}

/// Relative error with an absolute floor so near-zero pairs compare sanely.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-8)
}

/// Largest relative error between an analytic gradient and a central
/// finite-difference estimate of `f` at `x`.
pub fn max_grad_rel_err(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x: &[f64],
    analytic: &[f64],
    h: f64,
) -> f64 {
    assert_eq!(x.len(), analytic.len());
    let numeric = central_diff(f, x, h);
    numeric
        .iter()
        .zip(analytic)
        .map(|(&n, &a)| rel_err(n, a))
        .fold(0.0, f64::max)
}

/// Convenience: random LSTM parameters with entries in `[-scale, scale]`.
pub fn random_lstm_params(
    rng: &mut crate::rng::Rng,
    hidden: usize,
    input_dim: usize,
    scale: f64,
) -> LstmParams {
    let cols = hidden + input_dim;
    let mut mk_w = || {
        Tensor::new(
            &[hidden, cols],
            (0..hidden * cols)
                .map(|_| rng.uniform(-scale, scale))
                .collect(),
        )
        .unwrap()
    };
    let w_f = mk_w();
    let w_i = mk_w();
    let w_c = mk_w();
    let w_o = mk_w();
    let mut mk_b = || {
        Tensor::new(
            &[hidden],
            (0..hidden).map(|_| rng.uniform(-scale, scale)).collect(),
        )
        .unwrap()
    };
    LstmParams {
        w_f,
        w_i,
        w_c,
        w_o,
        b_f: mk_b(),
        b_i: mk_b(),
        b_c: mk_b(),
        b_o: mk_b(),
    }
}

/// Zero initial state helper mirroring the sequence-forward convention.
pub fn zero_state(hidden: usize) -> LstmState {
    LstmState::zeros(hidden)
}
