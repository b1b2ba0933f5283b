//! Forward, backward, and prediction over an assembled [`NetworkGraph`].
//!
//! Execution is per batch item in ascending index order; gradients are
//! reduced in that same order, so results do not depend on scheduling.

use crate::error::{Error, Result};
use crate::layers::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, dropout_apply,
    dropout_backward, lstm_backward, lstm_sequence_forward, maxpool2x2_backward,
    maxpool2x2_forward, merge_mul_backward, merge_mul_forward, relu, relu_backward, softmax,
    Activation, DenseCache, DropoutMask, LayerSpec, LstmParams, LstmSequenceCache,
};
use crate::loss::cross_entropy;
use crate::model::{GradStore, NetworkGraph};
use crate::rng::Rng;
use crate::tensor::Tensor;

/// Saved forward state for one layer of one batch item.
#[derive(Debug, Clone)]
enum LayerCache {
    Conv {
        input: Tensor,
    },
    Relu {
        input: Tensor,
    },
    Pool {
        input_shape: Vec<usize>,
        indices: Vec<usize>,
    },
    Dropout {
        mask: DropoutMask,
    },
    Flatten {
        input_shape: Vec<usize>,
    },
    Dense {
        cache: DenseCache,
    },
    Lstm {
        cache: LstmSequenceCache,
    },
    Merge {
        a: Tensor,
        b: Tensor,
    },
    Softmax,
}

#[derive(Debug, Clone)]
struct ItemTrace {
    cnn: Vec<LayerCache>,
    rnn: Vec<LayerCache>,
    head: Vec<LayerCache>,
}

/// Per-layer activation caches for a whole batch plus the final class
/// probabilities `[batch x classes]`. Produced by [`forward`], consumed by
/// [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub probs: Tensor,
    items: Vec<ItemTrace>,
    training: bool,
}

impl ForwardTrace {
    pub fn batch_size(&self) -> usize {
        self.items.len()
    }

    pub fn training(&self) -> bool {
        self.training
    }
}

fn fetch_lstm_params(graph: &NetworkGraph, name: &str) -> Result<LstmParams> {
    LstmParams::new(
        graph.params.get(&format!("{name}.w_f"))?.clone(),
        graph.params.get(&format!("{name}.w_i"))?.clone(),
        graph.params.get(&format!("{name}.w_c"))?.clone(),
        graph.params.get(&format!("{name}.w_o"))?.clone(),
        graph.params.get(&format!("{name}.b_f"))?.clone(),
        graph.params.get(&format!("{name}.b_i"))?.clone(),
        graph.params.get(&format!("{name}.b_c"))?.clone(),
        graph.params.get(&format!("{name}.b_o"))?.clone(),
    )
}

/// Run one section's layers over a single item's tensor.
fn run_section(
    graph: &NetworkGraph,
    specs: &[LayerSpec],
    mut x: Tensor,
    training: bool,
    rng: &mut Rng,
    caches: &mut Vec<LayerCache>,
) -> Result<Tensor> {
    for spec in specs {
        x = match spec {
            LayerSpec::Conv2d { name, .. } => {
                let w = graph.params.get(&format!("{name}.w"))?;
                let b = graph.params.get(&format!("{name}.b"))?;
                let out = conv2d_forward(&x, w, b)?;
                caches.push(LayerCache::Conv { input: x });
                out
            }
            LayerSpec::Relu => {
                let out = relu(&x);
                caches.push(LayerCache::Relu { input: x });
                out
            }
            LayerSpec::MaxPool2x2 => {
                let (out, indices) = maxpool2x2_forward(&x)?;
                caches.push(LayerCache::Pool {
                    input_shape: x.shape().to_vec(),
                    indices,
                });
                out
            }
            LayerSpec::Dropout { p } => {
                let (out, mask) = dropout_apply(&x, *p, rng, training)?;
                caches.push(LayerCache::Dropout { mask });
                out
            }
            LayerSpec::Flatten => {
                let shape = x.shape().to_vec();
                let out = x.reshape(&[x.len()])?;
                caches.push(LayerCache::Flatten { input_shape: shape });
                out
            }
            LayerSpec::Dense {
                name,
                relu: use_relu,
                ..
            } => {
                let w = graph.params.get(&format!("{name}.w"))?;
                let b = graph.params.get(&format!("{name}.b"))?;
                let act = if *use_relu {
                    Activation::Relu
                } else {
                    Activation::None
                };
                let (out, cache) = dense_forward(&x, w, b, act)?;
                caches.push(LayerCache::Dense { cache });
                out
            }
            LayerSpec::Lstm {
                name,
                return_sequence,
                ..
            } => {
                let params = fetch_lstm_params(graph, name)?;
                let (out, cache) = lstm_sequence_forward(&x, &params, *return_sequence)?;
                caches.push(LayerCache::Lstm { cache });
                out
            }
            LayerSpec::MergeMul => {
                return Err(Error::Usage("merge layer encountered mid-section".into()))
            }
            LayerSpec::Softmax => {
                let out = softmax(&x)?;
                caches.push(LayerCache::Softmax);
                out
            }
        };
    }
    Ok(x)
}

/// Backward walk over one section. `grads` receives parameter gradients and
/// the function returns the gradient w.r.t. the section input.
fn backward_section(
    graph: &NetworkGraph,
    specs: &[LayerSpec],
    caches: &[LayerCache],
    mut g: Tensor,
    grads: &mut GradStore,
) -> Result<Tensor> {
    if specs.len() != caches.len() {
        return Err(Error::Usage(format!(
            "trace has {} cached layers for a {}-layer section; graph and trace disagree",
            caches.len(),
            specs.len()
        )));
    }
    for (spec, cache) in specs.iter().zip(caches).rev() {
        g = match (spec, cache) {
            (LayerSpec::Conv2d { name, .. }, LayerCache::Conv { input }) => {
                let w = graph.params.get(&format!("{name}.w"))?;
                let (gi, gw, gb) = conv2d_backward(input, w, &g)?;
                grads.accumulate(&format!("{name}.w"), &gw)?;
                grads.accumulate(&format!("{name}.b"), &gb)?;
                gi
            }
            (LayerSpec::Relu, LayerCache::Relu { input }) => relu_backward(input, &g),
            (
                LayerSpec::MaxPool2x2,
                LayerCache::Pool {
                    input_shape,
                    indices,
                },
            ) => maxpool2x2_backward(input_shape, indices, &g)?,
            (LayerSpec::Dropout { .. }, LayerCache::Dropout { mask }) => {
                dropout_backward(mask, &g)?
            }
            (LayerSpec::Flatten, LayerCache::Flatten { input_shape }) => g.reshape(input_shape)?,
            (LayerSpec::Dense { name, .. }, LayerCache::Dense { cache }) => {
                let w = graph.params.get(&format!("{name}.w"))?;
                let (gi, gw, gb) = dense_backward(w, cache, &g)?;
                grads.accumulate(&format!("{name}.w"), &gw)?;
                grads.accumulate(&format!("{name}.b"), &gb)?;
                gi
            }
            (LayerSpec::Lstm { name, .. }, LayerCache::Lstm { cache }) => {
                let params = fetch_lstm_params(graph, name)?;
                let (gx, gp) = lstm_backward(&params, cache, &g)?;
                grads.accumulate(&format!("{name}.w_f"), &gp.w_f)?;
                grads.accumulate(&format!("{name}.w_i"), &gp.w_i)?;
                grads.accumulate(&format!("{name}.w_c"), &gp.w_c)?;
                grads.accumulate(&format!("{name}.w_o"), &gp.w_o)?;
                grads.accumulate(&format!("{name}.b_f"), &gp.b_f)?;
                grads.accumulate(&format!("{name}.b_i"), &gp.b_i)?;
                grads.accumulate(&format!("{name}.b_c"), &gp.b_c)?;
                grads.accumulate(&format!("{name}.b_o"), &gp.b_o)?;
                gx
            }
            (LayerSpec::Softmax, LayerCache::Softmax) => {
                // the caller feeds the fused softmax+cross-entropy gradient,
                // already taken w.r.t. the logits
                g
            }
            _ => {
                return Err(Error::Usage(
                    "trace cache does not match graph layer kind".into(),
                ))
            }
        };
    }
    Ok(g)
}

fn check_batch_inputs(graph: &NetworkGraph, rgb: &Tensor, gray: &Tensor) -> Result<usize> {
    let (h, w) = (graph.dims.input_h, graph.dims.input_w);
    if rgb.rank() != 4 || rgb.shape()[1] != h || rgb.shape()[2] != w || rgb.shape()[3] != 3 {
        return Err(Error::Dimension(format!(
            "rgb batch {:?} does not match expected [B x {h} x {w} x 3]",
            rgb.shape()
        )));
    }
    if gray.rank() != 3 || gray.shape()[1] != h || gray.shape()[2] != w {
        return Err(Error::Dimension(format!(
            "gray batch {:?} does not match expected [B x {h} x {w}]",
            gray.shape()
        )));
    }
    if rgb.shape()[0] != gray.shape()[0] {
        return Err(Error::Dimension(format!(
            "rgb batch has {} items but gray batch has {}",
            rgb.shape()[0],
            gray.shape()[0]
        )));
    }
    Ok(rgb.shape()[0])
}

/// Run the network over a batch.
///
/// `rgb` is `[B x H x W x 3]`, `gray` the matching grayscale stack
/// `[B x H x W]` (ignored by the CNN-only baseline). In training mode
/// dropout draws from `rng`; at inference dropout is bypassed and `rng` is
/// untouched, so two inference passes on one input are identical.
pub fn forward(
    graph: &NetworkGraph,
    rgb: &Tensor,
    gray: &Tensor,
    training: bool,
    rng: &mut Rng,
) -> Result<ForwardTrace> {
    let batch = check_batch_inputs(graph, rgb, gray)?;
    let mut items = Vec::with_capacity(batch);
    let mut probs = Vec::with_capacity(batch);

    for b in 0..batch {
        let mut item = ItemTrace {
            cnn: Vec::new(),
            rnn: Vec::new(),
            head: Vec::new(),
        };

        let cnn_out = run_section(
            graph,
            &graph.cnn,
            rgb.index_axis0(b)?,
            training,
            rng,
            &mut item.cnn,
        )?;

        let head_in = if let Some(rnn_specs) = &graph.rnn {
            let rnn_out = run_section(
                graph,
                rnn_specs,
                gray.index_axis0(b)?,
                training,
                rng,
                &mut item.rnn,
            )?;
            let merged = merge_mul_forward(&cnn_out, &rnn_out)?;
            item.head.push(LayerCache::Merge {
                a: cnn_out,
                b: rnn_out,
            });
            merged
        } else {
            cnn_out
        };

        let head_specs = head_specs_after_merge(graph);
        let out = run_section(graph, head_specs, head_in, training, rng, &mut item.head)?;
        probs.push(out);
        items.push(item);
    }

    Ok(ForwardTrace {
        probs: Tensor::stack(&probs)?,
        items,
        training,
    })
}

/// The head layer list minus the leading merge (which is executed inline
/// because it takes two inputs).
fn head_specs_after_merge(graph: &NetworkGraph) -> &[LayerSpec] {
    match graph.head.first() {
        Some(LayerSpec::MergeMul) => &graph.head[1..],
        _ => &graph.head,
    }
}

/// End-to-end backpropagation: cross-entropy against `onehot`, then the
/// chain rule through the head and both branches. Returns gradients keyed
/// exactly like `graph.params`, reduced over items in ascending index order.
pub fn backward(graph: &NetworkGraph, trace: &ForwardTrace, onehot: &Tensor) -> Result<GradStore> {
    if !trace.training {
        return Err(Error::Usage(
            "backward needs a trace from a training-mode forward".into(),
        ));
    }
    let report = cross_entropy(&trace.probs, onehot)?;
    let mut grads = graph.params.zeros_like();
    let head_specs = head_specs_after_merge(graph);
    let has_merge = head_specs.len() != graph.head.len();

    for (b, item) in trace.items.iter().enumerate() {
        let expect_head = head_specs.len() + usize::from(has_merge);
        if item.head.len() != expect_head {
            return Err(Error::Usage(format!(
                "trace head has {} cached layers, graph expects {expect_head}",
                item.head.len()
            )));
        }
        let g_logits = report.grad_logits.row(b)?;
        let after_merge = &item.head[usize::from(has_merge)..];
        let g_head_in = backward_section(graph, head_specs, after_merge, g_logits, &mut grads)?;

        if has_merge {
            let (a, b_branch) = match &item.head[0] {
                LayerCache::Merge { a, b } => (a, b),
                _ => {
                    return Err(Error::Usage(
                        "hybrid trace is missing its merge cache".into(),
                    ))
                }
            };
            let (g_cnn, g_rnn) = merge_mul_backward(a, b_branch, &g_head_in)?;
            backward_section(graph, &graph.cnn, &item.cnn, g_cnn, &mut grads)?;
            let rnn_specs = graph.rnn.as_ref().expect("merge implies an rnn branch");
            backward_section(graph, rnn_specs, &item.rnn, g_rnn, &mut grads)?;
        } else {
            backward_section(graph, &graph.cnn, &item.cnn, g_head_in, &mut grads)?;
        }
    }
    Ok(grads)
}

/// Inference-mode class prediction: argmax of each probability row.
pub fn predict(graph: &NetworkGraph, rgb: &Tensor, gray: &Tensor) -> Result<Vec<usize>> {
    let mut rng = Rng::new(0); // untouched at inference
    let trace = forward(graph, rgb, gray, false, &mut rng)?;
    let batch = trace.probs.shape()[0];
    let mut out = Vec::with_capacity(batch);
    for b in 0..batch {
        out.push(trace.probs.row(b)?.argmax()?);
    }
    Ok(out)
}
