//! Shared input builders for the benchmark targets.

use hcrn_core::model::{build_hybrid_with, ModelDims, NetworkGraph};
use hcrn_core::rng::Rng;
use hcrn_core::tensor::Tensor;

pub fn random_tensor(rng: &mut Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap()
}

/// Full-size single-image inputs: `[1 x 60 x 80 x 3]` rgb plus its grayscale.
pub fn paper_scale_inputs(seed: u64) -> (Tensor, Tensor) {
    let mut rng = Rng::new(seed);
    let dims = ModelDims::paper();
    let n = dims.input_h * dims.input_w * 3;
    let rgb = Tensor::new(
        &[1, dims.input_h, dims.input_w, 3],
        (0..n).map(|_| rng.next_f64()).collect(),
    )
    .unwrap();
    let gray = hcrn_core::data::grayscale_batch(&rgb).unwrap();
    (rgb, gray)
}

/// A mid-size hybrid graph that keeps one benchmark iteration under a
/// millisecond-scale budget.
pub fn bench_graph(seed: u64) -> NetworkGraph {
    let dims = ModelDims {
        input_h: 24,
        input_w: 32,
        conv1: 8,
        conv2: 16,
        lstm_hidden: 16,
        head_units: 32,
        drop_conv: 0.25,
        drop_lstm: 0.25,
        drop_head: 0.5,
    };
    build_hybrid_with(dims, &mut Rng::new(seed), 4).unwrap()
}

pub fn bench_graph_inputs(graph: &NetworkGraph, batch: usize, seed: u64) -> (Tensor, Tensor) {
    let mut rng = Rng::new(seed);
    let (h, w) = (graph.dims.input_h, graph.dims.input_w);
    let rgb = Tensor::new(
        &[batch, h, w, 3],
        (0..batch * h * w * 3).map(|_| rng.next_f64()).collect(),
    )
    .unwrap();
    let gray = hcrn_core::data::grayscale_batch(&rgb).unwrap();
    (rgb, gray)
}
