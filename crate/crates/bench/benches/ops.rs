use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use hcrn_bench::{bench_graph, bench_graph_inputs, paper_scale_inputs, random_tensor};
use hcrn_core::layers::{conv2d_backward, conv2d_forward, lstm_backward, lstm_sequence_forward};
use hcrn_core::loss::cross_entropy;
use hcrn_core::model::{backward, forward};
use hcrn_core::optim::{adadelta_step, AdadeltaParams, AdadeltaState};
use hcrn_core::rng::Rng;
use hcrn_core::tensor::Tensor;
use std::hint::black_box;

fn bench_matmul(c: &mut Criterion) {
    let mut rng = Rng::new(1);
    let a = random_tensor(&mut rng, &[64, 64]);
    let b = random_tensor(&mut rng, &[64, 64]);
    c.bench_function("matmul_64x64", |bench| {
        bench.iter(|| black_box(&a).matmul(black_box(&b)).unwrap())
    });
}

fn bench_conv(c: &mut Criterion) {
    let mut rng = Rng::new(2);
    // first conv layer of the full-size model on one image
    let input = random_tensor(&mut rng, &[60, 80, 3]);
    let kernels = random_tensor(&mut rng, &[3, 3, 3, 32]);
    let bias = random_tensor(&mut rng, &[32]);
    c.bench_function("conv2d_forward_60x80x3_to_32", |bench| {
        bench.iter(|| conv2d_forward(black_box(&input), &kernels, &bias).unwrap())
    });

    let grad_out = random_tensor(&mut rng, &[58, 78, 32]);
    c.bench_function("conv2d_backward_60x80x3_to_32", |bench| {
        bench.iter(|| conv2d_backward(black_box(&input), &kernels, &grad_out).unwrap())
    });
}

fn bench_lstm(c: &mut Criterion) {
    let mut rng = Rng::new(3);
    // the full-size recurrent branch geometry: 60 rows of 80 features
    let params = hcrn_core::layers::LstmParams {
        w_f: random_tensor(&mut rng, &[64, 144]),
        w_i: random_tensor(&mut rng, &[64, 144]),
        w_c: random_tensor(&mut rng, &[64, 144]),
        w_o: random_tensor(&mut rng, &[64, 144]),
        b_f: random_tensor(&mut rng, &[64]),
        b_i: random_tensor(&mut rng, &[64]),
        b_c: random_tensor(&mut rng, &[64]),
        b_o: random_tensor(&mut rng, &[64]),
    };
    let xs = random_tensor(&mut rng, &[60, 80]);
    c.bench_function("lstm_sequence_forward_t60_d80_h64", |bench| {
        bench.iter(|| lstm_sequence_forward(black_box(&xs), &params, true).unwrap())
    });

    let (_, cache) = lstm_sequence_forward(&xs, &params, true).unwrap();
    let grad = random_tensor(&mut rng, &[60, 64]);
    c.bench_function("lstm_backward_t60_d80_h64", |bench| {
        bench.iter(|| lstm_backward(&params, black_box(&cache), &grad).unwrap())
    });
}

fn bench_adadelta(c: &mut Criterion) {
    let mut rng = Rng::new(4);
    let hp = AdadeltaParams::default();
    let param = random_tensor(&mut rng, &[100_000]);
    let grad = random_tensor(&mut rng, &[100_000]);
    let state = AdadeltaState::new(&[100_000]);
    c.bench_function("adadelta_step_100k", |bench| {
        bench.iter(|| adadelta_step(black_box(&param), &grad, &state, &hp).unwrap())
    });
}

fn bench_model(c: &mut Criterion) {
    let graph = bench_graph(5);
    let (rgb, gray) = bench_graph_inputs(&graph, 4, 6);
    c.bench_function("hybrid_forward_infer_b4_24x32", |bench| {
        bench.iter(|| forward(&graph, black_box(&rgb), &gray, false, &mut Rng::new(0)).unwrap())
    });

    let onehot = Tensor::new(
        &[4, 4],
        vec![
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    )
    .unwrap();
    c.bench_function("hybrid_train_step_b4_24x32", |bench| {
        bench.iter_batched(
            || Rng::new(7),
            |mut rng| {
                let trace = forward(&graph, &rgb, &gray, true, &mut rng).unwrap();
                let report = cross_entropy(&trace.probs, &onehot).unwrap();
                let grads = backward(&graph, &trace, &onehot).unwrap();
                black_box((report.loss, grads));
            },
            BatchSize::SmallInput,
        )
    });

    // full-size single-image inference, the deployment-shaped path
    let full = hcrn_core::model::build_hybrid(&mut Rng::new(8), 4).unwrap();
    let (rgb, gray) = paper_scale_inputs(9);
    let mut group = c.benchmark_group("paper_scale");
    group.sample_size(10);
    group.bench_function("hybrid_forward_infer_b1_60x80", |bench| {
        bench.iter(|| forward(&full, black_box(&rgb), &gray, false, &mut Rng::new(0)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_matmul,
    bench_conv,
    bench_lstm,
    bench_adadelta,
    bench_model
);
criterion_main!(benches);
