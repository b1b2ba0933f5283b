//! The training loop and inference-mode evaluation.
//!
//! One run is sequential at batch granularity: seeded batches, training-mode
//! forward, cross-entropy, backprop, one Adadelta step per parameter. All
//! random streams derive from the config seed (stream 0 initializes weights,
//! 1 shuffles, 2 augments, 3 drives dropout), so a `(config, dataset)` pair
//! reproduces byte-identical metrics and checkpoints.

use crate::checkpoint::save_checkpoint;
use crate::config::TrainConfig;
use crate::metrics::{metrics_row, ConfusionMatrix, EpochMetrics, METRICS_HEADER};
use hcrn_core::data::{
    batches, load_dataset, resize_dataset, split_exists, ClassMap, LabeledImage, Split,
};
use hcrn_core::error::{Error, Result};
use hcrn_core::loss::cross_entropy;
use hcrn_core::model::{
    backward, build_cnn_only_with, build_hybrid_with, forward, Architecture, NetworkGraph,
};
use hcrn_core::optim::{adadelta_step, AdadeltaParams, AdadeltaState};
use hcrn_core::rng::{derive_seed, Rng};
use hcrn_core::tensor::Tensor;
use std::io::Write as _;
use std::path::PathBuf;

/// Result of a training run.
pub struct TrainOutcome {
    pub graph: NetworkGraph,
    pub metrics: Vec<EpochMetrics>,
    pub checkpoint: PathBuf,
}

/// Evaluation result over one split.
pub struct EvalReport {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub mean_loss: f64,
}

fn build_graph(config: &TrainConfig) -> Result<NetworkGraph> {
    let mut init_rng = Rng::new(derive_seed(config.seed, 0, 0));
    match config.arch {
        Architecture::Hybrid => build_hybrid_with(config.dims, &mut init_rng, config.classes()),
        Architecture::CnnOnly => build_cnn_only_with(config.dims, &mut init_rng, config.classes()),
    }
}

fn argmax_row(t: &Tensor, row: usize) -> Result<usize> {
    t.row(row)?.argmax()
}

/// Train per the config: load TRAIN (and TEST when present), run the epoch
/// loop, stream metrics.csv, and write the final checkpoint to
/// `out/model.ckpt`.
pub fn train(config: &TrainConfig) -> Result<TrainOutcome> {
    train_with_progress(config, &mut |_| {})
}

/// [`train`] with a per-metrics-row callback (the CLI prints from it).
pub fn train_with_progress(
    config: &TrainConfig,
    progress: &mut dyn FnMut(&EpochMetrics),
) -> Result<TrainOutcome> {
    config.validate()?;
    let class_map = config.class_map();
    let (h, w) = (config.dims.input_h, config.dims.input_w);

    let train_items = resize_dataset(load_dataset(&config.data_root, Split::Train)?, h, w)?;
    let test_items: Option<Vec<LabeledImage>> = if split_exists(&config.data_root, Split::Test) {
        Some(resize_dataset(
            load_dataset(&config.data_root, Split::Test)?,
            h,
            w,
        )?)
    } else {
        None
    };

    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| Error::io(config.out_dir.display().to_string(), e))?;
    let metrics_path = config.out_dir.join("metrics.csv");
    let mut metrics_file = std::fs::File::create(&metrics_path)
        .map_err(|e| Error::io(metrics_path.display().to_string(), e))?;
    writeln!(metrics_file, "{METRICS_HEADER}")
        .map_err(|e| Error::io(metrics_path.display().to_string(), e))?;

    let mut graph = build_graph(config)?;
    let hp = AdadeltaParams {
        rho: config.rho,
        eps: config.eps,
        lr: config.lr,
    };
    let mut opt_states: Vec<(String, AdadeltaState)> = graph
        .params
        .iter()
        .map(|(name, t)| (name.to_string(), AdadeltaState::new(t.shape())))
        .collect();

    let augment = config.augment.then(|| config.augment_spec());
    let shuffle_seed = derive_seed(config.seed, 1, 0);
    let mut all_metrics = Vec::new();

    for epoch_idx in 0..config.epochs {
        let mut dropout_rng = Rng::new(derive_seed(config.seed, 3, epoch_idx as u64));
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        let mut seen = 0usize;

        for batch in batches(
            &train_items,
            &class_map,
            config.batch_size,
            Some(shuffle_seed),
            epoch_idx as u64,
            augment,
        )? {
            let batch = batch?;
            let trace = forward(&graph, &batch.rgb, &batch.gray, true, &mut dropout_rng)?;
            let report = cross_entropy(&trace.probs, &batch.onehot)?;
            for b in 0..batch.len() {
                if argmax_row(&trace.probs, b)? == argmax_row(&batch.onehot, b)? {
                    correct += 1;
                }
            }
            let grads = backward(&graph, &trace, &batch.onehot)?;
            for (name, state) in opt_states.iter_mut() {
                let (new_param, new_state) =
                    adadelta_step(graph.params.get(name)?, grads.get(name)?, state, &hp)?;
                graph.params.set(name, new_param)?;
                *state = new_state;
            }
            loss_sum += report.loss * batch.len() as f64;
            seen += batch.len();
        }

        let epoch = epoch_idx + 1;
        let train_m = EpochMetrics {
            epoch,
            split: "train",
            loss: loss_sum / seen as f64,
            accuracy: correct as f64 / seen as f64,
        };
        write_metric(&mut metrics_file, &metrics_path, &train_m)?;
        progress(&train_m);
        all_metrics.push(train_m);

        if let Some(test) = &test_items {
            let report = evaluate(&graph, test, &class_map, config.batch_size)?;
            let test_m = EpochMetrics {
                epoch,
                split: "test",
                loss: report.mean_loss,
                accuracy: report.accuracy,
            };
            write_metric(&mut metrics_file, &metrics_path, &test_m)?;
            progress(&test_m);
            all_metrics.push(test_m);
        }

        if config.ckpt_every_epoch {
            let path = config.out_dir.join(format!("epoch_{epoch:04}.ckpt"));
            save_checkpoint(&path, config, &graph.params)?;
        }
    }

    let checkpoint = config.out_dir.join("model.ckpt");
    save_checkpoint(&checkpoint, config, &graph.params)?;
    Ok(TrainOutcome {
        graph,
        metrics: all_metrics,
        checkpoint,
    })
}

fn write_metric(file: &mut std::fs::File, path: &std::path::Path, m: &EpochMetrics) -> Result<()> {
    file.write_all(metrics_row(m).as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Inference-mode evaluation over unaugmented images in dataset order.
/// Images are resized to the graph's input extent if they are not already.
pub fn evaluate(
    graph: &NetworkGraph,
    items: &[LabeledImage],
    class_map: &ClassMap,
    batch_size: usize,
) -> Result<EvalReport> {
    if graph.classes != class_map.classes() {
        return Err(Error::Config(format!(
            "graph has {} classes but the task needs {}",
            graph.classes,
            class_map.classes()
        )));
    }
    let (h, w) = (graph.dims.input_h, graph.dims.input_w);
    let resized: Vec<LabeledImage>;
    let items = if items.iter().all(|i| i.pixels.shape() == [h, w, 3]) {
        items
    } else {
        resized = resize_dataset(items.to_vec(), h, w)?;
        &resized
    };

    let mut confusion = ConfusionMatrix::new(class_map.names());
    let mut loss_sum = 0.0;
    let mut seen = 0usize;
    let mut rng = Rng::new(0); // inference: never consumed
    for batch in batches(items, class_map, batch_size, None, 0, None)? {
        let batch = batch?;
        let trace = forward(graph, &batch.rgb, &batch.gray, false, &mut rng)?;
        let report = cross_entropy(&trace.probs, &batch.onehot)?;
        for b in 0..batch.len() {
            let truth = argmax_row(&batch.onehot, b)?;
            let pred = argmax_row(&trace.probs, b)?;
            confusion.record(truth, pred);
        }
        loss_sum += report.loss * batch.len() as f64;
        seen += batch.len();
    }
    Ok(EvalReport {
        accuracy: confusion.accuracy(),
        confusion,
        mean_loss: loss_sum / seen as f64,
    })
}
