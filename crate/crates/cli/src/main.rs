use clap::{Args, Parser, Subcommand};
use hcrn_cli::checkpoint::{load_checkpoint, load_graph};
use hcrn_cli::metrics::{confusion_file_name, write_summary};
use hcrn_cli::{exit_code, parse_arch, render_error, Task, TrainConfig};
use hcrn_core::data::{load_dataset, Split};
use hcrn_core::error::{Error, Result};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "hcrn",
    version,
    about = "Train and evaluate the hybrid CNN x LSTM blood-cell classifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write metrics.csv plus a checkpoint
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset split
    Eval(EvalArgs),
    /// Print the layers, shapes, and parameter counts of a checkpoint
    Inspect(InspectArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Architecture: hybrid | cnn
    #[arg(long)]
    arch: Option<String>,
    /// Task: 4way | 2way
    #[arg(long)]
    task: Option<String>,
    /// Dataset root containing TRAIN/ (and optionally TEST/)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory for metrics, checkpoints, and reports
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<u32>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// key=value config file; explicit flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Disable augmentation regardless of config
    #[arg(long)]
    no_augment: bool,
    /// Also write a checkpoint after every epoch
    #[arg(long)]
    ckpt_every_epoch: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint to evaluate
    #[arg(long)]
    ckpt: PathBuf,
    /// Dataset root
    #[arg(long)]
    data: PathBuf,
    /// Split to evaluate: train | test
    #[arg(long, default_value = "test")]
    split: String,
    /// Optional directory to write the confusion CSV and refresh summary.txt
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    /// Checkpoint to describe
    #[arg(long)]
    ckpt: PathBuf,
}

fn main() {
    // die quietly when a downstream pipe closes (eval output is meant to be
    // piped into head/grep/cut)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Inspect(args) => cmd_inspect(args),
    };
    if let Err(err) = result {
        eprintln!("{}", render_error(&err));
        std::process::exit(exit_code(&err));
    }
}

fn resolve_config(args: &TrainArgs) -> Result<TrainConfig> {
    let mut config = match &args.config {
        Some(path) => TrainConfig::from_file(path)?,
        None => TrainConfig::default(),
    };
    if let Some(arch) = &args.arch {
        config.arch = parse_arch(arch)?;
    }
    if let Some(task) = &args.task {
        config.task = Task::parse(task)?;
    }
    if let Some(data) = &args.data {
        config.data_root = data.clone();
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(epochs) = args.epochs {
        config.epochs = epochs;
    }
    if let Some(batch) = args.batch {
        config.batch_size = batch;
    }
    if let Some(lr) = args.lr {
        config.lr = lr;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.no_augment {
        config.augment = false;
    }
    if args.ckpt_every_epoch {
        config.ckpt_every_epoch = true;
    }
    Ok(config)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let config = resolve_config(&args)?;
    println!(
        "training {} / {} on {} for {} epochs (batch {}, lr {}, seed {})",
        config.arch.as_str(),
        config.task.as_str(),
        config.data_root.display(),
        config.epochs,
        config.batch_size,
        config.lr,
        config.seed
    );
    let outcome = hcrn_cli::trainer::train_with_progress(&config, &mut |m| {
        println!(
            "epoch {:>4} {:<5} loss {:.6} accuracy {:.4}",
            m.epoch, m.split, m.loss, m.accuracy
        );
    })?;
    println!("checkpoint written to {}", outcome.checkpoint.display());

    // final held-out evaluation feeds the confusion CSV and summary table
    if hcrn_core::data::split_exists(&config.data_root, Split::Test) {
        let test_items = load_dataset(&config.data_root, Split::Test)?;
        let report = hcrn_cli::evaluate(
            &outcome.graph,
            &test_items,
            &config.class_map(),
            config.batch_size,
        )?;
        let name = confusion_file_name(config.arch.as_str(), config.task.as_str());
        let path = config.out_dir.join(name);
        std::fs::write(&path, report.confusion.to_csv())
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        write_summary(&config.out_dir)?;
        println!(
            "test accuracy {:.4} (mean loss {:.6}); confusion matrix in {}",
            report.accuracy,
            report.mean_loss,
            path.display()
        );
    }
    Ok(())
}

fn parse_split(s: &str) -> Result<Split> {
    match s {
        "train" => Ok(Split::Train),
        "test" => Ok(Split::Test),
        other => Err(Error::Config(format!(
            "unknown split '{other}', expected train or test"
        ))),
    }
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let split = parse_split(&args.split)?;
    let (config, graph) = load_graph(&args.ckpt)?;
    let items = load_dataset(&args.data, split)?;
    let report = hcrn_cli::evaluate(&graph, &items, &config.class_map(), config.batch_size)?;

    println!(
        "{} / {} on {} {}: accuracy {:.4}, mean loss {:.6} over {} images",
        config.arch.as_str(),
        config.task.as_str(),
        args.data.display(),
        split.as_str(),
        report.accuracy,
        report.mean_loss,
        report.confusion.total()
    );
    print!("{}", report.confusion.to_csv());

    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out.display().to_string(), e))?;
        let name = confusion_file_name(config.arch.as_str(), config.task.as_str());
        let path = out.join(name);
        std::fs::write(&path, report.confusion.to_csv())
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        write_summary(out)?;
        println!("confusion matrix written to {}", path.display());
    }
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> Result<()> {
    let (config, params) = load_checkpoint(&args.ckpt)?;
    println!("checkpoint: {}", args.ckpt.display());
    println!(
        "architecture {} / {} ({} classes), input {} rows x {} cols",
        config.arch.as_str(),
        config.task.as_str(),
        config.classes(),
        config.dims.input_h,
        config.dims.input_w
    );
    println!(
        "trained config: epochs {}, batch {}, lr {}, seed {}",
        config.epochs, config.batch_size, config.lr, config.seed
    );
    println!("parameters:");
    let mut total = 0usize;
    for (name, tensor) in params.iter() {
        println!(
            "  {:<16} {:>18}  {:>9}",
            name,
            format!("{:?}", tensor.shape()),
            tensor.len()
        );
        total += tensor.len();
    }
    println!("total parameters: {total}");
    Ok(())
}
