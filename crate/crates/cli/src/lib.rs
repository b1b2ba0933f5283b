//! Training, evaluation, checkpointing, and reporting around `hcrn-core`.
//!
//! The `hcrn` binary is a thin wrapper over this library; tests drive the
//! same entry points directly.

pub mod checkpoint;
pub mod config;
pub mod metrics;
pub mod synth;
pub mod trainer;

pub use config::{parse_arch, Task, TrainConfig};
pub use trainer::{evaluate, train, EvalReport, TrainOutcome};

use hcrn_core::error::Error;

/// Process exit code for an error category: 2 config, 3 dataset, 4
/// integrity, 5 I/O. Shape and usage problems surface as config errors at
/// the CLI boundary.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Dimension(_) | Error::Usage(_) => 2,
        Error::Dataset(_) | Error::Label(_) | Error::Ingestion { .. } => 3,
        Error::Integrity(_) => 4,
        Error::Io { .. } => 5,
    }
}

/// Single-line machine-parsable error rendering: `error[E<code>]: <message>`.
pub fn render_error(err: &Error) -> String {
    format!("error[E{}]: {err}", exit_code(err))
}
