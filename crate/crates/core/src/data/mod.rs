//! Dataset ingestion, preprocessing, label encoding, deterministic
//! augmentation, and batch iteration.
//!
//! The on-disk layout is `root/{TRAIN,TEST}/{CLASS_NAME}/*.ppm` with binary
//! 8-bit P6 rasters decoded natively; JPEG/PNG work behind the
//! `image-formats` feature.

pub mod augment;
pub mod batch;
pub mod labels;
pub mod loader;
pub mod ops;
pub mod ppm;

pub use augment::{augment, AugmentSpec};
pub use batch::{batches, grayscale_batch, Batch, EpochBatches};
pub use labels::{one_hot, relabel_two_way, ClassMap, Grouping, CLASS_NAMES};
pub use loader::{load_dataset, split_exists, Split};
pub use ops::{resize_bilinear, resize_dataset, to_grayscale};

use crate::tensor::Tensor;
use std::path::PathBuf;

/// A decoded image with its class label and provenance.
///
/// Pixels are `[H x W x 3]` reals in `[0, 1]`; the label is one of the
/// dataset vocabulary names in [`CLASS_NAMES`].
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub pixels: Tensor,
    pub label: String,
    pub path: PathBuf,
}
