//! Deterministic epoch batching with optional augmentation.
//!
//! An epoch visits the dataset in a seeded permutation, chunked into batches
//! with the final short batch emitted. Per-item augmentation draws from a
//! generator seeded by (augment seed, epoch, item index), so the emitted
//! pixels do not depend on consumption order or scheduling. The grayscale
//! channel is derived after augmentation.

use crate::data::labels::ClassMap;
use crate::data::ops::to_grayscale;
use crate::data::{augment, AugmentSpec, LabeledImage};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Rng};
use crate::tensor::Tensor;

/// One training/evaluation batch: stacked pixels, the matching grayscale
/// stack, one-hot labels, and the source dataset indices.
#[derive(Debug, Clone)]
pub struct Batch {
    pub rgb: Tensor,
    pub gray: Tensor,
    pub onehot: Tensor,
    pub indices: Vec<usize>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Lazy iterator over one epoch's batches.
pub struct EpochBatches<'a> {
    items: &'a [LabeledImage],
    class_map: &'a ClassMap,
    order: Vec<usize>,
    cursor: usize,
    batch_size: usize,
    augment_spec: Option<AugmentSpec>,
    epoch: u64,
}

/// Build the batch iterator for one epoch.
///
/// `shuffle_seed` of `Some(seed)` visits a seeded permutation (re-derived per
/// epoch); `None` keeps dataset order, which evaluation uses. When an
/// [`AugmentSpec`] is given, each item is augmented under its own derived
/// generator before the grayscale channel is computed.
pub fn batches<'a>(
    items: &'a [LabeledImage],
    class_map: &'a ClassMap,
    batch_size: usize,
    shuffle_seed: Option<u64>,
    epoch: u64,
    augment_spec: Option<AugmentSpec>,
) -> Result<EpochBatches<'a>> {
    if items.is_empty() {
        return Err(Error::Dataset("cannot batch an empty dataset".into()));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch size must be >= 1".into()));
    }
    if let Some(spec) = &augment_spec {
        spec.validate()?;
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    if let Some(seed) = shuffle_seed {
        // u64::MAX cannot collide with an item index stream
        let mut rng = Rng::new(derive_seed(seed, epoch, u64::MAX));
        rng.shuffle(&mut order);
    }
    Ok(EpochBatches {
        items,
        class_map,
        order,
        cursor: 0,
        batch_size,
        augment_spec,
        epoch,
    })
}

impl EpochBatches<'_> {
    fn build_batch(&self, indices: &[usize]) -> Result<Batch> {
        let mut rgb_items = Vec::with_capacity(indices.len());
        let mut gray_items = Vec::with_capacity(indices.len());
        let mut onehot_items = Vec::with_capacity(indices.len());
        for &idx in indices {
            let item = &self.items[idx];
            let pixels = match &self.augment_spec {
                Some(spec) => {
                    let mut rng = Rng::new(derive_seed(spec.seed, self.epoch, idx as u64));
                    augment(item, spec, &mut rng)?.pixels
                }
                None => item.pixels.clone(),
            };
            gray_items.push(to_grayscale(&pixels)?);
            rgb_items.push(pixels);
            onehot_items.push(self.class_map.one_hot(&item.label)?);
        }
        Ok(Batch {
            rgb: Tensor::stack(&rgb_items)?,
            gray: Tensor::stack(&gray_items)?,
            onehot: Tensor::stack(&onehot_items)?,
            indices: indices.to_vec(),
        })
    }
}

impl Iterator for EpochBatches<'_> {
    type Item = Result<Batch>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.cursor >= self.order.len() {
            return None;
        }
        let end = (self.cursor + self.batch_size).min(self.order.len());
        let slice = self.order[self.cursor..end].to_vec();
        self.cursor = end;
        Some(self.build_batch(&slice))
    }
}

/// Grayscale stack `[B x H x W]` recomputed from an rgb stack `[B x H x W x 3]`.
pub fn grayscale_batch(rgb: &Tensor) -> Result<Tensor> {
    if rgb.rank() != 4 || rgb.shape()[3] != 3 {
        return Err(Error::Dimension(format!(
            "expected [B x H x W x 3], got {:?}",
            rgb.shape()
        )));
    }
    let items: Vec<Tensor> = (0..rgb.shape()[0])
        .map(|b| to_grayscale(&rgb.index_axis0(b)?))
        .collect::<Result<_>>()?;
    Tensor::stack(&items)
}
