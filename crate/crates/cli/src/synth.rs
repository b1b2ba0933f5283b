//! Synthetic PPM datasets for desk-scale runs and tests.
//!
//! Each class gets a distinctive row-wise intensity wave (class-specific
//! frequency and phase down the image rows) plus per-pixel noise, so the
//! sequence of rows carries the class signal. Images are written in the
//! standard `root/{TRAIN,TEST}/{CLASS}/*.ppm` layout.

use hcrn_core::data::{ppm, CLASS_NAMES};
use hcrn_core::error::{Error, Result};
use hcrn_core::rng::{derive_seed, Rng};
use hcrn_core::tensor::Tensor;
use std::path::Path;

#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub per_class_train: usize,
    pub per_class_test: usize,
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    /// Uniform pixel noise amplitude added to the class wave.
    pub noise: f64,
}

/// Row-pattern intensity for a class: a sine down the rows with a
/// class-specific frequency and phase.
fn class_wave(class_idx: usize, row: usize, height: usize) -> f64 {
    let freq = (class_idx + 1) as f64;
    let phase = class_idx as f64 * std::f64::consts::FRAC_PI_2;
    let t = row as f64 / height as f64;
    0.5 + 0.35 * (2.0 * std::f64::consts::PI * freq * t + phase).sin()
}

/// One synthetic image of a class.
pub fn synth_image(spec: &SynthSpec, class_idx: usize, image_seed: u64) -> Tensor {
    let mut rng = Rng::new(image_seed);
    let (h, w) = (spec.height, spec.width);
    let mut data = vec![0.0; h * w * 3];
    for y in 0..h {
        let base = class_wave(class_idx, y, h);
        for x in 0..w {
            let v = (base + rng.uniform(-spec.noise, spec.noise)).clamp(0.0, 1.0);
            for c in 0..3 {
                data[(y * w + x) * 3 + c] = v;
            }
        }
    }
    Tensor::new(&[h, w, 3], data).expect("valid image shape")
}

/// Write the full synthetic dataset tree under `root`.
pub fn write_synthetic_dataset(root: &Path, spec: &SynthSpec) -> Result<()> {
    for (split_idx, (split, count)) in [
        ("TRAIN", spec.per_class_train),
        ("TEST", spec.per_class_test),
    ]
    .iter()
    .enumerate()
    {
        if *count == 0 {
            continue; // a zero-image split is absent, not empty
        }
        for (class_idx, class) in CLASS_NAMES.iter().enumerate() {
            let dir = root.join(split).join(class);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
            for i in 0..*count {
                let image_seed = derive_seed(
                    spec.seed,
                    (split_idx * CLASS_NAMES.len() + class_idx) as u64,
                    i as u64,
                );
                let img = synth_image(spec, class_idx, image_seed);
                let bytes = ppm::encode(&img)
                    .map_err(|reason| Error::Config(format!("ppm encode failed: {reason}")))?;
                let path = dir.join(format!("img{i:04}.ppm"));
                std::fs::write(&path, bytes)
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
            }
        }
    }
    Ok(())
}
