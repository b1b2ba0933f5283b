//! Dataset loading from the `root/{TRAIN,TEST}/{CLASS_NAME}/files` layout.

use crate::data::labels::CLASS_NAMES;
use crate::data::{ppm, LabeledImage};
use crate::error::{Error, Result};
use std::path::{Path, PathBuf};

/// The predefined dataset split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    /// Directory name under the dataset root.
    pub fn dir_name(&self) -> &'static str {
        match self {
            Split::Train => "TRAIN",
            Split::Test => "TEST",
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// True when the split directory exists under `root`.
pub fn split_exists(root: &Path, split: Split) -> bool {
    root.join(split.dir_name()).is_dir()
}

/// Load every image of one split, ordered lexicographically by path.
///
/// Class labels come from the directory names, which must belong to the
/// dataset vocabulary. Every regular file inside a class directory must
/// decode; an unreadable or unsupported file is an ingestion error naming
/// the path.
pub fn load_dataset(root: &Path, split: Split) -> Result<Vec<LabeledImage>> {
    let split_dir = root.join(split.dir_name());
    if !split_dir.is_dir() {
        return Err(Error::Dataset(format!(
            "split directory {} not found",
            split_dir.display()
        )));
    }

    let mut files: Vec<(PathBuf, String)> = Vec::new();
    let entries =
        std::fs::read_dir(&split_dir).map_err(|e| Error::io(split_dir.display().to_string(), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(split_dir.display().to_string(), e))?;
        let class_dir = entry.path();
        if !class_dir.is_dir() {
            continue; // stray files at the split level are not class data
        }
        let class_name = class_dir
            .file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_default();
        if !CLASS_NAMES.contains(&class_name.as_str()) {
            return Err(Error::Label(format!(
                "unknown class directory '{class_name}' in {}",
                split_dir.display()
            )));
        }
        let class_entries = std::fs::read_dir(&class_dir)
            .map_err(|e| Error::io(class_dir.display().to_string(), e))?;
        for file in class_entries {
            let file = file.map_err(|e| Error::io(class_dir.display().to_string(), e))?;
            let path = file.path();
            if path.is_file() {
                files.push((path, class_name.clone()));
            }
        }
    }

    files.sort_by(|a, b| a.0.cmp(&b.0));

    let mut images = Vec::with_capacity(files.len());
    for (path, label) in files {
        let pixels = decode_file(&path)?;
        images.push(LabeledImage {
            pixels,
            label,
            path,
        });
    }
    if images.is_empty() {
        return Err(Error::Dataset(format!(
            "split {} under {} contains no images",
            split.dir_name(),
            root.display()
        )));
    }
    Ok(images)
}

fn decode_file(path: &Path) -> Result<crate::tensor::Tensor> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "ppm" => ppm::decode(&bytes).map_err(|reason| Error::Ingestion {
            path: path.to_path_buf(),
            reason,
        }),
        #[cfg(feature = "image-formats")]
        "jpg" | "jpeg" | "png" => decode_via_image_crate(path, &bytes),
        other => Err(Error::Ingestion {
            path: path.to_path_buf(),
            reason: if other.is_empty() {
                "file has no extension; expected a .ppm raster".into()
            } else {
                format!(
                    "unsupported format '.{other}'; native support covers .ppm \
                     (enable the image-formats feature for jpeg/png)"
                )
            },
        }),
    }
}

#[cfg(feature = "image-formats")]
fn decode_via_image_crate(path: &Path, bytes: &[u8]) -> Result<crate::tensor::Tensor> {
    let img = image::load_from_memory(bytes)
        .map_err(|e| Error::Ingestion {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.as_raw().iter().map(|&b| b as f64 / 255.0).collect();
    crate::tensor::Tensor::new(&[h, w, 3], data)
}
