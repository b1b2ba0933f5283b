//! Pixel-space transforms: bilinear resize and grayscale conversion.

use crate::data::LabeledImage;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Corner-aligned bilinear resize of `[H x W x 3]` pixels to `[out_h x out_w x 3]`.
///
/// Sample coordinates map output index `i` to `i * (in - 1) / (out - 1)`; a
/// single-element output axis samples the input center. Resizing to the
/// input size is the bit-exact identity.
pub fn resize_bilinear(img: &Tensor, out_h: usize, out_w: usize) -> Result<Tensor> {
    if img.rank() != 3 || img.shape()[2] != 3 {
        return Err(Error::Dimension(format!(
            "resize expects [H x W x 3] pixels, got {:?}",
            img.shape()
        )));
    }
    if out_h == 0 || out_w == 0 {
        return Err(Error::Dimension(format!(
            "resize target {out_h}x{out_w} is degenerate"
        )));
    }
    let (h, w) = (img.shape()[0], img.shape()[1]);
    let src = img.data();
    let mut out = vec![0.0; out_h * out_w * 3];

    let coord = |i: usize, out_len: usize, in_len: usize| -> f64 {
        if out_len == 1 {
            (in_len - 1) as f64 / 2.0
        } else {
            i as f64 * (in_len - 1) as f64 / (out_len - 1) as f64
        }
    };

    for y in 0..out_h {
        let sy = coord(y, out_h, h);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let fy = sy - y0 as f64;
        for x in 0..out_w {
            let sx = coord(x, out_w, w);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let fx = sx - x0 as f64;
            for c in 0..3 {
                let p00 = src[(y0 * w + x0) * 3 + c];
                let p01 = src[(y0 * w + x1) * 3 + c];
                let p10 = src[(y1 * w + x0) * 3 + c];
                let p11 = src[(y1 * w + x1) * 3 + c];
                let top = (1.0 - fx) * p00 + fx * p01;
                let bot = (1.0 - fx) * p10 + fx * p11;
                out[(y * out_w + x) * 3 + c] = (1.0 - fy) * top + fy * bot;
            }
        }
    }
    Tensor::new(&[out_h, out_w, 3], out)
}

/// Resize every image of a dataset to a common extent.
pub fn resize_dataset(items: Vec<LabeledImage>, h: usize, w: usize) -> Result<Vec<LabeledImage>> {
    items
        .into_iter()
        .map(|img| {
            Ok(LabeledImage {
                pixels: resize_bilinear(&img.pixels, h, w)?,
                label: img.label,
                path: img.path,
            })
        })
        .collect()
}

/// Luma weights for grayscale conversion.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// `[H x W x 3] -> [H x W]` via `0.299 R + 0.587 G + 0.114 B`.
pub fn to_grayscale(img: &Tensor) -> Result<Tensor> {
    if img.rank() != 3 || img.shape()[2] != 3 {
        return Err(Error::Dimension(format!(
            "grayscale expects [H x W x 3] pixels, got {:?}",
            img.shape()
        )));
    }
    let (h, w) = (img.shape()[0], img.shape()[1]);
    let src = img.data();
    let data = (0..h * w)
        .map(|p| LUMA[0] * src[p * 3] + LUMA[1] * src[p * 3 + 1] + LUMA[2] * src[p * 3 + 2])
        .collect();
    Tensor::new(&[h, w], data)
}
