//! Binary PPM (P6) decoding and encoding, 8-bit, maxval 255.
//!
//! The parser accepts `#` comments and arbitrary whitespace between header
//! tokens, per the format's canonical definition. Raw decode errors carry a
//! plain reason string; the dataset loader attaches the file path.

use crate::tensor::Tensor;

/// Decode a P6 buffer into an `[H x W x 3]` tensor of reals in `[0, 1]`
/// (a byte `v` maps to `v / 255`).
pub fn decode(bytes: &[u8]) -> Result<Tensor, String> {
    let mut pos = 0usize;
    if bytes.len() < 2 || &bytes[0..2] != b"P6" {
        return Err("missing P6 magic".into());
    }
    pos += 2;

    let width = read_header_int(bytes, &mut pos)?;
    let height = read_header_int(bytes, &mut pos)?;
    let maxval = read_header_int(bytes, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(format!("degenerate dimensions {width}x{height}"));
    }
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}, expected 255"));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err("header not terminated by whitespace".into()),
    }

    let needed = width * height * 3;
    let raster = bytes.get(pos..pos + needed).ok_or_else(|| {
        format!(
            "raster truncated: need {needed} bytes, have {}",
            bytes.len() - pos
        )
    })?;
    let data = raster.iter().map(|&b| b as f64 / 255.0).collect();
    Tensor::new(&[height, width, 3], data).map_err(|e| e.to_string())
}

/// Encode an `[H x W x 3]` tensor of reals in `[0, 1]` as a P6 buffer.
/// Values are scaled by 255, rounded to nearest, and clamped.
pub fn encode(img: &Tensor) -> Result<Vec<u8>, String> {
    if img.rank() != 3 || img.shape()[2] != 3 {
        return Err(format!(
            "expected [H x W x 3] pixels, got {:?}",
            img.shape()
        ));
    }
    let (h, w) = (img.shape()[0], img.shape()[1]);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(h * w * 3);
    for &v in img.data() {
        out.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
    }
    Ok(out)
}

fn read_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize, String> {
    skip_whitespace_and_comments(bytes, pos);
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return Err("expected an unsigned integer in the header".into());
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| "header integer out of range".into())
}

fn skip_whitespace_and_comments(bytes: &[u8], pos: &mut usize) {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_bytes() {
        let img = Tensor::new(
            &[2, 2, 3],
            vec![
                0.0, 0.5, 1.0, 0.25, 0.75, 0.1, //
                1.0, 0.0, 0.5, 0.2, 0.4, 0.6,
            ],
        )
        .unwrap();
        let bytes = encode(&img).unwrap();
        let back = decode(&bytes).unwrap();
        let again = encode(&back).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn normalization_endpoints() {
        let bytes = b"P6\n1 1\n255\n\xff\x00\x80".to_vec();
        let img = decode(&bytes).unwrap();
        assert_eq!(img.data()[0], 1.0);
        assert_eq!(img.data()[1], 0.0);
        assert_eq!(img.data()[2], 128.0 / 255.0);
    }

    #[test]
    fn comments_in_header_are_skipped() {
        let bytes = b"P6\n# made by hand\n2 1\n# another\n255\n\x01\x02\x03\x04\x05\x06".to_vec();
        let img = decode(&bytes).unwrap();
        assert_eq!(img.shape(), &[1, 2, 3]);
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(decode(b"P5\n1 1\n255\n\x00").is_err());
        assert!(decode(b"").is_err());
    }

    #[test]
    fn truncated_raster_rejected() {
        let err = decode(b"P6\n2 2\n255\n\x00\x01").unwrap_err();
        assert!(err.contains("truncated"), "{err}");
    }

    #[test]
    fn wrong_maxval_rejected() {
        assert!(decode(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00").is_err());
    }
}
