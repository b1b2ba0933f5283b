//! Binary checkpoint format.
//!
//! Little-endian layout, integers are u32:
//!
//! ```text
//! magic "HCRN" | version | config_len, config bytes (key=value text)
//! | n_params | per parameter: name_len, name bytes, rank, extents[rank],
//!   f32 data[product(extents)]
//! | crc32 of every preceding byte
//! ```
//!
//! Tensor data is stored as little-endian f32 regardless of host, so
//! checkpoints are portable and save -> load -> save is byte-identical.
//! Loading verifies the trailing CRC over the whole prefix before parsing
//! anything, so no tensor is materialized from a corrupt file.

use crate::config::TrainConfig;
use hcrn_core::error::{Error, Result};
use hcrn_core::model::{graph_from_params, NetworkGraph, ParamStore};
use hcrn_core::tensor::Tensor;
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"HCRN";
pub const VERSION: u32 = 1;

/// CRC-32 (IEEE 802.3, reflected, init and final xor 0xFFFFFFFF).
pub fn crc32(bytes: &[u8]) -> u32 {
    const fn table() -> [u32; 256] {
        let mut t = [0u32; 256];
        let mut i = 0;
        while i < 256 {
            let mut c = i as u32;
            let mut k = 0;
            while k < 8 {
                c = if c & 1 != 0 {
                    0xEDB8_8320 ^ (c >> 1)
                } else {
                    c >> 1
                };
                k += 1;
            }
            t[i] = c;
            i += 1;
        }
        t
    }
    const TABLE: [u32; 256] = table();
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc = TABLE[((crc ^ b as u32) & 0xFF) as usize] ^ (crc >> 8);
    }
    crc ^ 0xFFFF_FFFF
}

/// Serialize a config + parameter store to the checkpoint byte layout.
pub fn checkpoint_bytes(config: &TrainConfig, params: &ParamStore) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());

    let config_text = config.to_key_values();
    out.extend_from_slice(&(config_text.len() as u32).to_le_bytes());
    out.extend_from_slice(config_text.as_bytes());

    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for (name, tensor) in params.iter() {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(tensor.rank() as u32).to_le_bytes());
        for &e in tensor.shape() {
            out.extend_from_slice(&(e as u32).to_le_bytes());
        }
        for &v in tensor.data() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }

    let crc = crc32(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn save_checkpoint(path: &Path, config: &TrainConfig, params: &ParamStore) -> Result<()> {
    std::fs::write(path, checkpoint_bytes(config, params))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        let slice = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::Integrity(format!("checkpoint truncated at {field}")))?;
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Parse checkpoint bytes back into the config and parameter store.
pub fn parse_checkpoint(bytes: &[u8]) -> Result<(TrainConfig, ParamStore)> {
    if bytes.len() < MAGIC.len() + 4 + 4 {
        return Err(Error::Integrity(format!(
            "checkpoint is only {} bytes, smaller than any valid file",
            bytes.len()
        )));
    }
    // checksum first: nothing else is parsed from a corrupt file
    let (payload, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes([trailer[0], trailer[1], trailer[2], trailer[3]]);
    let computed = crc32(payload);
    if stored != computed {
        return Err(Error::Integrity(format!(
            "checksum mismatch: stored {stored:#010x}, computed {computed:#010x}"
        )));
    }

    let mut r = Reader {
        bytes: payload,
        pos: 0,
    };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Integrity("bad magic, not a checkpoint file".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Integrity(format!(
            "unknown format version {version}, expected {VERSION}"
        )));
    }

    let config_len = r.u32("config length")? as usize;
    let config_text = std::str::from_utf8(r.take(config_len, "config text")?)
        .map_err(|_| Error::Integrity("config text is not valid UTF-8".into()))?;
    let config = TrainConfig::from_key_values(config_text)
        .map_err(|e| Error::Integrity(format!("embedded config is invalid: {e}")))?;

    let n_params = r.u32("parameter count")? as usize;
    let mut params = ParamStore::new();
    for i in 0..n_params {
        let name_len = r.u32("parameter name length")? as usize;
        let name = std::str::from_utf8(r.take(name_len, "parameter name")?)
            .map_err(|_| Error::Integrity(format!("parameter {i} name is not valid UTF-8")))?
            .to_string();
        let rank = r.u32("tensor rank")? as usize;
        if rank == 0 || rank > 8 {
            return Err(Error::Integrity(format!(
                "parameter '{name}' has absurd rank {rank}"
            )));
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32("tensor extent")? as usize);
        }
        let count: usize = shape.iter().product();
        if count == 0 {
            return Err(Error::Integrity(format!(
                "parameter '{name}' has a zero extent in {shape:?}"
            )));
        }
        let raw = r.take(count * 4, "tensor data")?;
        let data: Vec<f64> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        let tensor = Tensor::new(&shape, data)
            .map_err(|e| Error::Integrity(format!("parameter '{name}': {e}")))?;
        params
            .insert(&name, tensor)
            .map_err(|e| Error::Integrity(format!("parameter table: {e}")))?;
    }
    if r.pos != payload.len() {
        return Err(Error::Integrity(format!(
            "{} trailing bytes after the last parameter",
            payload.len() - r.pos
        )));
    }
    Ok((config, params))
}

pub fn load_checkpoint(path: &Path) -> Result<(TrainConfig, ParamStore)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_checkpoint(&bytes)
}

/// Load a checkpoint and rebuild the runnable graph it describes.
pub fn load_graph(path: &Path) -> Result<(TrainConfig, NetworkGraph)> {
    let (config, params) = load_checkpoint(path)?;
    let graph = graph_from_params(config.arch, config.dims, config.classes(), params)?;
    Ok((config, graph))
}
