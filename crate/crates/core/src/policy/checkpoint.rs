//! Checkpoint files: one JSON metadata line, the little-endian `f32`
//! parameter blob in declared order, then a little-endian CRC32 of every
//! preceding byte.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Horizons, NoiseSchedule, Normalizer, PolicyCheckpoint, PolicyKind, TrainMeta};
use crate::error::{Error, Result};
use crate::nn::{Mlp, ParameterStore};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format_version: u32,
    kind: PolicyKind,
    dims: Vec<usize>,
    tensors: Vec<(String, Vec<usize>)>,
    alpha_bar: Vec<f64>,
    normalizer: Normalizer,
    horizons: Horizons,
    inference_steps: usize,
    time_embed_dim: usize,
    clip_sample: bool,
    meta: TrainMeta,
}

pub fn write_checkpoint_bytes(ckpt: &PolicyCheckpoint) -> Result<Vec<u8>> {
    ckpt.validate()?;
    let header = Header {
        format_version: CHECKPOINT_VERSION,
        kind: ckpt.kind,
        dims: ckpt.net.dims().to_vec(),
        tensors: ckpt.params.layout(),
        alpha_bar: ckpt.schedule.values().to_vec(),
        normalizer: ckpt.normalizer.clone(),
        horizons: ckpt.horizons,
        inference_steps: ckpt.inference_steps,
        time_embed_dim: ckpt.time_embed_dim,
        clip_sample: ckpt.clip_sample,
        meta: ckpt.meta.clone(),
    };
    let mut out = serde_json::to_vec(&header).map_err(|e| Error::format("header", e.to_string()))?;
    out.push(b'\n');
    out.extend(ckpt.params.to_le_bytes());
    let crc = crc32fast::hash(&out);
    out.extend(crc.to_le_bytes());
    Ok(out)
}

pub fn read_checkpoint_bytes(bytes: &[u8]) -> Result<PolicyCheckpoint> {
    if bytes.len() < 4 {
        return Err(Error::format("trailer", "checkpoint truncated"));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes([trailer[0], trailer[1], trailer[2], trailer[3]]);
    if crc32fast::hash(body) != stored {
        return Err(Error::format("trailer", "checkpoint checksum mismatch (truncated or corrupted)"));
    }
    let nl = body
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format("header", "missing metadata line"))?;
    let value: serde_json::Value =
        serde_json::from_slice(&body[..nl]).map_err(|e| Error::format("header", e.to_string()))?;
    let version = value.get("format_version").and_then(|v| v.as_u64());
    if version != Some(CHECKPOINT_VERSION as u64) {
        return Err(Error::Version {
            record: "header".into(),
            msg: format!("unsupported checkpoint version {version:?}"),
        });
    }
    let header: Header = serde_json::from_value(value).map_err(|e| Error::Version {
        record: "header".into(),
        msg: e.to_string(),
    })?;
    let net = Mlp::new(header.dims)?;
    if net.layout() != header.tensors {
        return Err(Error::format("header", "tensor layout does not match the declared network"));
    }
    let params = ParameterStore::<f32>::from_le_bytes(&header.tensors, &body[nl + 1..])
        .map_err(|e| Error::format("blob", e.to_string()))?;
    let ckpt = PolicyCheckpoint {
        kind: header.kind,
        net,
        params,
        schedule: NoiseSchedule::from_alpha_bar(header.alpha_bar)?,
        normalizer: header.normalizer,
        horizons: header.horizons,
        inference_steps: header.inference_steps,
        time_embed_dim: header.time_embed_dim,
        clip_sample: header.clip_sample,
        meta: header.meta,
    };
    ckpt.validate()?;
    Ok(ckpt)
}

pub fn write_checkpoint(ckpt: &PolicyCheckpoint, path: &Path) -> Result<()> {
    let bytes = write_checkpoint_bytes(ckpt)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<PolicyCheckpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint_bytes(&bytes)
}
