//! Line-oriented dataset container.
//!
//! ```text
//! {"format_version":1,"paradigm":"move",...}          header
//! {"seed":..,"config":{..},..,"observations":[..]}    one line per trajectory
//! 1234567890                                          CRC32 of all bytes above
//! ```
//!
//! Observation and action arrays are written with 9 significant digits,
//! which round-trips every `f32` exactly.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, GenerationStats, Paradigm, Sampling, Trajectory};
use crate::error::{Error, Result};
use crate::motion::AugmentationSchedule;
use crate::world::{RandomizationLevel, SpatialConfig, ACTION_DIM, OBS_DIM};

pub const FORMAT_VERSION: u32 = 1;

const HEADER_FIELDS: [&str; 10] = [
    "format_version",
    "paradigm",
    "sampling",
    "level",
    "budget",
    "total_timesteps",
    "seed",
    "world_config_digest",
    "attempts",
    "failures",
];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format_version: u32,
    paradigm: String,
    sampling: String,
    level: u8,
    budget: u64,
    total_timesteps: u64,
    seed: u64,
    world_config_digest: String,
    attempts: u64,
    failures: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordMeta {
    seed: u64,
    paradigm: String,
    retries: u32,
    length: usize,
    config: SpatialConfig,
    schedule: AugmentationSchedule,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    seed: u64,
    paradigm: String,
    retries: u32,
    length: usize,
    config: SpatialConfig,
    schedule: AugmentationSchedule,
    observations: Vec<f64>,
    actions: Vec<f64>,
}

fn push_array(out: &mut String, values: impl Iterator<Item = f32>) {
    out.push('[');
    for (i, v) in values.enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{v:.8e}").expect("write to string");
    }
    out.push(']');
}

/// Serializes `dataset` into the container format.
pub fn write_dataset_bytes(dataset: &Dataset) -> Result<Vec<u8>> {
    let header = Header {
        format_version: FORMAT_VERSION,
        paradigm: dataset.paradigm.name().to_string(),
        sampling: dataset.sampling.name().to_string(),
        level: dataset.level.index(),
        budget: dataset.budget,
        total_timesteps: dataset.total_timesteps(),
        seed: dataset.seed,
        world_config_digest: dataset.world_config_digest.clone(),
        attempts: dataset.stats.attempts,
        failures: dataset.stats.failures,
    };
    let mut out = serde_json::to_string(&header).map_err(|e| Error::format("header", e.to_string()))?;
    out.push('\n');
    for (i, t) in dataset.trajectories.iter().enumerate() {
        if t.is_empty() || t.actions.len() != t.len() {
            return Err(Error::format(
                format!("trajectory {i}"),
                "trajectory must have one action per observation and at least one step",
            ));
        }
        let meta = RecordMeta {
            seed: t.seed,
            paradigm: t.paradigm.name().to_string(),
            retries: t.retries,
            length: t.len(),
            config: t.config,
            schedule: t.schedule,
        };
        let mut line = serde_json::to_string(&meta).map_err(|e| Error::format(format!("trajectory {i}"), e.to_string()))?;
        line.pop(); // closing brace
        line.push_str(",\"observations\":");
        push_array(&mut line, t.observations.iter().flatten().copied());
        line.push_str(",\"actions\":");
        push_array(&mut line, t.actions.iter().flatten().copied());
        line.push_str("}\n");
        out.push_str(&line);
    }
    let crc = crc32fast::hash(out.as_bytes());
    writeln!(out, "{crc}").expect("write to string");
    Ok(out.into_bytes())
}

pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = write_dataset_bytes(dataset)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_dataset_bytes(&bytes)
}

fn parse_header(line: &str) -> Result<Header> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| Error::format("header", format!("not a JSON object: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::format("header", "not a JSON object"))?;
    let version = obj
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::format("header", "missing format_version"))?;
    if version != FORMAT_VERSION as u64 {
        return Err(Error::Version {
            record: "header".into(),
            msg: format!("format_version {version} is not supported (expected {FORMAT_VERSION})"),
        });
    }
    if let Some(unknown) = obj.keys().find(|k| !HEADER_FIELDS.contains(&k.as_str())) {
        return Err(Error::Version {
            record: "header".into(),
            msg: format!("field '{unknown}' is not part of format_version {FORMAT_VERSION}"),
        });
    }
    serde_json::from_value(value).map_err(|e| Error::format("header", e.to_string()))
}

fn to_rows<const N: usize>(flat: &[f64], length: usize, what: &str, record: &str) -> Result<Vec<[f32; N]>> {
    if flat.len() != length * N {
        return Err(Error::format(
            record,
            format!("{what} has {} values, expected {length} x {N}", flat.len()),
        ));
    }
    Ok(flat
        .chunks_exact(N)
        .map(|c| std::array::from_fn(|i| c[i] as f32))
        .collect())
}

/// Parses a container, verifying the checksum before anything else.
pub fn read_dataset_bytes(bytes: &[u8]) -> Result<Dataset> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::format("file", "not valid UTF-8"))?;
    let body_end = text
        .strip_suffix('\n')
        .ok_or_else(|| Error::format("checksum", "file does not end with a newline (truncated?)"))?;
    let crc_start = body_end.rfind('\n').map(|i| i + 1).unwrap_or(0);
    let crc_line = &body_end[crc_start..];
    let expected: u32 = crc_line
        .parse()
        .map_err(|_| Error::format("checksum", format!("last line '{crc_line}' is not a decimal CRC32 (truncated?)")))?;
    let body = &text[..crc_start];
    let actual = crc32fast::hash(body.as_bytes());
    if actual != expected {
        return Err(Error::format(
            "checksum",
            format!("CRC32 mismatch: file says {expected}, content hashes to {actual}"),
        ));
    }

    let mut lines = body.lines();
    let header = parse_header(lines.next().ok_or_else(|| Error::format("header", "missing header line"))?)?;
    let paradigm: Paradigm = header.paradigm.parse().map_err(|e: Error| Error::format("header", e.to_string()))?;
    let sampling: Sampling = header.sampling.parse().map_err(|e: Error| Error::format("header", e.to_string()))?;
    let level = RandomizationLevel::from_index(header.level).map_err(|e| Error::format("header", e.to_string()))?;

    let mut trajectories = Vec::new();
    for (i, line) in lines.enumerate() {
        let name = format!("trajectory {i}");
        let rec: Record = serde_json::from_str(line).map_err(|e| Error::format(&name, e.to_string()))?;
        if rec.length == 0 {
            return Err(Error::format(&name, "empty trajectory"));
        }
        let observations = to_rows::<OBS_DIM>(&rec.observations, rec.length, "observations", &name)?;
        let actions = to_rows::<ACTION_DIM>(&rec.actions, rec.length, "actions", &name)?;
        trajectories.push(Trajectory {
            config: rec.config,
            schedule: rec.schedule,
            paradigm: rec.paradigm.parse().map_err(|e: Error| Error::format(&name, e.to_string()))?,
            seed: rec.seed,
            retries: rec.retries,
            observations,
            actions,
        });
    }
    let dataset = Dataset {
        paradigm,
        sampling,
        level,
        budget: header.budget,
        seed: header.seed,
        world_config_digest: header.world_config_digest,
        trajectories,
        stats: GenerationStats {
            attempts: header.attempts,
            failures: header.failures,
        },
    };
    if dataset.total_timesteps() != header.total_timesteps {
        return Err(Error::format(
            "header",
            format!(
                "total_timesteps {} disagrees with the {} steps stored",
                header.total_timesteps,
                dataset.total_timesteps()
            ),
        ));
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;

    fn tiny() -> Dataset {
        let traj = Trajectory {
            config: SpatialConfig {
                object_pos: Vec2::new(0.1, -0.2),
                object_heading: 1.0 / 3.0,
                target_pos: Vec2::new(0.2, 0.2),
                camera_angle: 0.7,
                level: RandomizationLevel::ObjectTargetCamera,
            },
            schedule: AugmentationSchedule::full(),
            paradigm: Paradigm::Move,
            seed: u64::MAX - 3,
            retries: 2,
            observations: vec![[0.1, -0.0, 1e-30, -3.4e38, 0.5, 0.25, f32::MIN_POSITIVE, 7.0, 1.0]; 2],
            actions: vec![[1.0, -1.0, 0.123_456_79]; 2],
        };
        Dataset {
            paradigm: Paradigm::Move,
            sampling: Sampling::DenseUniform,
            level: RandomizationLevel::ObjectTargetCamera,
            budget: 1000,
            seed: 5,
            world_config_digest: "deadbeef".into(),
            trajectories: vec![traj],
            stats: GenerationStats {
                attempts: 3,
                failures: 2,
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let d = tiny();
        let bytes = write_dataset_bytes(&d).unwrap();
        let back = read_dataset_bytes(&bytes).unwrap();
        assert_eq!(back, d);
        // -0.0 survives with its sign
        assert!(back.trajectories[0].observations[0][1].is_sign_negative());
        assert_eq!(write_dataset_bytes(&back).unwrap(), bytes);
    }

    #[test]
    fn truncation_is_detected() {
        let bytes = write_dataset_bytes(&tiny()).unwrap();
        for cut in [1, 5, bytes.len() / 2, bytes.len() - 1] {
            let err = read_dataset_bytes(&bytes[..bytes.len() - cut]).unwrap_err();
            assert!(matches!(err, Error::Format { .. }), "cut {cut}: {err}");
        }
    }

    #[test]
    fn bit_flip_fails_checksum() {
        let mut bytes = write_dataset_bytes(&tiny()).unwrap();
        let i = bytes.iter().position(|&b| b == b'7').unwrap();
        bytes[i] = b'8';
        let err = read_dataset_bytes(&bytes).unwrap_err();
        assert!(err.to_string().contains("checksum"), "{err}");
    }

    fn rewrite_header(bytes: &[u8], edit: impl FnOnce(&mut serde_json::Map<String, serde_json::Value>)) -> Vec<u8> {
        let text = std::str::from_utf8(bytes).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.pop();
        let mut header: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        edit(header.as_object_mut().unwrap());
        let h = header.to_string();
        lines[0] = &h;
        let mut body = lines.join("\n");
        body.push('\n');
        let crc = crc32fast::hash(body.as_bytes());
        format!("{body}{crc}\n").into_bytes()
    }

    #[test]
    fn unknown_header_field_is_a_version_error() {
        let bytes = write_dataset_bytes(&tiny()).unwrap();
        let bad = rewrite_header(&bytes, |h| {
            h.insert("compression".into(), "zstd".into());
        });
        let err = read_dataset_bytes(&bad).unwrap_err();
        assert!(matches!(err, Error::Version { .. }), "{err}");
        assert!(err.to_string().contains("compression"));
    }

    #[test]
    fn other_version_rejected() {
        let bytes = write_dataset_bytes(&tiny()).unwrap();
        let bad = rewrite_header(&bytes, |h| {
            h.insert("format_version".into(), 2.into());
        });
        assert!(matches!(read_dataset_bytes(&bad), Err(Error::Version { .. })));
    }

    #[test]
    fn inconsistent_total_rejected() {
        let bytes = write_dataset_bytes(&tiny()).unwrap();
        let bad = rewrite_header(&bytes, |h| {
            h.insert("total_timesteps".into(), 99.into());
        });
        let err = read_dataset_bytes(&bad).unwrap_err();
        assert!(err.to_string().contains("header"), "{err}");
    }
}
