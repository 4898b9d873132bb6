//! Binary containers for fitted models (`GTPC1`) and datasets (`GTDS1`).
//!
//! Both start with an 8-byte magic, followed by a single-line JSON header
//! and a little-endian `f32` payload in row-major order. Values are stored
//! in single precision, so a save/load cycle rounds to the nearest `f32`
//! and a second cycle is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array::{Sample, Shape};
use crate::error::{Error, Result};
use crate::model::GtpcModel;
use crate::transforms::{FamilyKind, TransformFamily};

pub const MODEL_MAGIC: &[u8; 8] = b"GTPCA\x00v1";
pub const DATASET_MAGIC: &[u8; 8] = b"GTDS\x00\x00v1";

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    kind: FamilyKind,
    weight_shape: Vec<usize>,
    sample_shape: Vec<usize>,
    components: usize,
    #[serde(default)]
    angles: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetHeader {
    count: usize,
    shape: Vec<usize>,
    has_labels: bool,
}

/// A persisted collection of equally shaped samples with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub labels: Option<Vec<u8>>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, labels: Option<Vec<u8>>) -> Result<Self> {
        if let Some(first) = samples.first() {
            if let Some(bad) = samples.iter().find(|s| s.shape() != first.shape()) {
                return Err(Error::ShapeMismatch {
                    expected: first.shape(),
                    actual: bad.shape(),
                });
            }
        }
        if let Some(l) = &labels {
            if l.len() != samples.len() {
                return Err(Error::CountMismatch {
                    images: samples.len(),
                    labels: l.len(),
                });
            }
        }
        Ok(Dataset { samples, labels })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn shape(&self) -> Option<Shape> {
        self.samples.first().map(Sample::shape)
    }
}

fn push_f32(out: &mut Vec<u8>, values: &[f64]) {
    for &v in values {
        out.extend((v as f32).to_le_bytes());
    }
}

fn read_f32(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect()
}

fn write_header<H: Serialize>(out: &mut Vec<u8>, magic: &[u8; 8], header: &H) {
    out.extend_from_slice(magic);
    out.extend(serde_json::to_vec(header).expect("header serializes"));
    out.push(b'\n');
}

/// Splits `bytes` into the parsed header and the payload that follows it.
fn read_header<'a, H: for<'de> Deserialize<'de>>(
    bytes: &'a [u8],
    magic: &[u8; 8],
    what: &'static str,
) -> Result<(H, &'a [u8])> {
    let found = bytes.get(..8).ok_or(Error::Truncated {
        what,
        expected: 8,
        actual: bytes.len(),
    })?;
    if found != magic {
        return Err(Error::BadMagic {
            what,
            expected: magic.to_vec(),
            actual: found.to_vec(),
        });
    }
    let rest = &bytes[8..];
    let end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Header(format!("{what}: header is not newline-terminated")))?;
    let header = serde_json::from_slice(&rest[..end])
        .map_err(|e| Error::Header(format!("{what}: {e}")))?;
    Ok((header, &rest[end + 1..]))
}

fn check_payload(what: &'static str, payload: &[u8], values: usize) -> Result<()> {
    let expected = values * 4;
    if payload.len() != expected {
        return Err(Error::Truncated {
            what,
            expected,
            actual: payload.len(),
        });
    }
    Ok(())
}

pub fn encode_model(model: &GtpcModel) -> Vec<u8> {
    let family = model.family();
    let header = ModelHeader {
        kind: family.kind(),
        weight_shape: family.weight_shape().dims(),
        sample_shape: family.sample_shape().dims(),
        components: model.len(),
        angles: family.angles().to_vec(),
    };
    let mut out = Vec::new();
    write_header(&mut out, MODEL_MAGIC, &header);
    for c in model.components() {
        push_f32(&mut out, c.weight.as_slice());
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<GtpcModel> {
    const WHAT: &str = "GTPC1 model";
    let (header, payload): (ModelHeader, _) = read_header(bytes, MODEL_MAGIC, WHAT)?;
    let weight_shape = Shape::from_dims(&header.weight_shape)?;
    let sample_shape = Shape::from_dims(&header.sample_shape)?;
    let family = TransformFamily::build(header.kind, weight_shape, sample_shape, header.angles)?;
    let per = weight_shape.len();
    check_payload(WHAT, payload, header.components * per)?;
    let values = read_f32(payload);
    let weights = values
        .chunks_exact(per)
        .map(|w| Sample::new(weight_shape, w.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    GtpcModel::from_weights(family, weights)
}

pub fn encode_dataset(data: &Dataset) -> Vec<u8> {
    let header = DatasetHeader {
        count: data.len(),
        shape: data.shape().map(|s| s.dims()).unwrap_or_default(),
        has_labels: data.labels.is_some(),
    };
    let mut out = Vec::new();
    write_header(&mut out, DATASET_MAGIC, &header);
    for s in &data.samples {
        push_f32(&mut out, s.as_slice());
    }
    if let Some(labels) = &data.labels {
        out.extend_from_slice(labels);
    }
    out
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    const WHAT: &str = "GTDS1 dataset";
    let (header, payload): (DatasetHeader, _) = read_header(bytes, DATASET_MAGIC, WHAT)?;
    if header.count == 0 {
        let labels = header.has_labels.then(Vec::new);
        return Dataset::new(Vec::new(), labels);
    }
    let shape = Shape::from_dims(&header.shape)?;
    let values = header.count * shape.len();
    let label_bytes = if header.has_labels { header.count } else { 0 };
    let expected = values * 4 + label_bytes;
    if payload.len() != expected {
        return Err(Error::Truncated {
            what: WHAT,
            expected,
            actual: payload.len(),
        });
    }
    let (floats, labels) = payload.split_at(values * 4);
    let samples = read_f32(floats)
        .chunks_exact(shape.len())
        .map(|s| Sample::new(shape, s.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(samples, header.has_labels.then(|| labels.to_vec()))
}

pub fn save_model(model: &GtpcModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<GtpcModel> {
    let path = path.as_ref();
    decode_model(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn save_dataset(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_dataset(data)).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    decode_dataset(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
