//! Synthetic signal generators, IDX (MNIST) ingestion and the image settings
//! used for the transform-invariance experiments.
//!
//! Every generator draws its per-sample parameters first and its noise
//! second, from a single stream, so a seed fully determines a dataset.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::array::{Sample, Shape};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::transforms::TransformFamily;

pub const NOISE_SCALE: f64 = 0.2;

/// Parameters of `0.6 sin(2 pi alpha (x + t0)) + 0.4 cos(2 pi beta (x + t0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationParams {
    pub alpha: f64,
    pub beta: f64,
    pub t0: f64,
}

impl OscillationParams {
    pub fn draw(rng: &mut Rng) -> Self {
        OscillationParams {
            alpha: uniform(rng, 8.0, 12.0),
            beta: uniform(rng, 13.0, 30.0),
            t0: uniform(rng, 0.0, 1.0),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        0.6 * (TAU * self.alpha * (x + self.t0)).sin()
            + 0.4 * (TAU * self.beta * (x + self.t0)).cos()
    }
}

/// Parameters of `alpha * max(3 - 4 (x - t0)^2 / width^2, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeParams {
    pub t0: f64,
    pub alpha: f64,
    pub width: f64,
}

impl SpikeParams {
    pub fn draw(rng: &mut Rng) -> Self {
        SpikeParams {
            t0: uniform(rng, 0.0, 1.0),
            alpha: uniform(rng, 0.5, 2.5),
            width: uniform(rng, 0.05, 0.1),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.t0;
        self.alpha * (3.0 - 4.0 * d * d / (self.width * self.width)).max(0.0)
    }
}

fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    rng.uniform(lo, hi).expect("constant bounds are ordered")
}

/// `f(t / T) + noise_scale * eps_t` for `t = 1..=T`.
pub fn sample_signal(
    f: impl Fn(f64) -> f64,
    len: usize,
    noise_scale: f64,
    rng: &mut Rng,
) -> Sample {
    assert!(len >= 1, "series length must be at least 1");
    let data = (1..=len)
        .map(|t| f(t as f64 / len as f64))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|v| v + noise_scale * rng.normal())
        .collect();
    Sample::from_parts(Shape::D1(len), data)
}

pub fn gen_oscillation(rng: &mut Rng, len: usize) -> Sample {
    let p = OscillationParams::draw(rng);
    sample_signal(|x| p.eval(x), len, NOISE_SCALE, rng)
}

pub fn gen_spike(rng: &mut Rng, len: usize) -> Sample {
    let p = SpikeParams::draw(rng);
    sample_signal(|x| p.eval(x), len, NOISE_SCALE, rng)
}

pub fn gen_noise(rng: &mut Rng, len: usize) -> Sample {
    sample_signal(|_| 0.0, len, NOISE_SCALE, rng)
}

/// Each sample contains a spike with probability `p_spike` (label 1),
/// otherwise it is white noise (label 0).
pub fn gen_spike_mixture(
    rng: &mut Rng,
    count: usize,
    len: usize,
    p_spike: f64,
) -> (Vec<Sample>, Vec<u8>) {
    let mut samples = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        if rng.next_f64() < p_spike {
            samples.push(gen_spike(rng, len));
            labels.push(1);
        } else {
            samples.push(gen_noise(rng, len));
            labels.push(0);
        }
    }
    (samples, labels)
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq)]
pub struct MnistDataset {
    /// Images scaled to `[0, 1]`.
    pub images: Vec<Sample>,
    pub labels: Vec<u8>,
}

impl MnistDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn take(&self, range: std::ops::Range<usize>) -> MnistDataset {
        MnistDataset {
            images: self.images[range.clone()].to_vec(),
            labels: self.labels[range].to_vec(),
        }
    }
}

fn be_u32(bytes: &[u8], at: usize, what: &'static str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::Truncated {
            what,
            expected: at + 4,
            actual: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], magic: u32, what: &'static str) -> Result<()> {
    let found = be_u32(bytes, 0, what)?;
    if found != magic {
        return Err(Error::BadMagic {
            what,
            expected: magic.to_be_bytes().to_vec(),
            actual: found.to_be_bytes().to_vec(),
        });
    }
    Ok(())
}

/// Parses an IDX3 unsigned-byte image file.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Sample>> {
    const WHAT: &str = "IDX image file";
    check_magic(bytes, IDX_IMAGES_MAGIC, WHAT)?;
    let count = be_u32(bytes, 4, WHAT)? as usize;
    let rows = be_u32(bytes, 8, WHAT)? as usize;
    let cols = be_u32(bytes, 12, WHAT)? as usize;
    let pixels = rows * cols;
    let expected = 16 + count * pixels;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            what: WHAT,
            expected,
            actual: bytes.len(),
        });
    }
    Ok(bytes[16..expected]
        .chunks_exact(pixels.max(1))
        .take(count)
        .map(|px| {
            Sample::from_parts(
                Shape::D2(rows, cols),
                px.iter().map(|&p| p as f64 / 255.0).collect(),
            )
        })
        .collect())
}

/// Parses an IDX1 unsigned-byte label file.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    const WHAT: &str = "IDX label file";
    check_magic(bytes, IDX_LABELS_MAGIC, WHAT)?;
    let count = be_u32(bytes, 4, WHAT)? as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            what: WHAT,
            expected,
            actual: bytes.len(),
        });
    }
    Ok(bytes[8..expected].to_vec())
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<MnistDataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = parse_idx_images(&fs::read(ip).map_err(|e| Error::io(ip, e))?)?;
    let labels = parse_idx_labels(&fs::read(lp).map_err(|e| Error::io(lp, e))?)?;
    if images.len() != labels.len() {
        return Err(Error::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    Ok(MnistDataset { images, labels })
}

/// Encodes 8-bit images as an IDX3 file.
pub fn encode_idx_images(rows: usize, cols: usize, images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    out.extend(IDX_IMAGES_MAGIC.to_be_bytes());
    out.extend((images.len() as u32).to_be_bytes());
    out.extend((rows as u32).to_be_bytes());
    out.extend((cols as u32).to_be_bytes());
    for img in images {
        assert_eq!(img.len(), rows * cols, "image size");
        out.extend_from_slice(img);
    }
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend(IDX_LABELS_MAGIC.to_be_bytes());
    out.extend((labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// The four MNIST transform settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MnistSetting {
    /// (i) random 16x16 sub-image.
    #[serde(rename = "i")]
    Crop16,
    /// (ii) unchanged.
    #[serde(rename = "ii")]
    Original,
    /// (iii) placed at a random position in a zero 56x56 canvas.
    #[serde(rename = "iii")]
    Embed56,
    /// (iv) rotated by a random multiple of pi/10.
    #[serde(rename = "iv")]
    Rotate,
}

impl FromStr for MnistSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(MnistSetting::Crop16),
            "ii" => Ok(MnistSetting::Original),
            "iii" => Ok(MnistSetting::Embed56),
            "iv" => Ok(MnistSetting::Rotate),
            other => Err(Error::InvalidArgument(format!(
                "unknown MNIST setting {other:?} (expected i, ii, iii or iv)"
            ))),
        }
    }
}

impl MnistSetting {
    pub fn output_shape(&self, input: Shape) -> Shape {
        match self {
            MnistSetting::Crop16 => Shape::D2(16, 16),
            MnistSetting::Original | MnistSetting::Rotate => input,
            MnistSetting::Embed56 => Shape::D2(56, 56),
        }
    }
}

/// Crops `(h, w)` starting at `(top, left)`.
pub fn crop(image: &Sample, top: usize, left: usize, h: usize, w: usize) -> Result<Sample> {
    let (rows, cols) = image.shape().rows_cols();
    if top + h > rows || left + w > cols {
        return Err(Error::InvalidArgument(format!(
            "crop {h}x{w} at ({top}, {left}) exceeds {rows}x{cols}"
        )));
    }
    let src = image.as_slice();
    let mut out = Vec::with_capacity(h * w);
    for r in top..top + h {
        out.extend_from_slice(&src[r * cols + left..r * cols + left + w]);
    }
    Ok(Sample::from_parts(Shape::D2(h, w), out))
}

/// Places `image` at `(top, left)` inside a zero `(h, w)` canvas.
pub fn embed(image: &Sample, top: usize, left: usize, h: usize, w: usize) -> Result<Sample> {
    let (rows, cols) = image.shape().rows_cols();
    if top + rows > h || left + cols > w {
        return Err(Error::InvalidArgument(format!(
            "{rows}x{cols} image at ({top}, {left}) does not fit in {h}x{w}"
        )));
    }
    let mut out = vec![0.0; h * w];
    for r in 0..rows {
        out[(top + r) * w + left..][..cols].copy_from_slice(&image.as_slice()[r * cols..][..cols]);
    }
    Ok(Sample::from_parts(Shape::D2(h, w), out))
}

/// Applies `setting` to every image. Labels are unchanged.
pub fn mnist_setting(images: &[Sample], setting: MnistSetting, rng: &mut Rng) -> Result<Vec<Sample>> {
    let mut rotations: Option<TransformFamily> = None;
    images
        .iter()
        .map(|img| {
            let (rows, cols) = img.shape().rows_cols();
            match setting {
                MnistSetting::Original => Ok(img.clone()),
                MnistSetting::Crop16 => {
                    let top = rng.below(rows.saturating_sub(16) + 1);
                    let left = rng.below(cols.saturating_sub(16) + 1);
                    crop(img, top, left, 16, 16)
                }
                MnistSetting::Embed56 => {
                    let top = rng.below(56usize.saturating_sub(rows) + 1);
                    let left = rng.below(56usize.saturating_sub(cols) + 1);
                    embed(img, top, left, 56, 56)
                }
                MnistSetting::Rotate => {
                    let family = match &rotations {
                        Some(f) if f.sample_shape() == img.shape() => f,
                        _ => rotations.insert(TransformFamily::rotation_default((rows, cols))?),
                    };
                    let j = rng.below(family.size());
                    family.apply(j, img)
                }
            }
        })
        .collect()
}

/// `1` where `label == positive`, else `0`.
pub fn one_vs_rest(labels: &[u8], positive: u8) -> Vec<u8> {
    labels.iter().map(|&l| u8::from(l == positive)).collect()
}
