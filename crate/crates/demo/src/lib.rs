//! Browser bindings for three interactive views:
//!
//! * fit shift-invariant components on generated spikes and reconstruct samples,
//! * the per-shift alignment curve of a sample against a component,
//! * rotate a glyph and recover the angle by scoring rotated templates.
//!
//! The session types are plain Rust so they can be tested natively; the
//! `#[wasm_bindgen]` wrappers only translate errors.

use gtpca::data::gen_spike_mixture;
use gtpca::transforms::default_angles;
use gtpca::{fit_model, FitConfig, GtpcModel, Result, Rng, Sample, Shape, TransformFamily};
use wasm_bindgen::prelude::*;

pub struct SpikeSession {
    samples: Vec<Sample>,
    labels: Vec<u8>,
    family: TransformFamily,
    model: Option<GtpcModel>,
}

impl SpikeSession {
    pub fn generate(seed: u64, count: usize, sample_len: usize, weight_len: usize) -> Result<Self> {
        if count == 0 || sample_len == 0 {
            return Err(gtpca::Error::InvalidArgument(
                "count and sample length must be positive".into(),
            ));
        }
        let (samples, labels) = gen_spike_mixture(&mut Rng::new(seed), count, sample_len, 0.5);
        Ok(SpikeSession {
            samples,
            labels,
            family: TransformFamily::shift_1d(weight_len, sample_len)?,
            model: None,
        })
    }

    /// Fits `components` components and returns the per-epoch mean objective.
    pub fn fit(&mut self, components: usize, epochs: usize, batches: usize, seed: u64) -> Result<Vec<f64>> {
        let cfg = FitConfig {
            epochs_per_component: epochs,
            batches_per_epoch: batches,
            seed,
            ..FitConfig::default()
        };
        let fit = fit_model(&self.samples, &self.family, components, &cfg)?;
        self.model = Some(fit.model);
        Ok(fit.log.iter().map(|r| r.mean_objective).collect())
    }

    fn model(&self) -> Result<&GtpcModel> {
        self.model
            .as_ref()
            .ok_or_else(|| gtpca::Error::InvalidArgument("no model fitted yet".into()))
    }

    fn get(&self, i: usize) -> Result<&Sample> {
        self.samples.get(i).ok_or_else(|| {
            gtpca::Error::InvalidArgument(format!("sample {i} out of range 0..{}", self.samples.len()))
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, i: usize) -> Result<Vec<f64>> {
        Ok(self.get(i)?.as_slice().to_vec())
    }

    pub fn has_spike(&self, i: usize) -> Result<bool> {
        self.get(i)?;
        Ok(self.labels[i] == 1)
    }

    /// Component `k` (from 1).
    pub fn component(&self, k: usize) -> Result<Vec<f64>> {
        let model = self.model()?;
        let c = k
            .checked_sub(1)
            .and_then(|j| model.components().get(j))
            .ok_or(gtpca::Error::ComponentOutOfRange {
                index: k,
                count: model.len(),
            })?;
        Ok(c.weight.as_slice().to_vec())
    }

    pub fn reconstruction(&self, i: usize, k: usize) -> Result<Vec<f64>> {
        let p = self.model()?.projector()?;
        let loadings = p.project(self.get(i)?, k)?;
        Ok(p.reconstruct(&loadings)?.into_vec())
    }

    /// Signed alignment `<r, T w_k> / ||T w_k||` across every shift, where
    /// `r` is the residual of sample `i` left by the first `k - 1` components.
    pub fn alignment_curve(&self, i: usize, k: usize) -> Result<Vec<f64>> {
        let model = self.model()?;
        let w = self.component(k)?;
        let (_, residual) = model.projector()?.project_with_residual(self.get(i)?, k - 1)?;
        let w = Sample::new(self.family.weight_shape(), w)?;
        Ok(self.family.score_all(&residual, &w)?.values)
    }

    pub fn resmse(&self, k: usize) -> Result<f64> {
        self.model()?.residual_mse(&self.samples, k)
    }
}

/// An asymmetric "F" on a `size` x `size` grid, so every rotation is distinct.
pub fn glyph(size: usize) -> Vec<f64> {
    let mut img = vec![0.0; size * size];
    let s = size as f64;
    for r in 0..size {
        for c in 0..size {
            let (y, x) = (r as f64 / s, c as f64 / s);
            let stem = (0.3..0.42).contains(&x) && (0.15..0.85).contains(&y);
            let top = (0.15..0.27).contains(&y) && (0.3..0.75).contains(&x);
            let middle = (0.45..0.55).contains(&y) && (0.3..0.62).contains(&x);
            if stem || top || middle {
                img[r * size + c] = 1.0;
            }
        }
    }
    img
}

fn square(pixels: Vec<f64>, size: usize) -> Result<Sample> {
    Sample::new(Shape::D2(size, size), pixels)
}

/// Bilinear rotation about the image center, zero fill outside.
pub fn rotate(pixels: Vec<f64>, size: usize, angle: f64) -> Result<Vec<f64>> {
    let family = TransformFamily::rotation((size, size), vec![angle])?;
    Ok(family.apply(0, &square(pixels, size)?)?.into_vec())
}

/// Squared normalized score of `image` against `template` rotated by each
/// of `steps` equally spaced angles.
pub fn rotation_scores(image: Vec<f64>, template: Vec<f64>, size: usize, steps: usize) -> Result<Vec<f64>> {
    let family = TransformFamily::rotation((size, size), default_angles(steps))?;
    let scores = family.score_all(&square(image, size)?, &square(template, size)?)?;
    Ok(scores.values.iter().map(|v| v * v).collect())
}

fn js(e: gtpca::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct SpikeDemo(SpikeSession);

#[wasm_bindgen]
impl SpikeDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, count: usize, sample_len: usize, weight_len: usize) -> Result<SpikeDemo, JsError> {
        SpikeSession::generate(seed as u64, count, sample_len, weight_len)
            .map(SpikeDemo)
            .map_err(js)
    }

    pub fn fit(&mut self, components: usize, epochs: usize, batches: usize, seed: u32) -> Result<Vec<f64>, JsError> {
        self.0.fit(components, epochs, batches, seed as u64).map_err(js)
    }

    pub fn count(&self) -> usize {
        self.0.len()
    }

    pub fn sample(&self, i: usize) -> Result<Vec<f64>, JsError> {
        self.0.sample(i).map_err(js)
    }

    #[wasm_bindgen(js_name = hasSpike)]
    pub fn has_spike(&self, i: usize) -> Result<bool, JsError> {
        self.0.has_spike(i).map_err(js)
    }

    pub fn component(&self, k: usize) -> Result<Vec<f64>, JsError> {
        self.0.component(k).map_err(js)
    }

    pub fn reconstruction(&self, i: usize, k: usize) -> Result<Vec<f64>, JsError> {
        self.0.reconstruction(i, k).map_err(js)
    }

    #[wasm_bindgen(js_name = alignmentCurve)]
    pub fn alignment_curve(&self, i: usize, k: usize) -> Result<Vec<f64>, JsError> {
        self.0.alignment_curve(i, k).map_err(js)
    }

    pub fn resmse(&self, k: usize) -> Result<f64, JsError> {
        self.0.resmse(k).map_err(js)
    }
}

#[wasm_bindgen(js_name = glyph)]
pub fn glyph_js(size: usize) -> Vec<f64> {
    glyph(size)
}

#[wasm_bindgen(js_name = rotate)]
pub fn rotate_js(pixels: Vec<f64>, size: usize, angle: f64) -> Result<Vec<f64>, JsError> {
    rotate(pixels, size, angle).map_err(js)
}

#[wasm_bindgen(js_name = rotationScores)]
pub fn rotation_scores_js(
    image: Vec<f64>,
    template: Vec<f64>,
    size: usize,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    rotation_scores(image, template, size, steps).map_err(js)
}
