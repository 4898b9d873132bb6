//! Transform-invariant principal components.
//!
//! Each component `v_k` maximizes the batch mean of
//! `max_T <r, T w>^2 / ||T w||^2` over the residuals `r` left by the
//! components before it. Components are fitted one at a time with Adam and
//! kept at unit norm; after each one is frozen, every residual is deflated
//! by its projection onto the best-aligning unit direction `T* v_k / ||T* v_k||`.

use crate::array::{Sample, Shape};
use crate::error::{Error, Result};
use crate::optim::{Adam, AdamConfig};
use crate::par;
use crate::rng::Rng;
use crate::transforms::{Alignment, PreparedWeight, TransformFamily, Weight, DEGENERATE_NORM};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub epochs_per_component: usize,
    pub batches_per_epoch: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Standard deviation of the Gaussian initial draw (before normalization).
    pub init_scale: f64,
    pub adam: AdamConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            epochs_per_component: 5,
            batches_per_epoch: 500,
            batch_size: 32,
            seed: 0,
            init_scale: 1.0,
            adam: AdamConfig::default(),
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs_per_component == 0 || self.batches_per_epoch == 0 || self.batch_size == 0
        {
            return Err(Error::InvalidArgument(
                "epochs, batches per epoch and batch size must be at least 1".into(),
            ));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "init_scale must be positive, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }
}

/// A fitted unit-norm component; `index` counts from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub index: usize,
    pub weight: Weight,
}

/// Compressed code of a sample under one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loading {
    pub component: usize,
    pub transform: usize,
    pub coeff: f64,
}

#[derive(Debug, Clone)]
pub struct GtpcModel {
    family: TransformFamily,
    components: Vec<Component>,
}

/// Layer objective: the best squared normalized alignment of `x` with `w`.
pub fn layer_objective(x: &Sample, w: &Weight, family: &TransformFamily) -> Result<f64> {
    Ok(family.best_alignment(x, w)?.score)
}

/// Gradient of [`layer_objective`] in `w` with the maximizing transform held fixed.
pub fn layer_gradient(x: &Sample, w: &Weight, family: &TransformFamily) -> Result<Weight> {
    let prepared = family.prepare(w)?;
    let best = prepared.best(x)?;
    if prepared.norms()[best.index] < DEGENERATE_NORM {
        return Err(Error::DegenerateWeight);
    }
    let mut grad = Sample::zeros(family.weight_shape());
    accumulate_gradient(&prepared, x, best, 1.0, grad.as_mut_slice())?;
    Ok(grad)
}

/// `acc += scale * d/dw [<x, T w>^2 / ||T w||^2]` at `T = T_best`.
///
/// With `u = T w`, `c = <x, u>` and `n = ||u||^2` the sample-domain gradient
/// is `(2c/n) x - (2c^2/n^2) u`, pulled back through the adjoint.
fn accumulate_gradient(
    prepared: &PreparedWeight<'_>,
    x: &Sample,
    best: Alignment,
    scale: f64,
    acc: &mut [f64],
) -> Result<()> {
    let norm = prepared.norms()[best.index];
    if norm < DEGENERATE_NORM {
        return Ok(());
    }
    let n = norm * norm;
    let c = best.coeff * norm;
    let mut g = prepared.transformed(best.index)?.scaled(-2.0 * c * c / (n * n));
    g.add_scaled(2.0 * c / n, x)?;
    prepared
        .family()
        .adjoint_accumulate(best.index, &g, scale, acc)
}

/// Result of fitting a single component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentFit {
    pub weight: Weight,
    /// Mean layer objective over the full data after each epoch.
    pub epoch_objectives: Vec<f64>,
}

/// Fits one component on `data` by stochastic ascent of the mean layer objective.
pub fn fit_component(
    data: &[Sample],
    family: &TransformFamily,
    cfg: &FitConfig,
    rng: &mut Rng,
) -> Result<ComponentFit> {
    fit_component_indexed(data, family, cfg, rng, 1)
}

fn fit_component_indexed(
    data: &[Sample],
    family: &TransformFamily,
    cfg: &FitConfig,
    rng: &mut Rng,
    component: usize,
) -> Result<ComponentFit> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("cannot fit on empty data".into()));
    }
    for x in data {
        if x.shape() != family.sample_shape() {
            return Err(Error::ShapeMismatch {
                expected: family.sample_shape(),
                actual: x.shape(),
            });
        }
    }

    let shape = family.weight_shape();
    let mut w = random_unit(shape, cfg.init_scale, rng);
    let mut adam = Adam::new(shape.len(), cfg.adam);
    let mut epoch_objectives = Vec::with_capacity(cfg.epochs_per_component);
    let mut batch = vec![0usize; cfg.batch_size];
    let inv_batch = 1.0 / cfg.batch_size as f64;

    for epoch in 0..cfg.epochs_per_component {
        for b in 0..cfg.batches_per_epoch {
            let batch_index = epoch * cfg.batches_per_epoch + b;
            for slot in batch.iter_mut() {
                *slot = rng.below(data.len());
            }
            let prepared = family.prepare(&w)?;
            let per_sample = par::map(&batch, |&i| -> Result<(f64, Vec<f64>)> {
                let x = &data[i];
                let best = prepared.best(x)?;
                let mut g = vec![0.0; shape.len()];
                accumulate_gradient(&prepared, x, best, 1.0, &mut g)?;
                Ok((best.score, g))
            });
            // Ordered reduction keeps results independent of thread count.
            let mut objective = 0.0;
            let mut grad = vec![0.0; shape.len()];
            for item in per_sample {
                let (score, g) = item?;
                objective += score;
                for (a, v) in grad.iter_mut().zip(&g) {
                    *a -= v * inv_batch;
                }
            }
            if !objective.is_finite() {
                return Err(Error::NonFiniteObjective {
                    component,
                    batch: batch_index,
                });
            }
            adam.step(w.as_mut_slice(), &grad)
                .map_err(|_| Error::NonFiniteObjective {
                    component,
                    batch: batch_index,
                })?;
            normalize(&mut w, component, batch_index)?;
        }
        epoch_objectives.push(mean_objective(data, family, &w)?);
    }

    Ok(ComponentFit {
        weight: w,
        epoch_objectives,
    })
}

fn random_unit(shape: Shape, scale: f64, rng: &mut Rng) -> Weight {
    loop {
        let data: Vec<f64> = (0..shape.len()).map(|_| scale * rng.normal()).collect();
        let n = crate::array::norm(&data);
        if n > 0.0 && n.is_finite() {
            return Sample::from_parts(shape, data.into_iter().map(|v| v / n).collect());
        }
    }
}

fn normalize(w: &mut Weight, component: usize, batch: usize) -> Result<()> {
    let n = w.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::NonFiniteObjective { component, batch });
    }
    for v in w.as_mut_slice() {
        *v /= n;
    }
    Ok(())
}

/// Mean layer objective of `w` over `data`.
pub fn mean_objective(data: &[Sample], family: &TransformFamily, w: &Weight) -> Result<f64> {
    let prepared = family.prepare(w)?;
    let scores = par::map(data, |x| prepared.best(x).map(|a| a.score));
    let mut total = 0.0;
    for s in scores {
        total += s?;
    }
    Ok(total / data.len() as f64)
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub component: usize,
    pub epoch: usize,
    pub mean_objective: f64,
}

#[derive(Debug, Clone)]
pub struct ModelFit {
    pub model: GtpcModel,
    pub log: Vec<EpochRecord>,
}

/// Fits `k` components sequentially, each on the residuals of its predecessors.
pub fn fit_model(
    data: &[Sample],
    family: &TransformFamily,
    k: usize,
    cfg: &FitConfig,
) -> Result<ModelFit> {
    if k == 0 {
        return Err(Error::InvalidArgument("number of components must be >= 1".into()));
    }
    let root = Rng::new(cfg.seed);
    let mut residuals = data.to_vec();
    let mut model = GtpcModel::new(family.clone());
    let mut log = Vec::with_capacity(k * cfg.epochs_per_component);
    for index in 1..=k {
        let mut rng = root.split(index as u64);
        let fit = fit_component_indexed(&residuals, family, cfg, &mut rng, index)?;
        log.extend(
            fit.epoch_objectives
                .iter()
                .enumerate()
                .map(|(e, &m)| EpochRecord {
                    component: index,
                    epoch: e + 1,
                    mean_objective: m,
                }),
        );
        let prepared = family.prepare(&fit.weight)?;
        let deflated = par::map(&residuals, |r| deflate(&prepared, r).map(|(r, _)| r));
        residuals = deflated.into_iter().collect::<Result<_>>()?;
        model.push(fit.weight)?;
    }
    Ok(ModelFit { model, log })
}

/// `r - <r, u> u` for the best-aligning unit direction `u`.
fn deflate(prepared: &PreparedWeight<'_>, r: &Sample) -> Result<(Sample, Alignment)> {
    let best = prepared.best(r)?;
    let mut out = r.clone();
    if best.coeff != 0.0 {
        let u = prepared.unit_direction(best.index)?;
        out.add_scaled(-best.coeff, &u)?;
    }
    Ok((out, best))
}

impl GtpcModel {
    pub fn new(family: TransformFamily) -> Self {
        GtpcModel {
            family,
            components: Vec::new(),
        }
    }

    pub fn from_weights(family: TransformFamily, weights: Vec<Weight>) -> Result<Self> {
        let mut model = GtpcModel::new(family);
        for w in weights {
            model.push(w)?;
        }
        Ok(model)
    }

    /// Appends a component; its index is the next in sequence.
    pub fn push(&mut self, weight: Weight) -> Result<()> {
        if weight.shape() != self.family.weight_shape() {
            return Err(Error::ShapeMismatch {
                expected: self.family.weight_shape(),
                actual: weight.shape(),
            });
        }
        self.family.prepare(&weight)?;
        self.components.push(Component {
            index: self.components.len() + 1,
            weight,
        });
        Ok(())
    }

    pub fn family(&self) -> &TransformFamily {
        &self.family
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Keeps the first `k` components.
    pub fn truncated(&self, k: usize) -> GtpcModel {
        GtpcModel {
            family: self.family.clone(),
            components: self.components[..k.min(self.len())].to_vec(),
        }
    }

    /// Caches every component's transform norms for repeated projection.
    pub fn projector(&self) -> Result<Projector<'_>> {
        let prepared = self
            .components
            .iter()
            .map(|c| self.family.prepare(&c.weight))
            .collect::<Result<_>>()?;
        Ok(Projector {
            model: self,
            prepared,
        })
    }

    pub fn project(&self, x: &Sample, k: usize) -> Result<Vec<Loading>> {
        self.projector()?.project(x, k)
    }

    pub fn reconstruct(&self, loadings: &[Loading]) -> Result<Sample> {
        self.projector()?.reconstruct(loadings)
    }

    /// Pooled residual ratio `sum ||x - proj_k x||^2 / sum ||x||^2`.
    pub fn residual_mse(&self, data: &[Sample], k: usize) -> Result<f64> {
        self.projector()?.residual_mse(data, k)
    }

    /// Per-sample `||x - proj_k x||^2 / ||x||^2`.
    pub fn residual_ratios(&self, data: &[Sample], k: usize) -> Result<Vec<f64>> {
        self.projector()?.residual_ratios(data, k)
    }
}

/// A model with every component prepared for scoring.
pub struct Projector<'a> {
    model: &'a GtpcModel,
    prepared: Vec<PreparedWeight<'a>>,
}

impl Projector<'_> {
    fn check_k(&self, k: usize) -> Result<()> {
        if k > self.prepared.len() {
            return Err(Error::ComponentOutOfRange {
                index: k,
                count: self.prepared.len(),
            });
        }
        Ok(())
    }

    /// Loadings and final residual after `k` deflation steps.
    pub fn project_with_residual(&self, x: &Sample, k: usize) -> Result<(Vec<Loading>, Sample)> {
        self.check_k(k)?;
        let mut r = x.clone();
        let mut loadings = Vec::with_capacity(k);
        for (j, prepared) in self.prepared[..k].iter().enumerate() {
            let (next, best) = deflate(prepared, &r)?;
            loadings.push(Loading {
                component: j + 1,
                transform: best.index,
                coeff: best.coeff,
            });
            r = next;
        }
        Ok((loadings, r))
    }

    pub fn project(&self, x: &Sample, k: usize) -> Result<Vec<Loading>> {
        Ok(self.project_with_residual(x, k)?.0)
    }

    pub fn reconstruct(&self, loadings: &[Loading]) -> Result<Sample> {
        let mut out = Sample::zeros(self.model.family.sample_shape());
        for l in loadings {
            let prepared = l
                .component
                .checked_sub(1)
                .and_then(|j| self.prepared.get(j))
                .ok_or(Error::ComponentOutOfRange {
                    index: l.component,
                    count: self.prepared.len(),
                })?;
            if l.transform >= self.model.family.size() {
                return Err(Error::TransformOutOfRange {
                    index: l.transform,
                    size: self.model.family.size(),
                });
            }
            if l.coeff != 0.0 {
                out.add_scaled(l.coeff, &prepared.unit_direction(l.transform)?)?;
            }
        }
        Ok(out)
    }

    /// `(||x||^2, ||x - proj_k x||^2)` per sample.
    fn energies(&self, data: &[Sample], k: usize) -> Result<Vec<(f64, f64)>> {
        self.check_k(k)?;
        let pairs = par::map(data, |x| {
            self.project_with_residual(x, k)
                .map(|(_, r)| (x.norm_sq(), r.norm_sq()))
        });
        let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
        if let Some(index) = pairs.iter().position(|&(e, _)| e == 0.0) {
            return Err(Error::ZeroNormSample { index });
        }
        Ok(pairs)
    }

    pub fn residual_mse(&self, data: &[Sample], k: usize) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::InvalidArgument("residual MSE of empty data".into()));
        }
        let pairs = self.energies(data, k)?;
        let (total, resid) = pairs
            .iter()
            .fold((0.0, 0.0), |(t, r), &(e, q)| (t + e, r + q));
        Ok(resid / total)
    }

    pub fn residual_ratios(&self, data: &[Sample], k: usize) -> Result<Vec<f64>> {
        Ok(self
            .energies(data, k)?
            .into_iter()
            .map(|(e, q)| q / e)
            .collect())
    }
}
