//! Finite transform families and all-transform alignment scoring.
//!
//! A family maps a weight on `weight_shape` to arrays on `sample_shape`.
//! Every member is linear, so each one also has an adjoint that routes
//! sample-domain gradients back onto the weight.
//!
//! Shifts are integer grid offsets. When the weight is shorter than the
//! sample along an axis it is embedded with zero fill; when it is longer,
//! the transform takes a contiguous crop of it. Rotations resample the
//! weight bilinearly about the grid center, treating pixels outside the
//! grid as zero.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::array::{dot, Sample, Shape};
use crate::error::{Error, Result};

/// Weights live in the same dense container as samples.
pub type Weight = Sample;

/// Transform norms below this are treated as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Default rotation set: multiples of pi/10.
pub const DEFAULT_ROTATION_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Identity,
    Shift1D,
    Shift2D,
    Rotation,
    Reflection,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Identity => "identity",
            FamilyKind::Shift1D => "shift1d",
            FamilyKind::Shift2D => "shift2d",
            FamilyKind::Rotation => "rotation",
            FamilyKind::Reflection => "reflection",
        }
    }
}

/// Offsets along one axis. Weight index = sample index + `delta(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct AxisShift {
    weight_len: usize,
    sample_len: usize,
}

impl AxisShift {
    fn count(&self) -> usize {
        self.weight_len.abs_diff(self.sample_len) + 1
    }

    fn delta(&self, t: usize) -> isize {
        if self.weight_len <= self.sample_len {
            -(t as isize)
        } else {
            t as isize
        }
    }

    /// Sample indices where the shifted weight is defined.
    fn overlap(&self, delta: isize) -> std::ops::Range<usize> {
        let lo = (-delta).max(0) as usize;
        let hi = (self.sample_len as isize).min(self.weight_len as isize - delta);
        lo..hi.max(lo as isize) as usize
    }
}

/// One output pixel's bilinear stencil: `(output index, source index, weight)`.
type Stencil = Vec<(u32, u32, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct TransformFamily {
    kind: FamilyKind,
    weight_shape: Shape,
    sample_shape: Shape,
    angles: Vec<f64>,
    stencils: Vec<Stencil>,
}

impl TransformFamily {
    pub fn identity(shape: Shape) -> Result<Self> {
        Self::build(FamilyKind::Identity, shape, shape, Vec::new())
    }

    pub fn shift_1d(weight_len: usize, sample_len: usize) -> Result<Self> {
        Self::build(
            FamilyKind::Shift1D,
            Shape::D1(weight_len),
            Shape::D1(sample_len),
            Vec::new(),
        )
    }

    pub fn shift_2d(weight: (usize, usize), sample: (usize, usize)) -> Result<Self> {
        Self::build(
            FamilyKind::Shift2D,
            Shape::D2(weight.0, weight.1),
            Shape::D2(sample.0, sample.1),
            Vec::new(),
        )
    }

    pub fn rotation(shape: (usize, usize), angles: Vec<f64>) -> Result<Self> {
        let shape = Shape::D2(shape.0, shape.1);
        Self::build(FamilyKind::Rotation, shape, shape, angles)
    }

    /// Rotations by `2*pi*j/20`, `j = 0..20`.
    pub fn rotation_default(shape: (usize, usize)) -> Result<Self> {
        Self::rotation(shape, default_angles(DEFAULT_ROTATION_STEPS))
    }

    pub fn reflection(shape: (usize, usize)) -> Result<Self> {
        let shape = Shape::D2(shape.0, shape.1);
        Self::build(FamilyKind::Reflection, shape, shape, Vec::new())
    }

    /// Generic constructor used by the file loaders.
    pub fn build(
        kind: FamilyKind,
        weight_shape: Shape,
        sample_shape: Shape,
        angles: Vec<f64>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidFamily(msg));
        if weight_shape.is_empty() || sample_shape.is_empty() {
            return invalid("shapes must be non-empty".into());
        }
        match kind {
            FamilyKind::Identity => {
                if weight_shape != sample_shape {
                    return invalid(format!(
                        "identity needs equal shapes, got {weight_shape} and {sample_shape}"
                    ));
                }
            }
            FamilyKind::Shift1D => {
                if !matches!((weight_shape, sample_shape), (Shape::D1(_), Shape::D1(_))) {
                    return invalid("shift1d needs 1-D shapes".into());
                }
            }
            FamilyKind::Shift2D => {
                if !matches!((weight_shape, sample_shape), (Shape::D2(..), Shape::D2(..))) {
                    return invalid("shift2d needs 2-D shapes".into());
                }
            }
            FamilyKind::Rotation | FamilyKind::Reflection => {
                if !matches!(weight_shape, Shape::D2(..)) || weight_shape != sample_shape {
                    return invalid(format!(
                        "{} needs equal 2-D shapes, got {weight_shape} and {sample_shape}",
                        kind.name()
                    ));
                }
            }
        }
        let stencils = if kind == FamilyKind::Rotation {
            if angles.is_empty() || angles.iter().any(|a| !a.is_finite()) {
                return invalid("rotation needs a non-empty set of finite angles".into());
            }
            let (h, w) = weight_shape.rows_cols();
            angles.iter().map(|&a| rotation_stencil(h, w, a)).collect()
        } else {
            if !angles.is_empty() {
                return invalid(format!("{} takes no angles", kind.name()));
            }
            Vec::new()
        };
        Ok(TransformFamily {
            kind,
            weight_shape,
            sample_shape,
            angles,
            stencils,
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn weight_shape(&self) -> Shape {
        self.weight_shape
    }

    pub fn sample_shape(&self) -> Shape {
        self.sample_shape
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    fn axes(&self) -> (AxisShift, AxisShift) {
        let (hw, ww) = self.weight_shape.rows_cols();
        let (hx, wx) = self.sample_shape.rows_cols();
        (
            AxisShift {
                weight_len: hw,
                sample_len: hx,
            },
            AxisShift {
                weight_len: ww,
                sample_len: wx,
            },
        )
    }

    pub fn size(&self) -> usize {
        match self.kind {
            FamilyKind::Identity => 1,
            FamilyKind::Shift1D | FamilyKind::Shift2D => {
                let (r, c) = self.axes();
                r.count() * c.count()
            }
            FamilyKind::Rotation => self.angles.len(),
            FamilyKind::Reflection => 4,
        }
    }

    fn check_index(&self, t: usize) -> Result<()> {
        let size = self.size();
        if t >= size {
            return Err(Error::TransformOutOfRange { index: t, size });
        }
        Ok(())
    }

    fn check_shape(expected: Shape, actual: Shape) -> Result<()> {
        if expected != actual {
            return Err(Error::ShapeMismatch { expected, actual });
        }
        Ok(())
    }

    /// `(row delta, col delta)` for shift index `t`.
    fn shift_deltas(&self, t: usize) -> (AxisShift, AxisShift, isize, isize) {
        let (r, c) = self.axes();
        let (tr, tc) = (t / c.count(), t % c.count());
        (r, c, r.delta(tr), c.delta(tc))
    }

    /// `T_t w`, an array on the sample domain.
    pub fn apply(&self, t: usize, w: &Weight) -> Result<Sample> {
        self.check_index(t)?;
        Self::check_shape(self.weight_shape, w.shape())?;
        let mut out = vec![0.0; self.sample_shape.len()];
        let src = w.as_slice();
        match self.kind {
            FamilyKind::Identity => out.copy_from_slice(src),
            FamilyKind::Shift1D | FamilyKind::Shift2D => {
                let (r, c, dr, dc) = self.shift_deltas(t);
                let cols = c.overlap(dc);
                for i in r.overlap(dr) {
                    let j = (i as isize + dr) as usize;
                    let dst = &mut out[i * c.sample_len..][cols.clone()];
                    let lo = (cols.start as isize + dc) as usize;
                    dst.copy_from_slice(&src[j * c.weight_len + lo..][..cols.len()]);
                }
            }
            FamilyKind::Rotation => {
                for &(o, s, k) in &self.stencils[t] {
                    out[o as usize] += k * src[s as usize];
                }
            }
            FamilyKind::Reflection => {
                let (h, w) = self.weight_shape.rows_cols();
                for y in 0..h {
                    for x in 0..w {
                        out[y * w + x] = src[reflect_index(t, h, w, y, x)];
                    }
                }
            }
        }
        Ok(Sample::from_parts(self.sample_shape, out))
    }

    /// `T_t^T g`, an array on the weight domain.
    pub fn adjoint(&self, t: usize, g: &Sample) -> Result<Weight> {
        let mut out = Sample::zeros(self.weight_shape);
        self.adjoint_accumulate(t, g, 1.0, out.as_mut_slice())?;
        Ok(out)
    }

    /// `acc += scale * T_t^T g`.
    pub fn adjoint_accumulate(
        &self,
        t: usize,
        g: &Sample,
        scale: f64,
        acc: &mut [f64],
    ) -> Result<()> {
        self.check_index(t)?;
        Self::check_shape(self.sample_shape, g.shape())?;
        if acc.len() != self.weight_shape.len() {
            return Err(Error::LengthMismatch {
                shape: self.weight_shape,
                len: acc.len(),
            });
        }
        let g = g.as_slice();
        match self.kind {
            FamilyKind::Identity => {
                for (a, v) in acc.iter_mut().zip(g) {
                    *a += scale * v;
                }
            }
            FamilyKind::Shift1D | FamilyKind::Shift2D => {
                let (r, c, dr, dc) = self.shift_deltas(t);
                let cols = c.overlap(dc);
                for i in r.overlap(dr) {
                    let j = (i as isize + dr) as usize;
                    let lo = (cols.start as isize + dc) as usize;
                    let dst = &mut acc[j * c.weight_len + lo..][..cols.len()];
                    for (a, v) in dst.iter_mut().zip(&g[i * c.sample_len..][cols.clone()]) {
                        *a += scale * v;
                    }
                }
            }
            FamilyKind::Rotation => {
                for &(o, s, k) in &self.stencils[t] {
                    acc[s as usize] += scale * k * g[o as usize];
                }
            }
            FamilyKind::Reflection => {
                let (h, w) = self.weight_shape.rows_cols();
                for y in 0..h {
                    for x in 0..w {
                        acc[reflect_index(t, h, w, y, x)] += scale * g[y * w + x];
                    }
                }
            }
        }
        Ok(())
    }

    /// `||T_t w||` for every transform.
    pub fn transform_norms(&self, w: &Weight) -> Result<Vec<f64>> {
        Self::check_shape(self.weight_shape, w.shape())?;
        let src = w.as_slice();
        Ok(match self.kind {
            FamilyKind::Identity | FamilyKind::Reflection => vec![w.norm(); self.size()],
            FamilyKind::Shift1D | FamilyKind::Shift2D => {
                let (r, c) = self.axes();
                let squares: Vec<f64> = src.iter().map(|v| v * v).collect();
                let mut norms = Vec::with_capacity(self.size());
                for tr in 0..r.count() {
                    let dr = r.delta(tr);
                    for tc in 0..c.count() {
                        let dc = c.delta(tc);
                        let cols = c.overlap(dc);
                        let lo = (cols.start as isize + dc) as usize;
                        let mut sum = 0.0;
                        for i in r.overlap(dr) {
                            let j = (i as isize + dr) as usize;
                            sum += squares[j * c.weight_len + lo..][..cols.len()]
                                .iter()
                                .sum::<f64>();
                        }
                        norms.push(sum.sqrt());
                    }
                }
                norms
            }
            FamilyKind::Rotation => (0..self.size())
                .map(|t| self.apply(t, w).map(|u| u.norm()))
                .collect::<Result<_>>()?,
        })
    }

    /// Caches per-weight work (norms, transformed copies) for repeated scoring.
    pub fn prepare<'a>(&'a self, w: &'a Weight) -> Result<PreparedWeight<'a>> {
        let norms = self.transform_norms(w)?;
        if norms.iter().all(|&n| n < DEGENERATE_NORM) {
            return Err(Error::DegenerateWeight);
        }
        let copies = match self.kind {
            FamilyKind::Rotation | FamilyKind::Reflection => (0..self.size())
                .map(|t| self.apply(t, w))
                .collect::<Result<_>>()?,
            _ => Vec::new(),
        };
        Ok(PreparedWeight {
            family: self,
            weight: w,
            norms,
            copies,
        })
    }

    /// Normalized alignment coefficients `<x, T w> / ||T w||` for every transform.
    pub fn score_all(&self, x: &Sample, w: &Weight) -> Result<Scores> {
        self.prepare(w)?.scores(x)
    }

    pub fn best_alignment(&self, x: &Sample, w: &Weight) -> Result<Alignment> {
        self.prepare(w)?.best(x)
    }
}

fn reflect_index(t: usize, h: usize, w: usize, y: usize, x: usize) -> usize {
    let sx = if t & 1 == 1 { w - 1 - x } else { x };
    let sy = if t & 2 == 2 { h - 1 - y } else { y };
    sy * w + sx
}

pub fn default_angles(steps: usize) -> Vec<f64> {
    (0..steps).map(|j| TAU * j as f64 / steps as f64).collect()
}

/// Bilinear resampling stencil for `f(cos a x - sin a y, sin a x + cos a y)`
/// about the grid center; neighbours outside the grid contribute zero.
fn rotation_stencil(h: usize, w: usize, angle: f64) -> Stencil {
    let (sin, cos) = angle.sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let snap = |v: f64| {
        let r = v.round();
        if (v - r).abs() < 1e-9 {
            r
        } else {
            v
        }
    };
    let mut stencil = Vec::with_capacity(4 * h * w);
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let sx = snap(cos * dx - sin * dy + cx);
            let sy = snap(sin * dx + cos * dy + cy);
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let out = (y * w + x) as u32;
            for (ox, oy, k) in [
                (0, 0, (1.0 - fx) * (1.0 - fy)),
                (1, 0, fx * (1.0 - fy)),
                (0, 1, (1.0 - fx) * fy),
                (1, 1, fx * fy),
            ] {
                let px = x0 as i64 + ox;
                let py = y0 as i64 + oy;
                if k != 0.0 && px >= 0 && py >= 0 && (px as usize) < w && (py as usize) < h {
                    stencil.push((out, (py as usize * w + px as usize) as u32, k));
                }
            }
        }
    }
    stencil
}

/// Per-transform scores; degenerate transforms score zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub values: Vec<f64>,
    pub degenerate: Vec<bool>,
}

/// Best-aligning transform for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub index: usize,
    /// Signed coefficient `<x, T w> / ||T w||` at `index`.
    pub coeff: f64,
    /// `coeff^2`, the layer objective.
    pub score: f64,
}

/// A weight with its per-transform norms (and, for image families, its
/// transformed copies) precomputed.
#[derive(Debug, Clone)]
pub struct PreparedWeight<'a> {
    family: &'a TransformFamily,
    weight: &'a Weight,
    norms: Vec<f64>,
    copies: Vec<Sample>,
}

impl<'a> PreparedWeight<'a> {
    pub fn family(&self) -> &'a TransformFamily {
        self.family
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Raw inner products `<x, T_t w>` for every `t`.
    pub fn correlations(&self, x: &Sample) -> Result<Vec<f64>> {
        let f = self.family;
        TransformFamily::check_shape(f.sample_shape, x.shape())?;
        let xs = x.as_slice();
        let w = self.weight.as_slice();
        Ok(match f.kind {
            FamilyKind::Identity => vec![dot(xs, w)],
            FamilyKind::Rotation | FamilyKind::Reflection => {
                self.copies.iter().map(|u| dot(xs, u.as_slice())).collect()
            }
            FamilyKind::Shift1D | FamilyKind::Shift2D => {
                let (r, c) = f.axes();
                let mut out = Vec::with_capacity(f.size());
                for tr in 0..r.count() {
                    let dr = r.delta(tr);
                    let rows = r.overlap(dr);
                    for tc in 0..c.count() {
                        let dc = c.delta(tc);
                        let cols = c.overlap(dc);
                        let lo = (cols.start as isize + dc) as usize;
                        let mut sum = 0.0;
                        for i in rows.clone() {
                            let j = (i as isize + dr) as usize;
                            sum += dot(
                                &xs[i * c.sample_len..][cols.clone()],
                                &w[j * c.weight_len + lo..][..cols.len()],
                            );
                        }
                        out.push(sum);
                    }
                }
                out
            }
        })
    }

    pub fn scores(&self, x: &Sample) -> Result<Scores> {
        let corr = self.correlations(x)?;
        let mut degenerate = vec![false; corr.len()];
        let values = corr
            .iter()
            .zip(&self.norms)
            .enumerate()
            .map(|(t, (&c, &n))| {
                if n < DEGENERATE_NORM {
                    degenerate[t] = true;
                    0.0
                } else {
                    c / n
                }
            })
            .collect();
        Ok(Scores { values, degenerate })
    }

    /// Argmax of the squared score; ties go to the lowest index.
    pub fn best(&self, x: &Sample) -> Result<Alignment> {
        let scores = self.scores(x)?;
        let mut best = Alignment {
            index: 0,
            coeff: scores.values[0],
            score: scores.values[0] * scores.values[0],
        };
        for (t, &v) in scores.values.iter().enumerate().skip(1) {
            if v * v > best.score {
                best = Alignment {
                    index: t,
                    coeff: v,
                    score: v * v,
                };
            }
        }
        Ok(best)
    }

    /// `T_t w` (copied from the cache when available).
    pub fn transformed(&self, t: usize) -> Result<Sample> {
        match self.copies.get(t) {
            Some(u) => Ok(u.clone()),
            None => self.family.apply(t, self.weight),
        }
    }

    /// `T_t w / ||T_t w||`.
    pub fn unit_direction(&self, t: usize) -> Result<Sample> {
        let n = self.norms[t];
        if n < DEGENERATE_NORM {
            return Err(Error::DegenerateWeight);
        }
        Ok(self.transformed(t)?.scaled(1.0 / n))
    }
}
