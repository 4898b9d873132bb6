//! Independent oracles and random case builders shared by the property and
//! acceptance targets. Everything here goes through `apply` and plain loops,
//! never through the fast scoring paths under test.

#![allow(dead_code)]

use std::f64::consts::TAU;

use gtpca::transforms::DEGENERATE_NORM;
use gtpca::{inner, layer_gradient, layer_objective, FamilyKind, GtpcModel, Rng, Sample, Shape, TransformFamily};

pub const KINDS: [FamilyKind; 5] = [
    FamilyKind::Identity,
    FamilyKind::Shift1D,
    FamilyKind::Shift2D,
    FamilyKind::Rotation,
    FamilyKind::Reflection,
];

fn between(rng: &mut Rng, lo: usize, hi: usize) -> usize {
    lo + rng.below(hi - lo + 1)
}

/// Weight length relative to the sample: half, equal or double, or arbitrary.
fn paired_len(rng: &mut Rng, sample: usize) -> usize {
    match rng.below(4) {
        0 => (sample / 2).max(1),
        1 => sample,
        2 => 2 * sample,
        _ => between(rng, 1, 2 * sample),
    }
}

pub fn random_family(kind: FamilyKind, rng: &mut Rng) -> TransformFamily {
    match kind {
        FamilyKind::Identity => {
            let shape = if rng.below(2) == 0 {
                Shape::D1(between(rng, 1, 12))
            } else {
                Shape::D2(between(rng, 1, 4), between(rng, 1, 4))
            };
            TransformFamily::identity(shape)
        }
        FamilyKind::Shift1D => {
            let sample = between(rng, 1, 12);
            TransformFamily::shift_1d(paired_len(rng, sample), sample)
        }
        FamilyKind::Shift2D => {
            let (sr, sc) = (between(rng, 1, 5), between(rng, 1, 5));
            let weight = (paired_len(rng, sr), paired_len(rng, sc));
            TransformFamily::shift_2d(weight, (sr, sc))
        }
        FamilyKind::Rotation => {
            let shape = (between(rng, 2, 6), between(rng, 2, 6));
            let angles = (0..between(rng, 1, 4))
                .map(|_| rng.uniform(0.0, TAU).unwrap())
                .collect();
            TransformFamily::rotation(shape, angles)
        }
        FamilyKind::Reflection => {
            TransformFamily::reflection((between(rng, 1, 6), between(rng, 1, 6)))
        }
    }
    .expect("generated families are valid")
}

pub fn random_sample(shape: Shape, rng: &mut Rng) -> Sample {
    Sample::new(shape, (0..shape.len()).map(|_| rng.normal()).collect()).unwrap()
}

/// A weight whose transforms are not all degenerate.
pub fn random_weight(family: &TransformFamily, rng: &mut Rng) -> Sample {
    loop {
        let w = random_sample(family.weight_shape(), rng);
        if family.prepare(&w).is_ok() {
            return w;
        }
    }
}

/// `<x, T_t w> / ||T_t w||` per transform by explicit application.
pub fn naive_scores(family: &TransformFamily, x: &Sample, w: &Sample) -> Vec<f64> {
    (0..family.size())
        .map(|t| {
            let u = family.apply(t, w).unwrap();
            let n = u.norm();
            if n < DEGENERATE_NORM {
                0.0
            } else {
                inner(x, &u).unwrap() / n
            }
        })
        .collect()
}

/// Relative error of `<T w, g> = <w, T^T g>` for a random triple.
pub fn adjoint_error(family: &TransformFamily, rng: &mut Rng) -> f64 {
    let w = random_sample(family.weight_shape(), rng);
    let g = random_sample(family.sample_shape(), rng);
    let t = rng.below(family.size());
    let lhs = inner(&family.apply(t, &w).unwrap(), &g).unwrap();
    let rhs = inner(&w, &family.adjoint(t, &g).unwrap()).unwrap();
    (lhs - rhs).abs() / (w.norm() * g.norm()).max(1.0)
}

/// Max abs difference between fast and naive scores.
pub fn score_error(family: &TransformFamily, rng: &mut Rng) -> f64 {
    let w = random_weight(family, rng);
    let x = random_sample(family.sample_shape(), rng);
    let fast = family.score_all(&x, &w).unwrap().values;
    let slow = naive_scores(family, &x, &w);
    fast.iter()
        .zip(&slow)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Relative error of the analytic gradient against central differences, or
/// `None` when the case sits near an argmax tie or a degenerate transform.
pub fn gradient_error(family: &TransformFamily, rng: &mut Rng) -> Option<f64> {
    let w = random_weight(family, rng);
    let x = random_sample(family.sample_shape(), rng);
    let mut sq: Vec<(f64, usize)> = naive_scores(family, &x, &w)
        .iter()
        .enumerate()
        .map(|(t, v)| (v * v, t))
        .collect();
    sq.sort_by(|a, b| b.0.total_cmp(&a.0));
    let best = sq[0];
    if best.0 < 1e-6 || sq.get(1).is_some_and(|s| s.0 > best.0 * (1.0 - 1e-3)) {
        return None;
    }
    if family.apply(best.1, &w).unwrap().norm() < 1e-2 {
        return None;
    }
    let analytic = layer_gradient(&x, &w, family).unwrap();
    let h = 1e-6;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..w.len() {
        let mut plus = w.as_slice().to_vec();
        let mut minus = plus.clone();
        plus[i] += h;
        minus[i] -= h;
        let f = |v: Vec<f64>| {
            layer_objective(&x, &Sample::new(w.shape(), v).unwrap(), family).unwrap()
        };
        let fd = (f(plus) - f(minus)) / (2.0 * h);
        let a = analytic.as_slice()[i];
        num += (a - fd) * (a - fd);
        den += a * a;
    }
    if den.sqrt() < 1e-6 {
        return None;
    }
    Some(num.sqrt() / den.sqrt())
}

/// Relative change of the layer objective when `w` is scaled by `c`.
pub fn scale_error(family: &TransformFamily, rng: &mut Rng, c: f64) -> f64 {
    let w = random_weight(family, rng);
    let x = random_sample(family.sample_shape(), rng);
    let a = layer_objective(&x, &w, family).unwrap();
    let b = layer_objective(&x, &w.scaled(c), family).unwrap();
    (a - b).abs() / a.abs().max(1e-300)
}

pub fn random_model(family: &TransformFamily, k: usize, rng: &mut Rng) -> GtpcModel {
    let weights = (0..k).map(|_| random_weight(family, rng)).collect();
    GtpcModel::from_weights(family.clone(), weights).unwrap()
}

/// Largest increase of a per-sample residual ratio from `k` to `k + 1`.
pub fn monotonicity_violation(model: &GtpcModel, data: &[Sample]) -> f64 {
    let p = model.projector().unwrap();
    let curves: Vec<Vec<f64>> = (0..=model.len())
        .map(|k| p.residual_ratios(data, k).unwrap())
        .collect();
    curves
        .windows(2)
        .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| b - a))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest `|<r_k, u_k>| / ||x||` over deflation steps, where `u_k` is the
/// unit direction removed at step `k`.
pub fn orthogonality_error(model: &GtpcModel, x: &Sample) -> f64 {
    let p = model.projector().unwrap();
    let family = model.family();
    let scale = x.norm().max(1e-300);
    (1..=model.len())
        .map(|k| {
            let (loadings, r) = p.project_with_residual(x, k).unwrap();
            let last = loadings[k - 1];
            let u = family
                .apply(last.transform, &model.components()[k - 1].weight)
                .unwrap();
            let n = u.norm();
            if n < DEGENERATE_NORM {
                return 0.0;
            }
            inner(&r, &u).unwrap().abs() / n / scale
        })
        .fold(0.0, f64::max)
}
