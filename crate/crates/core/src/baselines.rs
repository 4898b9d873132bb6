//! Reference methods: uncentered PCA and a one-hidden-layer MLP classifier.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::array::{dot, Sample, Shape};
use crate::error::{Error, Result};
use crate::model::GtpcModel;
use crate::optim::{Adam, AdamConfig};
use crate::rng::Rng;
use crate::transforms::TransformFamily;

/// Top eigenpairs of the uncentered second-moment matrix `(1/n) sum x x^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    pub components: Vec<Sample>,
    pub eigenvalues: Vec<f64>,
}

pub fn pca_fit(data: &[Sample], k: usize) -> Result<PcaBasis> {
    let n = data.len();
    let shape = data
        .first()
        .map(Sample::shape)
        .ok_or_else(|| Error::InvalidArgument("PCA of empty data".into()))?;
    let d = shape.len();
    if k == 0 || k > n.min(d) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be in 1..={} for {n} samples of dimension {d}",
            n.min(d)
        )));
    }
    if let Some(bad) = data.iter().find(|x| x.shape() != shape) {
        return Err(Error::ShapeMismatch {
            expected: shape,
            actual: bad.shape(),
        });
    }
    let x = DMatrix::from_fn(n, d, |i, j| data[i].as_slice()[j]);
    let inv_n = 1.0 / n as f64;

    let (eigenvalues, vectors): (Vec<f64>, Vec<Vec<f64>>) = if n >= d {
        let moment = x.transpose() * &x * inv_n;
        let (vals, vecs) = sorted_eigen(moment);
        let picked = (0..k)
            .map(|c| vecs.column(c).iter().copied().collect())
            .collect();
        (vals[..k].to_vec(), picked)
    } else {
        // Gram route: v = X^T a / sqrt(n lambda) for eigenpairs (lambda, a) of X X^T / n.
        let gram = &x * x.transpose() * inv_n;
        let (vals, vecs) = sorted_eigen(gram);
        let scale_floor = vals[0].abs().max(f64::MIN_POSITIVE) * 1e-12;
        let mut picked: Vec<Vec<f64>> = Vec::with_capacity(k);
        for c in 0..k {
            if vals[c] > scale_floor {
                let v = x.transpose() * vecs.column(c);
                let s = 1.0 / (n as f64 * vals[c]).sqrt();
                picked.push(v.iter().map(|e| e * s).collect());
            } else {
                picked.push(orthonormal_complement(&picked, d));
            }
        }
        (vals[..k].to_vec(), picked)
    };

    let components = vectors
        .into_iter()
        .map(|mut v| {
            fix_sign(&mut v);
            Sample::from_parts(shape, v)
        })
        .collect();
    Ok(PcaBasis {
        components,
        eigenvalues: eigenvalues.into_iter().map(|l| l.max(0.0)).collect(),
    })
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (vals, vecs)
}

/// Largest-magnitude entry positive, so bases are reproducible.
fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);
    if pivot < 0.0 {
        v.iter_mut().for_each(|e| *e = -*e);
    }
}

fn orthonormal_complement(basis: &[Vec<f64>], d: usize) -> Vec<f64> {
    for axis in 0..d {
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        for b in basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(e, bi)| *e -= c * bi);
        }
        let n = crate::array::norm(&v);
        if n > 1e-6 {
            return v.into_iter().map(|e| e / n).collect();
        }
    }
    unreachable!("fewer than d basis vectors always leave a complement")
}

impl PcaBasis {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Loadings `<x, v_j>` for the first `k` components.
    pub fn project(&self, x: &Sample, k: usize) -> Result<Vec<f64>> {
        self.check_k(k)?;
        self.components[..k]
            .iter()
            .map(|v| crate::array::inner(x, v))
            .collect()
    }

    pub fn reconstruct(&self, loadings: &[f64]) -> Result<Sample> {
        self.check_k(loadings.len())?;
        let shape = self
            .components
            .first()
            .map(Sample::shape)
            .unwrap_or(Shape::D1(0));
        let mut out = Sample::zeros(shape);
        for (c, v) in loadings.iter().zip(&self.components) {
            out.add_scaled(*c, v)?;
        }
        Ok(out)
    }

    /// Pooled residual ratio, as for [`GtpcModel::residual_mse`].
    pub fn residual_mse(&self, data: &[Sample], k: usize) -> Result<f64> {
        self.check_k(k)?;
        let (mut total, mut resid) = (0.0, 0.0);
        for (index, x) in data.iter().enumerate() {
            let e = x.norm_sq();
            if e == 0.0 {
                return Err(Error::ZeroNormSample { index });
            }
            let r = x.sub(&self.reconstruct(&self.project(x, k)?)?)?;
            total += e;
            resid += r.norm_sq();
        }
        if data.is_empty() {
            return Err(Error::InvalidArgument("residual MSE of empty data".into()));
        }
        Ok(resid / total)
    }

    /// The basis as a transform-invariant model over the identity family.
    pub fn to_model(&self) -> Result<GtpcModel> {
        let shape = self
            .components
            .first()
            .map(Sample::shape)
            .ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
        GtpcModel::from_weights(TransformFamily::identity(shape)?, self.components.clone())
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k > self.components.len() {
            return Err(Error::ComponentOutOfRange {
                index: k,
                count: self.components.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub hidden: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: 10,
            batch_size: 32,
            adam: AdamConfig::default(),
        }
    }
}

/// `input -> ReLU(hidden) -> softmax(classes)`, parameters stored flat as
/// `[W1 (in x hidden), b1, W2 (hidden x classes), b2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    inputs: usize,
    hidden: usize,
    classes: usize,
    params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub classes: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
}

/// Trains the default 10-unit classifier with mean categorical crossentropy.
pub fn mlp_fit(features: &[Vec<f64>], labels: &[usize], epochs: usize, rng: &mut Rng) -> Result<Mlp> {
    Mlp::fit(features, labels, epochs, &MlpConfig::default(), rng)
}

pub fn mlp_predict(model: &Mlp, features: &[Vec<f64>]) -> Result<Predictions> {
    model.predict(features)
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn init(inputs: usize, hidden: usize, classes: usize, rng: &mut Rng) -> Self {
        let mut params = Vec::with_capacity(inputs * hidden + hidden + hidden * classes + classes);
        let limit1 = (6.0 / (inputs + hidden) as f64).sqrt();
        for _ in 0..inputs * hidden {
            params.push(rng.next_f64() * 2.0 * limit1 - limit1);
        }
        params.extend(std::iter::repeat_n(0.0, hidden));
        let limit2 = (6.0 / (hidden + classes) as f64).sqrt();
        for _ in 0..hidden * classes {
            params.push(rng.next_f64() * 2.0 * limit2 - limit2);
        }
        params.extend(std::iter::repeat_n(0.0, classes));
        Mlp {
            inputs,
            hidden,
            classes,
            params,
        }
    }

    pub fn fit(
        features: &[Vec<f64>],
        labels: &[usize],
        epochs: usize,
        cfg: &MlpConfig,
        rng: &mut Rng,
    ) -> Result<Mlp> {
        if features.len() != labels.len() || features.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let inputs = features[0].len();
        if let Some(row) = features.iter().find(|r| r.len() != inputs) {
            return Err(Error::InvalidArgument(format!(
                "ragged features: {} vs {inputs} columns",
                row.len()
            )));
        }
        let classes = labels.iter().max().map_or(0, |&m| m + 1);
        let distinct = {
            let mut seen = vec![false; classes];
            labels.iter().for_each(|&l| seen[l] = true);
            seen.iter().filter(|&&s| s).count()
        };
        if distinct < 2 {
            return Err(Error::InvalidArgument(
                "classifier needs at least two classes".into(),
            ));
        }
        if cfg.batch_size == 0 || cfg.hidden == 0 {
            return Err(Error::InvalidArgument("hidden units and batch size must be >= 1".into()));
        }

        let mut model = Mlp::init(inputs, cfg.hidden, classes, rng);
        let mut adam = Adam::new(model.params.len(), cfg.adam);
        let mut order: Vec<usize> = (0..features.len()).collect();
        let mut grad = vec![0.0; model.params.len()];
        for _ in 0..epochs {
            rng.shuffle(&mut order);
            for batch in order.chunks(cfg.batch_size) {
                grad.iter_mut().for_each(|g| *g = 0.0);
                let scale = 1.0 / batch.len() as f64;
                for &i in batch {
                    model.backprop(&features[i], labels[i], scale, &mut grad);
                }
                adam.step(&mut model.params, &grad)?;
            }
        }
        Ok(model)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.inputs * self.hidden;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden * self.classes;
        (b1, w2, b2)
    }

    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (b1, w2, b2) = self.offsets();
        let p = &self.params;
        let mut hidden = p[b1..w2].to_vec();
        for (i, xi) in x.iter().enumerate() {
            let row = &p[i * self.hidden..(i + 1) * self.hidden];
            hidden.iter_mut().zip(row).for_each(|(h, w)| *h += xi * w);
        }
        hidden.iter_mut().for_each(|h| *h = h.max(0.0));
        let mut logits = p[b2..].to_vec();
        for (j, hj) in hidden.iter().enumerate() {
            let row = &p[w2 + j * self.classes..w2 + (j + 1) * self.classes];
            logits.iter_mut().zip(row).for_each(|(o, w)| *o += hj * w);
        }
        (hidden, softmax(&logits))
    }

    /// Adds `scale * d(crossentropy)/d(params)` for one example to `grad`.
    fn backprop(&self, x: &[f64], label: usize, scale: f64, grad: &mut [f64]) {
        let (b1, w2, b2) = self.offsets();
        let (hidden, mut delta_out) = self.forward(x);
        delta_out[label] -= 1.0;
        delta_out.iter_mut().for_each(|d| *d *= scale);
        let mut delta_hidden = vec![0.0; self.hidden];
        for j in 0..self.hidden {
            let row = w2 + j * self.classes;
            for c in 0..self.classes {
                grad[row + c] += hidden[j] * delta_out[c];
                delta_hidden[j] += self.params[row + c] * delta_out[c];
            }
            if hidden[j] <= 0.0 {
                delta_hidden[j] = 0.0;
            }
        }
        grad[b2..].iter_mut().zip(&delta_out).for_each(|(g, d)| *g += d);
        for (i, xi) in x.iter().enumerate() {
            let row = &mut grad[i * self.hidden..(i + 1) * self.hidden];
            row.iter_mut().zip(&delta_hidden).for_each(|(g, d)| *g += xi * d);
        }
        grad[b1..w2].iter_mut().zip(&delta_hidden).for_each(|(g, d)| *g += d);
    }

    pub fn predict(&self, features: &[Vec<f64>]) -> Result<Predictions> {
        let mut classes = Vec::with_capacity(features.len());
        let mut probabilities = Vec::with_capacity(features.len());
        for row in features {
            if row.len() != self.inputs {
                return Err(Error::InvalidArgument(format!(
                    "feature width {} does not match model input {}",
                    row.len(),
                    self.inputs
                )));
            }
            let (_, probs) = self.forward(row);
            classes.push(argmax(&probs));
            probabilities.push(probs);
        }
        Ok(Predictions {
            classes,
            probabilities,
        })
    }

    pub fn accuracy(&self, features: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
        let pred = self.predict(features)?;
        let hits = pred
            .classes
            .iter()
            .zip(labels)
            .filter(|(p, l)| p == l)
            .count();
        Ok(hits as f64 / labels.len().max(1) as f64)
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Accuracy of always predicting the most frequent training label.
pub fn majority_accuracy(train_labels: &[usize], test_labels: &[usize]) -> f64 {
    let classes = train_labels.iter().max().map_or(0, |&m| m + 1);
    let mut counts = vec![0usize; classes];
    train_labels.iter().for_each(|&l| counts[l] += 1);
    let majority = counts
        .iter()
        .enumerate()
        .max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))
        .map_or(0, |(i, _)| i);
    let hits = test_labels.iter().filter(|&&l| l == majority).count();
    hits as f64 / test_labels.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(data: &[f64]) -> Sample {
        Sample::from_vec(data.to_vec()).unwrap()
    }

    #[test]
    fn rank_one_pca() {
        let e = v(&[0.0, 0.6, 0.8]);
        let coeffs = [1.0, -2.0, 3.0, 0.5];
        let data: Vec<Sample> = coeffs.iter().map(|&c| e.scaled(c)).collect();
        let basis = pca_fit(&data, 1).unwrap();
        let cos = crate::array::inner(&basis.components[0], &e).unwrap();
        assert!((cos.abs() - 1.0).abs() < 1e-12);
        let mean_sq = coeffs.iter().map(|c| c * c).sum::<f64>() / coeffs.len() as f64;
        assert!((basis.eigenvalues[0] - mean_sq).abs() < 1e-12);
    }

    #[test]
    fn symmetric_pair_eigenvalues() {
        let basis = pca_fit(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])], 2).unwrap();
        assert!((basis.eigenvalues[0] - 0.5).abs() < 1e-12);
        assert!((basis.eigenvalues[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pca_rejects_large_k() {
        let data = vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])];
        assert!(pca_fit(&data, 3).is_err());
        assert!(pca_fit(&data, 0).is_err());
        assert!(pca_fit(&[], 1).is_err());
    }

    #[test]
    fn gram_route_matches_direct_route() {
        let mut rng = Rng::new(5);
        let data: Vec<Sample> = (0..4)
            .map(|_| Sample::from_vec((0..9).map(|_| rng.normal()).collect()).unwrap())
            .collect();
        // n < d takes the Gram route; padding with zero rows forces the direct one.
        let gram = pca_fit(&data, 3).unwrap();
        let mut padded = data.clone();
        padded.extend(std::iter::repeat_n(Sample::zeros(Shape::D1(9)), 8));
        let direct = pca_fit(&padded, 3).unwrap();
        let ratio = padded.len() as f64 / data.len() as f64;
        for c in 0..3 {
            assert!((gram.eigenvalues[c] - direct.eigenvalues[c] * ratio).abs() < 1e-10);
            let cos = crate::array::inner(&gram.components[c], &direct.components[c]).unwrap();
            assert!((cos.abs() - 1.0).abs() < 1e-9, "{cos}");
        }
    }

    #[test]
    fn rank_deficient_gram_route_stays_orthonormal() {
        let data = vec![v(&[1.0, 1.0, 0.0, 0.0]), v(&[2.0, 2.0, 0.0, 0.0])];
        let basis = pca_fit(&data, 2).unwrap();
        let c = crate::array::inner(&basis.components[0], &basis.components[1]).unwrap();
        assert!(c.abs() < 1e-12);
        assert!((basis.components[1].norm() - 1.0).abs() < 1e-12);
        assert!(basis.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn span_and_orthogonal_complement() {
        let basis = PcaBasis {
            components: vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])],
            eigenvalues: vec![2.0, 1.0],
        };
        let x = v(&[3.0, -1.0, 0.0]);
        let rec = basis.reconstruct(&basis.project(&x, 2).unwrap()).unwrap();
        assert!(x.sub(&rec).unwrap().norm() <= 1e-8);
        assert_eq!(basis.project(&v(&[0.0, 0.0, 4.0]), 2).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn softmax_rows_and_shift_invariance() {
        let p = softmax(&[1.0, 2.0, -3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let q = softmax(&[11.0, 12.0, 7.0]);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_output_weights_give_uniform_probabilities() {
        let mut m = Mlp::init(3, 10, 4, &mut Rng::new(1));
        let (_, w2, _) = m.offsets();
        m.params[w2..].iter_mut().for_each(|p| *p = 0.0);
        let pred = m.predict(&[vec![0.3, -1.0, 2.0]]).unwrap();
        assert!(pred.probabilities[0].iter().all(|&p| (p - 0.25).abs() < 1e-12));
        assert!(m.predict(&[vec![1.0]]).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = Rng::new(9);
        let m = Mlp::init(3, 4, 3, &mut rng);
        let x = [0.4, -1.2, 0.7];
        let label = 2;
        let loss = |model: &Mlp| -model.forward(&x).1[label].ln();
        let mut grad = vec![0.0; m.params.len()];
        m.backprop(&x, label, 1.0, &mut grad);
        for i in 0..m.params.len() {
            let h = 1e-6;
            let mut plus = m.clone();
            plus.params[i] += h;
            let mut minus = m.clone();
            minus.params[i] -= h;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-6, "param {i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn mlp_rejects_single_class_and_mismatch() {
        let f = vec![vec![0.0], vec![1.0]];
        assert!(mlp_fit(&f, &[1, 1], 1, &mut Rng::new(0)).is_err());
        assert!(mlp_fit(&f, &[0], 1, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn majority_baseline() {
        assert_eq!(majority_accuracy(&[0, 1, 1], &[1, 1, 0, 1]), 0.75);
    }
}
