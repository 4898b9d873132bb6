//! Dense sample containers and the Euclidean inner product on them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Domain of a sample or weight: a 1-D window or a row-major 2-D grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Shape {
    D1(usize),
    D2(usize, usize),
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::D1(n) => n,
            Shape::D2(h, w) => h * w,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(rows, cols)`; a 1-D shape is a single row.
    pub fn rows_cols(&self) -> (usize, usize) {
        match *self {
            Shape::D1(n) => (1, n),
            Shape::D2(h, w) => (h, w),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        match *self {
            Shape::D1(n) => vec![n],
            Shape::D2(h, w) => vec![h, w],
        }
    }

    pub fn from_dims(dims: &[usize]) -> Result<Shape> {
        match *dims {
            [n] => Ok(Shape::D1(n)),
            [h, w] => Ok(Shape::D2(h, w)),
            _ => Err(Error::InvalidArgument(format!(
                "shape must have 1 or 2 dimensions, got {dims:?}"
            ))),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::D1(n) => write!(f, "[{n}]"),
            Shape::D2(h, w) => write!(f, "[{h}x{w}]"),
        }
    }
}

/// A real-valued signal window or image.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    shape: Shape,
    data: Vec<f64>,
}

impl Sample {
    /// Builds a sample, rejecting length mismatches and non-finite entries.
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if shape.len() != data.len() {
            return Err(Error::LengthMismatch {
                shape,
                len: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Sample { shape, data })
    }

    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        Sample::new(Shape::D1(data.len()), data)
    }

    pub fn zeros(shape: Shape) -> Self {
        Sample {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    /// Wraps data known to be finite and correctly sized.
    pub(crate) fn from_parts(shape: Shape, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.len(), data.len());
        Sample { shape, data }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn scaled(&self, c: f64) -> Sample {
        Sample::from_parts(self.shape, self.data.iter().map(|v| c * v).collect())
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: f64, other: &Sample) -> Result<()> {
        check_shapes(self.shape, other.shape)?;
        axpy(c, &other.data, &mut self.data);
        Ok(())
    }

    pub fn sub(&self, other: &Sample) -> Result<Sample> {
        check_shapes(self.shape, other.shape)?;
        Ok(Sample::from_parts(
            self.shape,
            self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

fn check_shapes(expected: Shape, actual: Shape) -> Result<()> {
    if expected != actual {
        return Err(Error::ShapeMismatch { expected, actual });
    }
    Ok(())
}

/// Inner product of two samples on the same domain.
pub fn inner(a: &Sample, b: &Sample) -> Result<f64> {
    check_shapes(a.shape, b.shape)?;
    Ok(dot(&a.data, &b.data))
}

/// Euclidean norm `sqrt(<a, a>)`.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four partial sums let the compiler vectorize without reassociating.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in 4 * chunks..a.len() {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::from_vec(v.to_vec()).unwrap()
    }

    #[test]
    fn inner_examples() {
        assert_eq!(inner(&s(&[1.0, 2.0]), &s(&[3.0, 4.0])).unwrap(), 11.0);
        let x = s(&[3.0, 4.0]);
        assert_eq!(inner(&x, &x).unwrap(), 25.0);
        assert_eq!(inner(&x, &s(&[0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn inner_rejects_shape_mismatch() {
        let err = inner(&s(&[1.0, 2.0]), &s(&[1.0, 2.0, 3.0])).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
        let a = Sample::new(Shape::D2(2, 2), vec![1.0; 4]).unwrap();
        let b = Sample::new(Shape::D1(4), vec![1.0; 4]).unwrap();
        assert!(inner(&a, &b).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(s(&[3.0, 4.0]).norm(), 5.0);
        assert_eq!(s(&[0.0, 0.0, 0.0]).norm(), 0.0);
        assert_eq!(s(&[1.0, 1.0, 1.0, 1.0]).norm(), 2.0);
    }

    #[test]
    fn sample_invariants() {
        assert!(matches!(
            Sample::new(Shape::D2(2, 3), vec![0.0; 5]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            Sample::from_vec(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(Sample::from_vec(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn dot_handles_tails() {
        for n in 0..11 {
            let a: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
            let expected: f64 = a.iter().map(|v| v * v).sum();
            assert_eq!(dot(&a, &a), expected);
        }
    }
}
