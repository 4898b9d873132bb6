//! Adam with bias correction. Minimizes; callers maximizing an objective
//! pass the negated gradient.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    /// TensorFlow/Keras defaults.
    fn default() -> Self {
        AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    config: AdamConfig,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        Adam {
            config,
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    pub fn with_defaults(len: usize) -> Self {
        Self::new(len, AdamConfig::default())
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One update of `params` against `grad`. A non-finite gradient leaves
    /// both the parameters and the moment estimates untouched.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::InvalidArgument(format!(
                "adam state has {} entries, params {}, grad {}",
                self.m.len(),
                params.len(),
                grad.len()
            )));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient {
                step: self.step + 1,
            });
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut adam = Adam::with_defaults(3);
        let mut p = vec![1.0, -2.0, 0.5];
        adam.step(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m_hat = 1, v_hat = 1 at step one: p = -lr / (1 + eps).
        let mut adam = Adam::with_defaults(1);
        let mut p = vec![0.0];
        adam.step(&mut p, &[1.0]).unwrap();
        let expected = -0.001 / (1.0 + 1e-7);
        assert!((p[0] - expected).abs() < 1e-15, "{}", p[0]);
        assert!((p[0] + 0.001).abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut adam = Adam::with_defaults(2);
            let mut p = vec![0.3, -0.7];
            for k in 0..10 {
                let g = [p[0] * 2.0 + k as f64, p[1].sin()];
                adam.step(&mut p, &g).unwrap();
            }
            (p, adam)
        };
        let (a, sa) = run();
        let (b, sb) = run();
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
        assert_eq!(sa, sb);
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let mut adam = Adam::with_defaults(2);
        let mut p = vec![1.0, 1.0];
        adam.step(&mut p, &[0.1, 0.1]).unwrap();
        let err = adam.step(&mut p, &[f64::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { step: 2 }));
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn rejects_length_mismatch() {
        let mut adam = Adam::with_defaults(2);
        assert!(adam.step(&mut [0.0; 3], &[0.0; 3]).is_err());
    }

    #[test]
    fn converges_on_parabola() {
        // Reference trajectory from an independent scalar implementation.
        let mut adam = Adam::with_defaults(1);
        let mut p = vec![5.0];
        let mut reached = None;
        for step in 1..=10_000 {
            let g = [2.0 * p[0]];
            adam.step(&mut p, &g).unwrap();
            if step == 5000 {
                assert!((p[0] - 1.0198108349146595).abs() < 1e-9, "{}", p[0]);
            }
            if p[0].abs() < 0.5 {
                reached = Some(step);
                break;
            }
        }
        assert_eq!(reached, Some(6042));
    }
}
