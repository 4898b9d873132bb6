//! Transform-invariant principal component analysis.
//!
//! Components are learned so that each sample is explained by the
//! best-aligning member of a finite transform family (grid shifts,
//! rotations, reflections) rather than by the component as-is. With the
//! identity family this reduces to ordinary uncentered PCA.
//!
//! ```
//! use gtpca::{fit_model, FitConfig, Rng, TransformFamily};
//! use gtpca::data::gen_spike;
//!
//! let mut rng = Rng::new(7);
//! let data: Vec<_> = (0..64).map(|_| gen_spike(&mut rng, 64)).collect();
//! let family = TransformFamily::shift_1d(32, 64).unwrap();
//! let cfg = FitConfig { epochs_per_component: 1, batches_per_epoch: 20, ..FitConfig::default() };
//! let fit = fit_model(&data, &family, 2, &cfg).unwrap();
//! let resmse = fit.model.residual_mse(&data, 2).unwrap();
//! assert!(resmse < 1.0);
//! ```

pub mod array;
pub mod baselines;
pub mod data;
pub mod error;
pub mod format;
pub mod model;
pub mod optim;
mod par;
pub mod rng;
pub mod transforms;

pub use array::{inner, Sample, Shape};
pub use error::{Error, Result};
pub use model::{
    fit_component, fit_model, layer_gradient, layer_objective, Component, ComponentFit,
    EpochRecord, FitConfig, GtpcModel, Loading, ModelFit, Projector,
};
pub use optim::{Adam, AdamConfig};
pub use rng::Rng;
pub use transforms::{Alignment, FamilyKind, Scores, TransformFamily, Weight};
