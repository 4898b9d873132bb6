//! Experiment configuration: one JSON document per run.

use std::fs;
use std::path::{Path, PathBuf};

use gtpca::data::MnistSetting;
use gtpca::transforms::default_angles;
use gtpca::{AdamConfig, FamilyKind, FitConfig, Shape, TransformFamily};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Oscillations,
    Spikes,
    Mnist,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    pub weight_shape: Vec<usize>,
    /// Rotation angles in radians; defaults to 20 equally spaced angles.
    #[serde(default)]
    pub angles: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub epochs_per_component: usize,
    pub batches_per_epoch: usize,
    pub batch_size: usize,
    pub init_scale: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        let fit = FitConfig::default();
        FitSection {
            epochs_per_component: fit.epochs_per_component,
            batches_per_epoch: fit.batches_per_epoch,
            batch_size: fit.batch_size,
            init_scale: fit.init_scale,
            lr: fit.adam.lr,
            beta1: fit.adam.beta1,
            beta2: fit.adam.beta2,
            eps: fit.adam.eps,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    /// Spikes: `i` (T=128), `ii` or `iii` (T=256). MNIST: `i`..`iv`.
    #[serde(default)]
    pub setting: Option<String>,
    /// Series length for the synthetic tasks; overrides the setting default.
    #[serde(default)]
    pub sample_len: Option<usize>,
    /// Defaults per task and setting when omitted.
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    pub components: usize,
    #[serde(default)]
    pub fit: FitSection,
    pub train_size: usize,
    pub test_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Probability that a generated spike sample contains a spike.
    #[serde(default = "default_spike_probability")]
    pub spike_probability: f64,
    /// Fit components only on training samples with this label.
    #[serde(default)]
    pub fit_label: Option<u8>,
    /// Train the downstream classifier on loadings during `eval`.
    #[serde(default)]
    pub classify: bool,
    #[serde(default = "default_mlp_epochs")]
    pub mlp_epochs: usize,
    #[serde(default)]
    pub mnist_dir: Option<PathBuf>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_spike_probability() -> f64 {
    0.5
}

fn default_mlp_epochs() -> usize {
    10
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|source| CliError::Config {
                path: path.to_owned(),
                source,
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |msg: String| Err(CliError::Invalid(msg));
        if self.components == 0 {
            return invalid("components must be at least 1".into());
        }
        if self.train_size == 0 || self.test_size == 0 {
            return invalid("train_size and test_size must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.spike_probability) {
            return invalid(format!(
                "spike_probability must be in [0, 1], got {}",
                self.spike_probability
            ));
        }
        if self.sample_len == Some(0) {
            return invalid("sample_len must be at least 1".into());
        }
        match self.task {
            Task::Oscillations => {
                if self.setting.is_some() {
                    return invalid("oscillations take no setting".into());
                }
            }
            Task::Spikes => {
                self.spike_setting()?;
            }
            Task::Mnist => {
                self.mnist_setting()?;
                if self.mnist_dir.is_none() {
                    return invalid("mnist task needs mnist_dir".into());
                }
            }
        }
        Ok(())
    }

    fn spike_setting(&self) -> Result<&str, CliError> {
        match self.setting.as_deref().unwrap_or("i") {
            s @ ("i" | "ii" | "iii") => Ok(s),
            other => Err(CliError::Invalid(format!(
                "unknown spikes setting {other:?} (expected i, ii or iii)"
            ))),
        }
    }

    pub fn mnist_setting(&self) -> Result<MnistSetting, CliError> {
        Ok(self.setting.as_deref().unwrap_or("ii").parse()?)
    }

    /// Series length for synthetic tasks.
    pub fn series_len(&self) -> Result<usize, CliError> {
        if let Some(n) = self.sample_len {
            return Ok(n);
        }
        Ok(match self.task {
            Task::Spikes if self.spike_setting()? == "i" => 128,
            _ => 256,
        })
    }

    /// Family configuration, falling back to the task default.
    pub fn family_config(&self) -> Result<FamilyConfig, CliError> {
        if let Some(f) = &self.family {
            return Ok(f.clone());
        }
        let (kind, weight_shape) = match self.task {
            Task::Oscillations => (FamilyKind::Shift1D, vec![512]),
            Task::Spikes => match self.spike_setting()? {
                "iii" => (FamilyKind::Shift1D, vec![128]),
                _ => (FamilyKind::Shift1D, vec![256]),
            },
            Task::Mnist => match self.mnist_setting()? {
                MnistSetting::Crop16 | MnistSetting::Embed56 => (FamilyKind::Shift2D, vec![28, 28]),
                MnistSetting::Original => (FamilyKind::Identity, vec![28, 28]),
                MnistSetting::Rotate => (FamilyKind::Rotation, vec![28, 28]),
            },
        };
        Ok(FamilyConfig {
            kind,
            weight_shape,
            angles: None,
        })
    }

    /// Builds the transform family for samples of `sample_shape`.
    pub fn family(&self, sample_shape: Shape) -> Result<TransformFamily, CliError> {
        let f = self.family_config()?;
        let weight_shape = Shape::from_dims(&f.weight_shape)?;
        let angles = match f.kind {
            FamilyKind::Rotation => f
                .angles
                .unwrap_or_else(|| default_angles(gtpca::transforms::DEFAULT_ROTATION_STEPS)),
            _ => f.angles.unwrap_or_default(),
        };
        Ok(TransformFamily::build(f.kind, weight_shape, sample_shape, angles)?)
    }

    pub fn fit_config(&self) -> FitConfig {
        let f = &self.fit;
        FitConfig {
            epochs_per_component: f.epochs_per_component,
            batches_per_epoch: f.batches_per_epoch,
            batch_size: f.batch_size,
            seed: self.seed,
            init_scale: f.init_scale,
            adam: AdamConfig {
                lr: f.lr,
                beta1: f.beta1,
                beta2: f.beta2,
                eps: f.eps,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> Result<ExperimentConfig, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(json).map_err(|source| CliError::Config {
            path: "inline".into(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn defaults_follow_task_and_setting() {
        let cfg = parse(r#"{"task":"spikes","setting":"i","components":2,"train_size":5,"test_size":5}"#)
            .unwrap();
        assert_eq!(cfg.series_len().unwrap(), 128);
        let fam = cfg.family(Shape::D1(128)).unwrap();
        assert_eq!(fam.weight_shape(), Shape::D1(256));
        assert_eq!(fam.size(), 129);
        assert_eq!(cfg.spike_probability, 0.5);
        assert_eq!(cfg.fit_config(), FitConfig::default());

        let cfg = parse(
            r#"{"task":"mnist","setting":"iv","components":1,"train_size":1,"test_size":1,"mnist_dir":"x"}"#,
        )
        .unwrap();
        assert_eq!(cfg.family(Shape::D2(28, 28)).unwrap().size(), 20);
    }

    #[test]
    fn rejects_bad_configs() {
        for json in [
            r#"{"task":"spikes","components":0,"train_size":5,"test_size":5}"#,
            r#"{"task":"spikes","components":1,"train_size":0,"test_size":5}"#,
            r#"{"task":"spikes","setting":"iv","components":1,"train_size":5,"test_size":5}"#,
            r#"{"task":"oscillations","setting":"i","components":1,"train_size":5,"test_size":5}"#,
            r#"{"task":"mnist","components":1,"train_size":5,"test_size":5}"#,
            r#"{"task":"spikes","components":1,"train_size":5,"test_size":5,"typo":1}"#,
            r#"{"task":"audio","components":1,"train_size":5,"test_size":5}"#,
        ] {
            assert!(parse(json).is_err(), "{json}");
        }
    }
}
