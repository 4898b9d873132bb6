//! The four subcommands. Each reads the config, works inside the output
//! directory and reports a short summary on stdout.

use std::fs;
use std::path::{Path, PathBuf};

use gtpca::baselines::{majority_accuracy, mlp_fit, pca_fit};
use gtpca::data::{self, one_vs_rest};
use gtpca::format::{load_dataset, load_model, save_dataset, save_model, Dataset};
use gtpca::{fit_model, GtpcModel, Rng, Sample};
use serde::Serialize;

use crate::config::{ExperimentConfig, Task};
use crate::error::CliError;

pub const TRAIN_FILE: &str = "train.gtds";
pub const TEST_FILE: &str = "test.gtds";
pub const MODEL_FILE: &str = "model.gtpc";
pub const LOG_FILE: &str = "train_log.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const LOADINGS_FILE: &str = "loadings.csv";
pub const RECONSTRUCTIONS_FILE: &str = "reconstructions.gtds";

const TRAIN_STREAM: u64 = 1001;
const TEST_STREAM: u64 = 1002;
const MLP_STREAM: u64 = 2000;

pub struct Paths {
    pub out: PathBuf,
    pub model: PathBuf,
}

impl Paths {
    pub fn new(cfg: &ExperimentConfig, out: Option<PathBuf>, model: Option<PathBuf>) -> Self {
        let out = out.unwrap_or_else(|| cfg.out_dir.clone());
        let model = model.unwrap_or_else(|| out.join(MODEL_FILE));
        Paths { out, model }
    }

    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })
}

fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<(), CliError> {
    let csv_err = |source| CliError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn generate_split(cfg: &ExperimentConfig, count: usize, rng: &mut Rng) -> Result<Dataset, CliError> {
    match cfg.task {
        Task::Oscillations => {
            let len = cfg.series_len()?;
            let samples = (0..count).map(|_| data::gen_oscillation(rng, len)).collect();
            Ok(Dataset::new(samples, None)?)
        }
        Task::Spikes => {
            let len = cfg.series_len()?;
            let (samples, labels) = data::gen_spike_mixture(rng, count, len, cfg.spike_probability);
            Ok(Dataset::new(samples, Some(labels))?)
        }
        Task::Mnist => unreachable!("MNIST splits are loaded, not generated"),
    }
}

fn load_mnist_split(
    cfg: &ExperimentConfig,
    prefix: &str,
    count: usize,
    rng: &mut Rng,
) -> Result<Dataset, CliError> {
    let dir = cfg.mnist_dir.as_ref().expect("validated");
    let ds = data::load_idx(
        dir.join(format!("{prefix}-images-idx3-ubyte")),
        dir.join(format!("{prefix}-labels-idx1-ubyte")),
    )?;
    if ds.len() < count {
        return Err(CliError::Invalid(format!(
            "{}: requested {count} {prefix} images, found {}",
            dir.display(),
            ds.len()
        )));
    }
    let images = data::mnist_setting(&ds.images[..count], cfg.mnist_setting()?, rng)?;
    Ok(Dataset::new(images, Some(ds.labels[..count].to_vec()))?)
}

pub fn gen(cfg: &ExperimentConfig, paths: &Paths) -> Result<(), CliError> {
    ensure_dir(&paths.out)?;
    let root = Rng::new(cfg.seed);
    let (mut train_rng, mut test_rng) = (root.split(TRAIN_STREAM), root.split(TEST_STREAM));
    let (train, test) = match cfg.task {
        Task::Mnist => (
            load_mnist_split(cfg, "train", cfg.train_size, &mut train_rng)?,
            load_mnist_split(cfg, "t10k", cfg.test_size, &mut test_rng)?,
        ),
        _ => (
            generate_split(cfg, cfg.train_size, &mut train_rng)?,
            generate_split(cfg, cfg.test_size, &mut test_rng)?,
        ),
    };
    for (name, ds) in [(TRAIN_FILE, &train), (TEST_FILE, &test)] {
        let path = paths.file(name);
        save_dataset(ds, &path)?;
        println!("wrote {} samples to {}", ds.len(), path.display());
    }
    Ok(())
}

/// Training samples the components are fitted on.
fn fit_subset(cfg: &ExperimentConfig, train: &Dataset) -> Result<Vec<Sample>, CliError> {
    let Some(label) = cfg.fit_label else {
        return Ok(train.samples.clone());
    };
    let labels = train
        .labels
        .as_ref()
        .ok_or_else(|| CliError::Invalid("fit_label set but the dataset has no labels".into()))?;
    let subset: Vec<Sample> = train
        .samples
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == label)
        .map(|(s, _)| s.clone())
        .collect();
    if subset.is_empty() {
        return Err(CliError::Invalid(format!("no training samples with label {label}")));
    }
    Ok(subset)
}

fn load_split(paths: &Paths, name: &str) -> Result<Dataset, CliError> {
    let ds = load_dataset(paths.file(name))?;
    if ds.is_empty() {
        return Err(CliError::Invalid(format!("{}: dataset is empty", paths.file(name).display())));
    }
    Ok(ds)
}

#[derive(Serialize)]
struct LogRow {
    component: usize,
    epoch: usize,
    mean_objective: f64,
}

pub fn fit(cfg: &ExperimentConfig, paths: &Paths) -> Result<(), CliError> {
    let train = load_split(paths, TRAIN_FILE)?;
    let shape = train.shape().expect("non-empty");
    let family = cfg.family(shape)?;
    let samples = fit_subset(cfg, &train)?;
    let fit = fit_model(&samples, &family, cfg.components, &cfg.fit_config())?;
    ensure_dir(paths.model.parent().unwrap_or(Path::new(".")))?;
    save_model(&fit.model, &paths.model)?;
    let rows: Vec<LogRow> = fit
        .log
        .iter()
        .map(|r| LogRow {
            component: r.component,
            epoch: r.epoch,
            mean_objective: r.mean_objective,
        })
        .collect();
    write_csv(&paths.file(LOG_FILE), &rows)?;
    println!(
        "fitted {} {} components on {} samples; wrote {}",
        cfg.components,
        family.kind().name(),
        samples.len(),
        paths.model.display()
    );
    Ok(())
}

fn check_shape(model: &GtpcModel, ds: &Dataset, path: &Path) -> Result<(), CliError> {
    let expected = model.family().sample_shape();
    match ds.shape() {
        Some(s) if s != expected => Err(CliError::Invalid(format!(
            "{}: samples have shape {s}, model expects {expected}",
            path.display()
        ))),
        _ => Ok(()),
    }
}

/// Classification labels as seen by the downstream classifier.
fn class_labels(cfg: &ExperimentConfig, ds: &Dataset, path: &Path) -> Result<Vec<usize>, CliError> {
    let labels = ds.labels.as_ref().ok_or_else(|| {
        CliError::Invalid(format!("{}: classification needs labels", path.display()))
    })?;
    let labels = match (cfg.task, cfg.fit_label) {
        (Task::Mnist, Some(digit)) => one_vs_rest(labels, digit),
        _ => labels.clone(),
    };
    Ok(labels.into_iter().map(usize::from).collect())
}

/// One row of `metrics.csv`. `accuracy` is empty unless classification is on.
#[derive(Serialize)]
pub struct MetricRow {
    pub method: &'static str,
    pub k: usize,
    pub resmse: Option<f64>,
    pub accuracy: Option<f64>,
}

fn truncate(features: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    features.iter().map(|f| f[..k].to_vec()).collect()
}

pub fn eval(cfg: &ExperimentConfig, paths: &Paths) -> Result<(), CliError> {
    let model = load_model(&paths.model)?;
    let train = load_split(paths, TRAIN_FILE)?;
    let test = load_split(paths, TEST_FILE)?;
    check_shape(&model, &train, &paths.file(TRAIN_FILE))?;
    check_shape(&model, &test, &paths.file(TEST_FILE))?;
    let big_k = model.len();
    let projector = model.projector()?;

    let fit_samples = fit_subset(cfg, &train)?;
    let dim = fit_samples[0].len();
    let pca_k = big_k.min(fit_samples.len()).min(dim);
    let pca = pca_fit(&fit_samples, pca_k)?;

    let mut rows = Vec::new();
    for k in 1..=big_k {
        rows.push(MetricRow {
            method: "gtpca",
            k,
            resmse: Some(projector.residual_mse(&test.samples, k)?),
            accuracy: None,
        });
    }
    for k in 1..=pca_k {
        rows.push(MetricRow {
            method: "pca",
            k,
            resmse: Some(pca.residual_mse(&test.samples, k)?),
            accuracy: None,
        });
    }

    if cfg.classify {
        let train_y = class_labels(cfg, &train, &paths.file(TRAIN_FILE))?;
        let test_y = class_labels(cfg, &test, &paths.file(TEST_FILE))?;
        let coeffs = |data: &[Sample]| -> Result<Vec<Vec<f64>>, CliError> {
            data.iter()
                .map(|x| Ok(projector.project(x, big_k)?.iter().map(|l| l.coeff).collect()))
                .collect()
        };
        let loadings = |data: &[Sample]| -> Result<Vec<Vec<f64>>, CliError> {
            data.iter().map(|x| Ok(pca.project(x, pca_k)?)).collect()
        };
        let feature_sets = [
            ("gtpca", coeffs(&train.samples)?, coeffs(&test.samples)?),
            ("pca", loadings(&train.samples)?, loadings(&test.samples)?),
        ];
        let root = Rng::new(cfg.seed).split(MLP_STREAM);
        for row in rows.iter_mut() {
            let (_, train_x, test_x) = feature_sets
                .iter()
                .find(|(m, _, _)| *m == row.method)
                .expect("every row has a feature set");
            let stream = if row.method == "gtpca" { 0 } else { 1000 } + row.k as u64;
            let mut rng = root.split(stream);
            let mlp = mlp_fit(&truncate(train_x, row.k), &train_y, cfg.mlp_epochs, &mut rng)?;
            row.accuracy = Some(mlp.accuracy(&truncate(test_x, row.k), &test_y)?);
        }
        rows.push(MetricRow {
            method: "majority",
            k: 0,
            resmse: None,
            accuracy: Some(majority_accuracy(&train_y, &test_y)),
        });
    }

    let path = paths.file(METRICS_FILE);
    ensure_dir(&paths.out)?;
    write_csv(&path, &rows)?;
    println!("{:<9} {:>3} {:>9} {:>9}", "method", "k", "resmse", "accuracy");
    for r in &rows {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!("{:<9} {:>3} {:>9} {:>9}", r.method, r.k, show(r.resmse), show(r.accuracy));
    }
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct LoadingRow {
    sample: usize,
    component: usize,
    transform_index: usize,
    coeff: f64,
}

pub fn export(
    paths: &Paths,
    k: Option<usize>,
    dataset: Option<PathBuf>,
) -> Result<(), CliError> {
    let model = load_model(&paths.model)?;
    let data_path = dataset.unwrap_or_else(|| paths.file(TEST_FILE));
    let ds = load_dataset(&data_path)?;
    check_shape(&model, &ds, &data_path)?;
    let k = k.unwrap_or(model.len());
    let projector = model.projector()?;

    let mut loadings = Vec::with_capacity(ds.len() * k);
    let mut reconstructions = Vec::with_capacity(ds.len());
    for (i, x) in ds.samples.iter().enumerate() {
        let ls = projector.project(x, k)?;
        reconstructions.push(projector.reconstruct(&ls)?);
        loadings.extend(ls.iter().map(|l| LoadingRow {
            sample: i,
            component: l.component,
            transform_index: l.transform,
            coeff: l.coeff,
        }));
    }
    ensure_dir(&paths.out)?;
    write_csv(&paths.file(LOADINGS_FILE), &loadings)?;
    let recon = Dataset::new(reconstructions, ds.labels.clone())?;
    save_dataset(&recon, paths.file(RECONSTRUCTIONS_FILE))?;
    println!(
        "exported {} loadings and {} reconstructions (k = {k}) to {}",
        loadings.len(),
        recon.len(),
        paths.out.display()
    );
    Ok(())
}
