//! Desk-scale acceptance runs. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.
//!
//! Set `GTPCA_MNIST_DIR` to a directory with the four IDX files to run the
//! MNIST criterion; `scripts/fetch_mnist.sh` writes them to `data/mnist`.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gtpca::baselines::{mlp_fit, pca_fit, PcaBasis};
use gtpca::data::{self, MnistSetting};
use gtpca::{fit_model, inner, FitConfig, GtpcModel, Result, Rng, Sample, TransformFamily};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn generate(seed: u64, n: usize, f: impl Fn(&mut Rng) -> Sample) -> Vec<Sample> {
    let mut rng = Rng::new(seed);
    (0..n).map(|_| f(&mut rng)).collect()
}

fn pca_curve(basis: &PcaBasis, data: &[Sample], k: usize) -> Result<Vec<f64>> {
    (1..=k).map(|j| basis.residual_mse(data, j)).collect()
}

fn gtpca_curve(model: &GtpcModel, data: &[Sample], k: usize) -> Result<Vec<f64>> {
    let p = model.projector()?;
    (1..=k).map(|j| p.residual_mse(data, j)).collect()
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn pca_equivalence() -> Result<Outcome> {
    let data = generate(101, 500, |r| data::gen_oscillation(r, 256));
    let family = TransformFamily::identity(gtpca::Shape::D1(256))?;
    // Full-size batches: components 2 and 3 sit in a near-degenerate
    // eigenspace that small-batch noise rotates freely.
    let cfg = FitConfig {
        batch_size: data.len(),
        seed: 1,
        ..FitConfig::default()
    };
    let fit = fit_model(&data, &family, 3, &cfg)?;
    let pca = pca_fit(&data, 3)?;
    let cosines: Vec<f64> = fit
        .model
        .components()
        .iter()
        .zip(&pca.components)
        .map(|(c, p)| inner(&c.weight, p).map(f64::abs))
        .collect::<Result<_>>()?;
    let ours = gtpca_curve(&fit.model, &data, 3)?;
    let theirs = pca_curve(&pca, &data, 3)?;
    let gap = ours
        .iter()
        .zip(&theirs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let ok = cosines.iter().all(|&c| c >= 0.99) && gap <= 0.01;
    Ok(check(
        ok,
        format!(
            "|cos| {} (>= 0.99), ResMSE {} vs PCA {} max gap {gap:.4} (<= 0.01)",
            fmt(&cosines),
            fmt(&ours),
            fmt(&theirs)
        ),
    ))
}

fn oscillation_shifts() -> Result<Outcome> {
    let train = generate(201, 1000, |r| data::gen_oscillation(r, 256));
    let test = generate(202, 1000, |r| data::gen_oscillation(r, 256));
    let family = TransformFamily::shift_1d(512, 256)?;
    let cfg = FitConfig {
        seed: 2,
        ..FitConfig::default()
    };
    let fit = fit_model(&train, &family, 3, &cfg)?;
    let ours = gtpca_curve(&fit.model, &test, 3)?;
    let pca = pca_curve(&pca_fit(&train, 3)?, &test, 3)?;
    let ok = (0.55..=0.72).contains(&ours[0])
        && (0.33..=0.47).contains(&ours[2])
        && pca[2] - ours[2] >= 0.25;
    Ok(check(
        ok,
        format!(
            "test ResMSE {} (k=1 in [0.55, 0.72], k=3 in [0.33, 0.47]); PCA {} margin {:.3} (>= 0.25)",
            fmt(&ours),
            fmt(&pca),
            pca[2] - ours[2]
        ),
    ))
}

fn coefficient_features(model: &GtpcModel, data: &[Sample], k: usize) -> Result<Vec<Vec<f64>>> {
    let p = model.projector()?;
    data.iter()
        .map(|x| Ok(p.project(x, k)?.iter().map(|l| l.coeff).collect()))
        .collect()
}

fn labels_usize(labels: &[u8]) -> Vec<usize> {
    labels.iter().map(|&l| l as usize).collect()
}

fn spike_classification() -> Result<Outcome> {
    let (train, train_labels) = data::gen_spike_mixture(&mut Rng::new(301), 1000, 128, 0.5);
    let (test, test_labels) = data::gen_spike_mixture(&mut Rng::new(302), 1000, 128, 0.5);
    let family = TransformFamily::shift_1d(256, 128)?;
    let cfg = FitConfig {
        seed: 3,
        ..FitConfig::default()
    };
    let fit = fit_model(&train, &family, 1, &cfg)?;
    let resmse = fit.model.residual_mse(&test, 1)?;
    let train_x = coefficient_features(&fit.model, &train, 1)?;
    let test_x = coefficient_features(&fit.model, &test, 1)?;
    let mlp = mlp_fit(&train_x, &labels_usize(&train_labels), 10, &mut Rng::new(303))?;
    let accuracy = mlp.accuracy(&test_x, &labels_usize(&test_labels))?;
    Ok(check(
        resmse <= 0.15 && accuracy >= 0.99,
        format!("test ResMSE_1 {resmse:.3} (<= 0.15), accuracy {accuracy:.3} (>= 0.99)"),
    ))
}

fn spike_identity_equivalence() -> Result<Outcome> {
    let (train, _) = data::gen_spike_mixture(&mut Rng::new(401), 1000, 256, 0.5);
    let (test, _) = data::gen_spike_mixture(&mut Rng::new(402), 1000, 256, 0.5);
    // Equal lengths leave a single offset: the shift family degenerates to the identity.
    let family = TransformFamily::shift_1d(256, 256)?;
    let cfg = FitConfig {
        seed: 4,
        ..FitConfig::default()
    };
    let fit = fit_model(&train, &family, 5, &cfg)?;
    let ours = gtpca_curve(&fit.model, &test, 5)?;
    let pca = pca_curve(&pca_fit(&train, 5)?, &test, 5)?;
    let gap = ours
        .iter()
        .zip(&pca)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(check(
        family.size() == 1 && gap <= 0.03,
        format!("test ResMSE {} vs PCA {} max gap {gap:.4} (<= 0.03)", fmt(&ours), fmt(&pca)),
    ))
}

fn mnist_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("GTPCA_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"));
    dir.join("train-images-idx3-ubyte").is_file().then_some(dir)
}

fn mnist_rotation() -> Result<Outcome> {
    let Some(dir) = mnist_dir() else {
        return Ok(Outcome::Skip(
            "no IDX files found (set GTPCA_MNIST_DIR or run scripts/fetch_mnist.sh); \
             fallback acceptance is criteria 1-4 plus the property suite"
                .into(),
        ));
    };
    let train = data::load_idx(
        dir.join("train-images-idx3-ubyte"),
        dir.join("train-labels-idx1-ubyte"),
    )?;
    let test = data::load_idx(
        dir.join("t10k-images-idx3-ubyte"),
        dir.join("t10k-labels-idx1-ubyte"),
    )?;
    if train.len() < 2000 || test.len() < 1000 {
        return Ok(Outcome::Skip(format!(
            "need 2000/1000 images, found {}/{}",
            train.len(),
            test.len()
        )));
    }
    let mut rng = Rng::new(501);
    let train = data::mnist_setting(&train.images[..2000], MnistSetting::Rotate, &mut rng)?;
    let test = data::mnist_setting(&test.images[..1000], MnistSetting::Rotate, &mut rng)?;
    let family = TransformFamily::rotation_default((28, 28))?;
    let cfg = FitConfig {
        epochs_per_component: 3,
        seed: 5,
        ..FitConfig::default()
    };
    let fit = fit_model(&train, &family, 4, &cfg)?;
    let ours = gtpca_curve(&fit.model, &test, 4)?;
    let pca = pca_curve(&pca_fit(&train, 4)?, &test, 4)?;
    Ok(check(
        ours[3] <= 0.40 && ours[3] < pca[3],
        format!(
            "test ResMSE {} (k=4 <= 0.40), PCA {} (must be above)",
            fmt(&ours),
            fmt(&pca)
        ),
    ))
}

fn property_suite() -> Result<Outcome> {
    use common::*;
    let mut worst = [0.0f64; 6];
    let mut gradient_cases = 0;
    for kind in KINDS {
        let mut rng = Rng::new(600 + kind as u64);
        for _ in 0..100 {
            let family = random_family(kind, &mut rng);
            worst[0] = worst[0].max(adjoint_error(&family, &mut rng));
            worst[1] = worst[1].max(score_error(&family, &mut rng));
            let c = rng.uniform(-1e3, 1e3)?;
            if c.abs() > 1e-3 {
                worst[3] = worst[3].max(scale_error(&family, &mut rng, c));
            }
        }
        let mut found = 0;
        while found < 50 {
            let family = random_family(kind, &mut rng);
            if let Some(e) = gradient_error(&family, &mut rng) {
                worst[2] = worst[2].max(e);
                found += 1;
            }
        }
        gradient_cases += found;
        for _ in 0..20 {
            let family = random_family(kind, &mut rng);
            let model = random_model(&family, 1 + rng.below(4), &mut rng);
            let data: Vec<Sample> = (0..5)
                .map(|_| random_sample(family.sample_shape(), &mut rng))
                .collect();
            worst[4] = worst[4].max(monotonicity_violation(&model, &data));
            for x in &data {
                worst[5] = worst[5].max(orthogonality_error(&model, x));
            }
        }
    }

    let mut rng = Rng::new(700);
    let data: Vec<Sample> = (0..40).map(|_| data::gen_spike(&mut rng, 32)).collect();
    let family = TransformFamily::shift_1d(16, 32)?;
    let cfg = FitConfig {
        epochs_per_component: 1,
        batches_per_epoch: 50,
        seed: 9,
        ..FitConfig::default()
    };
    let a = fit_model(&data, &family, 2, &cfg)?;
    let b = fit_model(&data, &family, 2, &cfg)?;
    let deterministic = gtpca::format::encode_model(&a.model) == gtpca::format::encode_model(&b.model)
        && a.log == b.log;
    let bytes = gtpca::format::encode_model(&a.model);
    let model_round_trip = gtpca::format::encode_model(&gtpca::format::decode_model(&bytes)?) == bytes;
    let dataset = gtpca::format::Dataset::new(data, Some(vec![1; 40]))?;
    let bytes = gtpca::format::encode_dataset(&dataset);
    let dataset_round_trip =
        gtpca::format::encode_dataset(&gtpca::format::decode_dataset(&bytes)?) == bytes;

    let limits = [1e-10, 1e-10, 1e-4, 1e-10, 1e-9, 1e-8];
    let ok = worst.iter().zip(&limits).all(|(w, l)| w <= l)
        && deterministic
        && model_round_trip
        && dataset_round_trip;
    Ok(check(
        ok,
        format!(
            "adjoint {:.1e} (<= 1e-10), fast-vs-naive {:.1e} (<= 1e-10), gradient {:.1e} over {gradient_cases} cases (<= 1e-4), \
             scale {:.1e} (<= 1e-10), monotonicity {:.1e} (<= 1e-9), orthogonality {:.1e} (<= 1e-8), \
             deterministic {deterministic}, GTPC1 {model_round_trip}, GTDS1 {dataset_round_trip}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    ))
}

fn main() -> ExitCode {
    // Cargo passes harness flags such as `--list`; this target has no sub-tests.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    type Criterion = (&'static str, fn() -> Result<Outcome>, Duration);
    let criteria: [Criterion; 6] = [
        ("1 PCA equivalence (identity family)", pca_equivalence, Duration::from_secs(120)),
        ("2 oscillations, shift 512/256", oscillation_shifts, Duration::from_secs(600)),
        ("3 spikes (i), T=128, weight 256", spike_classification, Duration::from_secs(600)),
        ("4 spikes (ii), identity-equivalent", spike_identity_equivalence, Duration::from_secs(600)),
        ("5 MNIST (iv), rotations", mnist_rotation, Duration::from_secs(1800)),
        ("6 property suite", property_suite, Duration::from_secs(600)),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.starts_with(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let timing = format!("{:.1}s of {}s", elapsed.as_secs_f64(), budget.as_secs());
        let line = match outcome {
            Ok(Outcome::Pass(d)) if elapsed <= budget => format!("PASS criterion {name}: {d} [{timing}]"),
            Ok(Outcome::Pass(d)) => {
                failed += 1;
                format!("FAIL criterion {name}: over time budget; {d} [{timing}]")
            }
            Ok(Outcome::Fail(d)) => {
                failed += 1;
                format!("FAIL criterion {name}: {d} [{timing}]")
            }
            Ok(Outcome::Skip(d)) => format!("SKIP criterion {name}: {d}"),
            Err(e) => {
                failed += 1;
                format!("FAIL criterion {name}: error: {e} [{timing}]")
            }
        };
        println!("{line}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
