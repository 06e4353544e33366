//! Config-driven command implementations: train the model suite, run single
//! attacks, build transfer matrices, run sweeps, export qualitative panels.
//! The thin CLI binary and the runnable examples both call into here.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::attack::{run_attack, AttackMethod, AttackResult};
use crate::config::RunConfig;
use crate::data::{
    export_image, load_idx, select_eval_subset, write_csv_with_comments, Dataset, EvalSubset,
    ImageFileFormat,
};
use crate::error::Error;
use crate::eval::{
    attack_config_fingerprint, attack_subset, success_rate, sweep_decay, sweep_iterations,
    sweep_perturbation, transfer_matrix, write_matrix_report, write_sweep_report, NamedModel,
    ReportPaths, SuccessCriterion,
};
use crate::net::{load_model, save_model, train, ModelSpec, TrainParams, TrainedModel};
use crate::tensor::{NormOrder, Tensor};
use crate::Result;

/// Which sweep to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Perturbation,
    Iterations,
    Decay,
}

impl SweepKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "perturbation" | "delta" => Ok(SweepKind::Perturbation),
            "iterations" => Ok(SweepKind::Iterations),
            "decay" => Ok(SweepKind::Decay),
            other => Err(Error::invalid(format!(
                "unknown sweep {other:?} (expected perturbation, iterations or decay)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Perturbation => "perturbation",
            SweepKind::Iterations => "iterations",
            SweepKind::Decay => "decay",
        }
    }
}

/// One trained model as recorded in the suite manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelRecord {
    pub name: String,
    pub arch: String,
    pub seed: u64,
    pub epochs_run: usize,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub identity: String,
    pub file: String,
}

/// Manifest written next to the trained model files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub config_fingerprint: String,
    pub suite_fingerprint: String,
    pub models: Vec<ModelRecord>,
}

/// Outcome of `cmd_train`.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub manifest_path: PathBuf,
    pub model_paths: Vec<PathBuf>,
    pub manifest: SuiteManifest,
}

/// Options for `cmd_attack`.
#[derive(Debug, Clone)]
pub struct AttackOptions {
    /// Model name from the config's `[[models]]` list.
    pub model: String,
    /// Index into the test split.
    pub index: usize,
    /// Overrides the config's attack method.
    pub method: Option<AttackMethod>,
}

/// Outcome of `cmd_attack`.
#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub json_path: PathBuf,
    pub original_pgm: PathBuf,
    pub adversarial_pgm: PathBuf,
    pub result: AttackResult,
}

/// Options for `cmd_export`.
#[derive(Debug, Clone)]
pub struct ExportOptions {
    pub model: String,
    pub indices: Vec<usize>,
    pub method: Option<AttackMethod>,
    /// Which parameter the panel varies across its columns.
    pub kind: SweepKind,
}

/// Runs `body` inside a thread pool sized by the config's `jobs` knob.
fn with_pool<T>(config: &RunConfig, body: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.run.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(body)
}

fn load_datasets(config: &RunConfig) -> Result<(Dataset, Dataset)> {
    for (path, what) in [
        (&config.dataset.train_images, "training images"),
        (&config.dataset.train_labels, "training labels"),
        (&config.dataset.test_images, "test images"),
        (&config.dataset.test_labels, "test labels"),
    ] {
        if !path.exists() {
            return Err(Error::Config(format!(
                "{what} file {} does not exist; generate a dataset with the \
                 generate_dataset example or point [dataset] at MNIST-layout IDX files",
                path.display()
            )));
        }
    }
    let mut train = load_idx(&config.dataset.train_images, &config.dataset.train_labels)?;
    let mut test = load_idx(&config.dataset.test_images, &config.dataset.test_labels)?;
    train.split = "train".into();
    test.split = "test".into();
    // Both splits must agree on the class count.
    let classes = train.class_count.max(test.class_count);
    train.class_count = classes;
    test.class_count = classes;
    Ok((train, test))
}

fn models_dir(config: &RunConfig) -> PathBuf {
    config.run.out_dir.join("models")
}

fn manifest_path(config: &RunConfig) -> PathBuf {
    models_dir(config).join("manifest.json")
}

/// Trains every model in the suite and writes model files plus a manifest.
/// Files are only written once every model has trained successfully.
pub fn cmd_train(config: &RunConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let (train_set, test_set) = load_datasets(config)?;

    let trained: Vec<TrainedModel> = with_pool(config, || {
        use rayon::prelude::*;
        config
            .models
            .par_iter()
            .map(|m| {
                let spec = ModelSpec::by_name(&m.arch)?;
                let params = TrainParams {
                    learning_rate: config.training.learning_rate,
                    epochs: config.training.epochs,
                    batch_size: config.training.batch_size,
                    seed: m.seed,
                    target_accuracy: config.training.target_accuracy,
                };
                train(&spec, &train_set.examples, Some(&test_set.examples), &params)
            })
            .collect()
    })?;

    let dir = models_dir(config);
    std::fs::create_dir_all(&dir)?;
    let mut records = Vec::with_capacity(trained.len());
    let mut model_paths = Vec::with_capacity(trained.len());
    for (section, model) in config.models.iter().zip(&trained) {
        let file = format!("{}.ffm", section.name);
        let path = dir.join(&file);
        save_model(model, &path)?;
        let fp = model.fingerprint();
        records.push(ModelRecord {
            name: section.name.clone(),
            arch: section.arch.clone(),
            seed: section.seed,
            epochs_run: fp.epochs_run,
            train_accuracy: fp.train_accuracy,
            test_accuracy: fp.test_accuracy,
            identity: model.identity(),
            file,
        });
        model_paths.push(path);
    }

    let manifest = SuiteManifest {
        config_fingerprint: config.fingerprint(),
        suite_fingerprint: config.suite_fingerprint(),
        models: records,
    };
    let manifest_file = manifest_path(config);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_file, json + "\n")?;

    Ok(TrainOutcome { manifest_path: manifest_file, model_paths, manifest })
}

/// Loads the trained suite, refusing to mix artifacts across configs.
pub fn load_suite(config: &RunConfig) -> Result<(SuiteManifest, Vec<NamedModel>)> {
    let manifest_file = manifest_path(config);
    if !manifest_file.exists() {
        return Err(Error::Config(format!(
            "no trained suite at {}; run the train command first",
            manifest_file.display()
        )));
    }
    let manifest: SuiteManifest = serde_json::from_str(&std::fs::read_to_string(&manifest_file)?)
        .map_err(|e| Error::format(format!("{}: {e}", manifest_file.display())))?;

    let expected = config.suite_fingerprint();
    if manifest.suite_fingerprint != expected {
        return Err(Error::FingerprintMismatch {
            what: "trained model suite".into(),
            expected,
            actual: manifest.suite_fingerprint.clone(),
        });
    }

    let dir = models_dir(config);
    let mut models = Vec::with_capacity(manifest.models.len());
    for record in &manifest.models {
        let model = load_model(&dir.join(&record.file))?;
        let identity = model.identity();
        if identity != record.identity {
            return Err(Error::FingerprintMismatch {
                what: format!("model file {}", record.file),
                expected: record.identity.clone(),
                actual: identity,
            });
        }
        models.push(NamedModel::new(record.name.clone(), model));
    }
    Ok((manifest, models))
}

fn screened_subset(
    config: &RunConfig,
    models: &[NamedModel],
    test: &Dataset,
) -> Result<EvalSubset> {
    let plain: Vec<crate::net::TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
    select_eval_subset(
        &plain,
        test,
        config.subset.size,
        config.subset.seed,
        config.subset.min_per_class,
    )
}

fn report_comments(config: &RunConfig) -> Vec<String> {
    vec![
        format!("config_fingerprint={}", config.fingerprint()),
        format!("suite_fingerprint={}", config.suite_fingerprint()),
        format!("subset_size={} subset_seed={}", config.subset.size, config.subset.seed),
    ]
}

/// Builds the transfer matrix for the configured attack method and writes
/// the CSV and summary reports.
pub fn cmd_matrix(config: &RunConfig) -> Result<ReportPaths> {
    config.validate()?;
    let (_, test) = load_datasets(config)?;
    let (_, models) = load_suite(config)?;
    let attack = config.attack_config(None)?;

    with_pool(config, || {
        let subset = screened_subset(config, &models, &test)?;
        let matrix = transfer_matrix(&models, &test, &subset, &attack)?;
        write_matrix_report(
            &matrix,
            &config.run.out_dir.join("reports"),
            &format!("matrix-{}", attack.method),
            &report_comments(config),
        )
    })
}

/// Runs one of the three sweeps and writes the CSV and summary reports.
/// The decay sweep additionally appends the plain NI-* rates to the summary
/// so the decay-zero equality is visible in the output.
pub fn cmd_sweep(config: &RunConfig, kind: SweepKind) -> Result<ReportPaths> {
    config.validate()?;
    let (_, test) = load_datasets(config)?;
    let (_, models) = load_suite(config)?;
    let base = config.attack_config(None)?;

    with_pool(config, || {
        let subset = screened_subset(config, &models, &test)?;
        let out_dir = config.run.out_dir.join("reports");
        let stem = format!("sweep-{}", kind.name());
        let mut comments = report_comments(config);

        let sweep = match kind {
            SweepKind::Perturbation => sweep_perturbation(
                &models,
                &test,
                &subset,
                &config.parsed_methods()?,
                &config.sweep.deltas,
                &base,
            )?,
            SweepKind::Iterations => sweep_iterations(
                &models,
                &test,
                &subset,
                &config.parsed_methods()?,
                &config.sweep.iterations,
                &base,
            )?,
            SweepKind::Decay => {
                let methods = config.parsed_decay_methods()?;
                let sweep =
                    sweep_decay(&models, &test, &subset, &methods, &config.sweep.decays, &base)?;
                // Reference rates for the momentum-free counterparts.
                for method in &methods {
                    let plain = match method {
                        AttackMethod::NmiFgsm => AttackMethod::NiFgsm,
                        AttackMethod::NmiFgm => AttackMethod::NiFgm,
                        _ => unreachable!("validated momentum methods"),
                    };
                    let mut cfg = base.clone();
                    cfg.method = plain;
                    let results = attack_subset(&models[0].model, &test, &subset, &cfg)?;
                    let rates: Vec<String> = models
                        .iter()
                        .map(|m| {
                            success_rate(&results, &SuccessCriterion::new_type(), &m.model)
                                .map(|r| format!("{r:.4}"))
                        })
                        .collect::<Result<_>>()?;
                    comments.push(format!(
                        "reference {plain} rates (equal to {method} at decay 0): {}",
                        rates.join(" ")
                    ));
                }
                sweep
            }
        };
        write_sweep_report(&sweep, &out_dir, &stem, &comments)
    })
}

/// JSON document written by `cmd_attack`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackReport {
    pub config_fingerprint: String,
    pub suite_fingerprint: String,
    pub attack_config_fingerprint: String,
    pub model: String,
    pub model_identity: String,
    pub method: String,
    pub example_index: usize,
    pub label: usize,
    pub result: AttackResult,
    /// Distances recomputed from the exported 8-bit images, so they can be
    /// verified from the PGM files alone.
    pub exported: ExportedImages,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExportedImages {
    pub original_pgm: String,
    pub adversarial_pgm: String,
    pub distance_l2: f64,
    pub distance_linf: f64,
}

fn rounded(t: &Tensor) -> Tensor {
    Tensor::new(t.shape().to_vec(), t.data().iter().map(|v| v.round()).collect())
        .expect("rounded pixels are finite")
}

/// Attacks a single test example and writes the original and adversarial
/// images side by side plus a machine-readable JSON result.
pub fn cmd_attack(config: &RunConfig, opts: &AttackOptions) -> Result<AttackOutcome> {
    config.validate()?;
    let (_, test) = load_datasets(config)?;
    let (_, models) = load_suite(config)?;
    let named = models
        .iter()
        .find(|m| m.name == opts.model)
        .ok_or_else(|| Error::invalid(format!("unknown model {:?}", opts.model)))?;
    if opts.index >= test.len() {
        return Err(Error::invalid(format!(
            "example index {} out of range for the {}-example test split",
            opts.index,
            test.len()
        )));
    }
    let attack = config.attack_config(opts.method)?;
    let example = &test.examples[opts.index];
    let result = run_attack(&named.model, example, &attack)?;

    let dir = config.run.out_dir.join("attacks");
    std::fs::create_dir_all(&dir)?;
    let original_name = format!("original-{}.pgm", opts.index);
    let adversarial_name = format!("adversarial-{}-{}.pgm", opts.index, attack.method);
    let original_pgm = dir.join(&original_name);
    let adversarial_pgm = dir.join(&adversarial_name);
    export_image(&example.image, &original_pgm, ImageFileFormat::Pgm)?;
    export_image(&result.adversarial, &adversarial_pgm, ImageFileFormat::Pgm)?;

    let diff = rounded(&result.adversarial).sub(&rounded(&example.image)).expect("same shape");
    let report = AttackReport {
        config_fingerprint: config.fingerprint(),
        suite_fingerprint: config.suite_fingerprint(),
        attack_config_fingerprint: attack_config_fingerprint(&attack),
        model: named.name.clone(),
        model_identity: named.model.identity(),
        method: attack.method.to_string(),
        example_index: opts.index,
        label: example.label,
        result: result.clone(),
        exported: ExportedImages {
            original_pgm: original_name,
            adversarial_pgm: adversarial_name,
            distance_l2: diff.norm(NormOrder::L2),
            distance_linf: diff.norm(NormOrder::Linf),
        },
    };
    let json_path = dir.join(format!("result-{}-{}.json", opts.index, attack.method));
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&json_path, json + "\n")?;

    Ok(AttackOutcome { json_path, original_pgm, adversarial_pgm, result })
}

/// Exports qualitative panels: for each requested example, the original
/// image plus one adversarial image per swept parameter value, with an
/// index CSV describing every file.
pub fn cmd_export(config: &RunConfig, opts: &ExportOptions) -> Result<Vec<PathBuf>> {
    config.validate()?;
    if opts.indices.is_empty() {
        return Err(Error::invalid("export needs at least one example index"));
    }
    let (_, test) = load_datasets(config)?;
    let (_, models) = load_suite(config)?;
    let named = models
        .iter()
        .find(|m| m.name == opts.model)
        .ok_or_else(|| Error::invalid(format!("unknown model {:?}", opts.model)))?;
    let base = config.attack_config(opts.method)?;
    if opts.kind == SweepKind::Decay && !base.method.uses_momentum() {
        return Err(Error::invalid(format!(
            "decay panels need a momentum method, got {}",
            base.method
        )));
    }

    let dir = config.run.out_dir.join("panels");
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    let mut rows: Vec<Vec<String>> = Vec::new();

    with_pool(config, || {
        for &index in &opts.indices {
            if index >= test.len() {
                return Err(Error::invalid(format!(
                    "example index {index} out of range for the {}-example test split",
                    test.len()
                )));
            }
            let example = &test.examples[index];
            let original = dir.join(format!("original-{index}.pgm"));
            export_image(&example.image, &original, ImageFileFormat::Pgm)?;
            written.push(original.clone());

            let values: Vec<f64> = match opts.kind {
                SweepKind::Perturbation => config.sweep.deltas.clone(),
                SweepKind::Iterations => {
                    config.sweep.iterations.iter().map(|&n| n as f64).collect()
                }
                SweepKind::Decay => config.sweep.decays.clone(),
            };
            for &value in &values {
                let mut cfg = base.clone();
                match opts.kind {
                    SweepKind::Perturbation => {
                        cfg.delta = value;
                        cfg.alpha = None;
                    }
                    SweepKind::Iterations => {
                        cfg.max_iterations = value as usize;
                        cfg.alpha = None;
                    }
                    SweepKind::Decay => cfg.decay = value,
                }
                let result = run_attack(&named.model, example, &cfg)?;
                let file = format!(
                    "panel-{index}-{}-{}{}.pgm",
                    cfg.method,
                    opts.kind.name(),
                    value
                );
                let path = dir.join(&file);
                export_image(&result.adversarial, &path, ImageFileFormat::Pgm)?;
                rows.push(vec![
                    index.to_string(),
                    example.label.to_string(),
                    cfg.method.to_string(),
                    opts.kind.name().to_string(),
                    value.to_string(),
                    format!("{:.4}", result.distance_l2),
                    format!("{:.4}", result.distance_linf),
                    result.adversarial_prediction.to_string(),
                    file,
                ]);
                written.push(path);
            }
        }
        Ok(())
    })?;

    let index_csv = dir.join("panels.csv");
    let header: Vec<String> = [
        "example", "label", "method", "parameter", "value", "distance_l2", "distance_linf",
        "prediction", "file",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    write_csv_with_comments(
        &[format!("config_fingerprint={}", config.fingerprint())],
        &header,
        &rows,
        &index_csv,
    )?;
    written.push(index_csv);
    Ok(written)
}
