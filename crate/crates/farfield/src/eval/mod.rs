//! Evaluation harness: success-rate metrics, the white-box/black-box
//! transfer matrix, and the three hyperparameter sweeps.
//!
//! Success for the far-field methods counts an adversarial image as a hit
//! when the *target* model still assigns it the original class (optionally
//! requiring a minimum distance); for the classic methods a hit is a
//! misclassification. Target-model predictions are always recomputed on the
//! stored adversarial tensors rather than trusted from generation time.

mod report;

pub use report::{write_matrix_report, write_sweep_report, ReportPaths};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::attack::{run_attack, AttackConfig, AttackMethod, AttackResult};
use crate::data::{Dataset, EvalSubset};
use crate::error::Error;
use crate::net::TrainedModel;
use crate::tensor::NormOrder;
use crate::Result;

/// What counts as a successful attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessMode {
    /// Far-field success: still classified as the original class.
    NewType,
    /// Classic success: classified as anything else.
    Classic,
}

/// Success predicate applied to attack results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessCriterion {
    pub mode: SuccessMode,
    /// Minimum distance for a far-field hit, if required.
    pub distance_floor: Option<f64>,
    /// Norm the floor is measured in.
    pub distance_norm: NormOrder,
}

impl SuccessCriterion {
    /// Far-field success with no distance floor.
    pub fn new_type() -> Self {
        SuccessCriterion { mode: SuccessMode::NewType, distance_floor: None, distance_norm: NormOrder::L2 }
    }

    /// Far-field success requiring at least `floor` L2 distance.
    pub fn new_type_with_floor(floor: f64) -> Self {
        SuccessCriterion {
            mode: SuccessMode::NewType,
            distance_floor: Some(floor),
            distance_norm: NormOrder::L2,
        }
    }

    pub fn classic() -> Self {
        SuccessCriterion { mode: SuccessMode::Classic, distance_floor: None, distance_norm: NormOrder::L2 }
    }
}

/// A model plus the name it is reported under.
#[derive(Debug, Clone)]
pub struct NamedModel {
    pub name: String,
    pub model: TrainedModel,
}

impl NamedModel {
    pub fn new(name: impl Into<String>, model: TrainedModel) -> Self {
        NamedModel { name: name.into(), model }
    }
}

/// Success rate in percent of `results` against a (possibly different)
/// target model. Predictions are recomputed on the stored adversarial
/// tensors.
pub fn success_rate(
    results: &[AttackResult],
    criterion: &SuccessCriterion,
    target: &TrainedModel,
) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::invalid("success rate of an empty result set is undefined"));
    }
    let mut hits = 0usize;
    for r in results {
        let prediction = target.predict(&r.adversarial)?;
        let same_class = prediction == r.original_prediction;
        let hit = match criterion.mode {
            SuccessMode::Classic => !same_class,
            SuccessMode::NewType => {
                let far_enough = match criterion.distance_floor {
                    None => true,
                    Some(floor) => {
                        let d = match criterion.distance_norm {
                            NormOrder::Linf => r.distance_linf,
                            _ => r.distance_l2,
                        };
                        d >= floor
                    }
                };
                same_class && far_enough
            }
        };
        if hit {
            hits += 1;
        }
    }
    Ok(100.0 * hits as f64 / results.len() as f64)
}

/// Runs one attack configuration over every subset example of `dataset`
/// against `model`. Parallel across examples; the output order equals the
/// subset order, so results are identical to a sequential run.
pub fn attack_subset(
    model: &TrainedModel,
    dataset: &Dataset,
    subset: &EvalSubset,
    config: &AttackConfig,
) -> Result<Vec<AttackResult>> {
    config.validate()?;
    let examples = subset.examples(dataset);
    examples
        .par_iter()
        .enumerate()
        .map(|(i, ex)| {
            run_attack(&model.clone(), *ex, config).map_err(|e| {
                Error::invalid(format!("attack failed on subset example {i}: {e}"))
            })
        })
        .collect()
}

/// The white-box/black-box grid: rows generate, columns evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub method: AttackMethod,
    pub model_names: Vec<String>,
    /// `rates[source][target]` in percent.
    pub rates: Vec<Vec<f64>>,
    pub config_fingerprint: String,
}

impl TransferMatrix {
    /// The diagonal is the white-box setting.
    pub fn is_white_box(&self, source: usize, target: usize) -> bool {
        source == target
    }
}

/// Builds the transfer matrix for `config.method`: adversarial examples are
/// generated once per source model and the same results are evaluated
/// against every target.
pub fn transfer_matrix(
    models: &[NamedModel],
    dataset: &Dataset,
    subset: &EvalSubset,
    config: &AttackConfig,
) -> Result<TransferMatrix> {
    if models.is_empty() {
        return Err(Error::invalid("transfer matrix needs at least one model"));
    }
    let plain: Vec<TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
    subset.check_models(&plain)?;

    let criterion = SuccessCriterion::new_type();
    let mut rates = Vec::with_capacity(models.len());
    for (si, source) in models.iter().enumerate() {
        let results = attack_subset(&source.model, dataset, subset, config).map_err(|e| {
            Error::invalid(format!("source {} ({si}): {e}", source.name))
        })?;
        // Generation on a screened subset starts from correctly classified
        // examples, so the stored original predictions are the labels.
        debug_assert!(results
            .iter()
            .zip(subset.examples(dataset))
            .all(|(r, ex)| r.original_prediction == ex.label));
        let mut row = Vec::with_capacity(models.len());
        for target in models {
            row.push(success_rate(&results, &criterion, &target.model)?);
        }
        rates.push(row);
    }
    Ok(TransferMatrix {
        method: config.method,
        model_names: models.iter().map(|m| m.name.clone()).collect(),
        rates,
        config_fingerprint: attack_config_fingerprint(config),
    })
}

/// One hyperparameter sweep: per swept value, per method, per target model.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Name of the swept parameter: "delta", "iterations" or "decay".
    pub parameter: String,
    pub values: Vec<f64>,
    pub methods: Vec<AttackMethod>,
    pub targets: Vec<String>,
    /// `rates[value][method][target]` in percent.
    pub rates: Vec<Vec<Vec<f64>>>,
    /// Fingerprint of the fixed part of the configuration.
    pub fixed_fingerprint: String,
}

impl SweepResult {
    /// Rate for (value index, method, target index).
    pub fn rate(&self, value_ix: usize, method: AttackMethod, target_ix: usize) -> Option<f64> {
        let mi = self.methods.iter().position(|&m| m == method)?;
        Some(self.rates[value_ix][mi][target_ix])
    }
}

fn check_strictly_increasing(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(format!("{what} sweep needs at least one value")));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("{what} sweep values must be strictly increasing")));
    }
    Ok(())
}

/// Shared sweep loop. Adversarial examples are generated on the *first*
/// model and evaluated against every model.
fn sweep<F>(
    models: &[NamedModel],
    dataset: &Dataset,
    subset: &EvalSubset,
    methods: &[AttackMethod],
    parameter: &str,
    values: &[f64],
    base: &AttackConfig,
    configure: F,
) -> Result<SweepResult>
where
    F: Fn(&AttackConfig, f64, AttackMethod) -> AttackConfig,
{
    if models.is_empty() {
        return Err(Error::invalid("sweep needs at least one model"));
    }
    if methods.is_empty() {
        return Err(Error::invalid("sweep needs at least one method"));
    }
    check_strictly_increasing(values, parameter)?;
    let plain: Vec<TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
    subset.check_models(&plain)?;

    let source = &models[0];
    let criterion = SuccessCriterion::new_type();
    let mut rates = Vec::with_capacity(values.len());
    for &value in values {
        let mut per_method = Vec::with_capacity(methods.len());
        for &method in methods {
            let config = configure(base, value, method);
            config.validate()?;
            let results = attack_subset(&source.model, dataset, subset, &config)?;
            let mut per_target = Vec::with_capacity(models.len());
            for target in models {
                per_target.push(success_rate(&results, &criterion, &target.model)?);
            }
            per_method.push(per_target);
        }
        rates.push(per_method);
    }

    let mut fixed = base.clone();
    fixed.method = methods[0];
    Ok(SweepResult {
        parameter: parameter.to_string(),
        values: values.to_vec(),
        methods: methods.to_vec(),
        targets: models.iter().map(|m| m.name.clone()).collect(),
        rates,
        fixed_fingerprint: attack_config_fingerprint(&fixed),
    })
}

/// Sweeps the distance budget `delta`; iterations and decay stay fixed and
/// the step size is re-derived as `delta / N` for every run.
pub fn sweep_perturbation(
    models: &[NamedModel],
    dataset: &Dataset,
    subset: &EvalSubset,
    methods: &[AttackMethod],
    deltas: &[f64],
    base: &AttackConfig,
) -> Result<SweepResult> {
    sweep(models, dataset, subset, methods, "delta", deltas, base, |b, delta, method| {
        let mut c = b.clone();
        c.method = method;
        c.delta = delta;
        c.alpha = None;
        c
    })
}

/// Sweeps the iteration count; `delta` and decay stay fixed and the step
/// size is re-derived as `delta / N` for every run.
pub fn sweep_iterations(
    models: &[NamedModel],
    dataset: &Dataset,
    subset: &EvalSubset,
    methods: &[AttackMethod],
    iteration_counts: &[usize],
    base: &AttackConfig,
) -> Result<SweepResult> {
    let values: Vec<f64> = iteration_counts.iter().map(|&n| n as f64).collect();
    sweep(models, dataset, subset, methods, "iterations", &values, base, |b, n, method| {
        let mut c = b.clone();
        c.method = method;
        c.max_iterations = n as usize;
        c.alpha = None;
        c
    })
}

/// Sweeps the momentum decay factor for the momentum methods only.
pub fn sweep_decay(
    models: &[NamedModel],
    dataset: &Dataset,
    subset: &EvalSubset,
    methods: &[AttackMethod],
    mus: &[f64],
    base: &AttackConfig,
) -> Result<SweepResult> {
    if let Some(bad) = methods.iter().find(|m| !m.uses_momentum()) {
        return Err(Error::invalid(format!(
            "decay sweep accepts momentum methods only, got {bad}"
        )));
    }
    if mus.iter().any(|&m| m < 0.0) {
        return Err(Error::invalid("decay values must be non-negative"));
    }
    sweep(models, dataset, subset, methods, "decay", mus, base, |b, mu, method| {
        let mut c = b.clone();
        c.method = method;
        c.decay = mu;
        c
    })
}

/// Short stable hash of an attack configuration, recorded into reports so
/// artifacts from different runs cannot be silently mixed.
pub fn attack_config_fingerprint(config: &AttackConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::select_eval_subset;
    use crate::net::{train, LabeledExample, LayerSpec, ModelSpec, TrainParams, TrainedModel};
    use crate::tensor::Tensor;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_dataset(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let examples = (0..n)
            .map(|i| {
                let label = i % 2;
                let base: f64 = if label == 0 { 50.0 } else { 200.0 };
                let image = Tensor::from_slice(&[
                    (base + rng.gen_range(-25.0..25.0)).clamp(0.0, 255.0),
                    (base + rng.gen_range(-25.0..25.0)).clamp(0.0, 255.0),
                ]);
                LabeledExample { image, label }
            })
            .collect();
        Dataset::new(examples, 2, "toy", "test").unwrap()
    }

    fn toy_model(seed: u64, data: &Dataset) -> TrainedModel {
        let spec = ModelSpec {
            layers: vec![
                LayerSpec::Dense { inputs: 2, outputs: 8 },
                LayerSpec::Relu,
                LayerSpec::Dense { inputs: 8, outputs: 2 },
            ],
            input_shape: vec![2],
            class_count: 2,
        };
        train(
            &spec,
            &data.examples,
            None,
            &TrainParams { learning_rate: 0.5, epochs: 80, seed, ..TrainParams::default() },
        )
        .unwrap()
    }

    fn guard_config() -> AttackConfig {
        let mut c = AttackConfig::new(AttackMethod::NiFgsm);
        c.zero_step_guard = true;
        c
    }

    #[test]
    fn success_rate_counts_fixture() {
        // Build 10 synthetic results: 3 keep the original class, 7 flip.
        let data = toy_dataset(40, 1);
        let model = toy_model(2, &data);
        let subset = select_eval_subset(std::slice::from_ref(&model), &data, 10, 3, None).unwrap();
        let mut results = attack_subset(&model, &data, &subset, &guard_config()).unwrap();
        // Guard results all keep the class; flip 7 by swapping in an image
        // from the opposite class.
        let donor: Vec<usize> = (0..data.len())
            .filter(|&i| !subset.indices.contains(&i))
            .collect();
        let mut flipped = 0;
        for r in results.iter_mut() {
            if flipped == 7 {
                break;
            }
            let other = donor
                .iter()
                .find(|&&d| data.examples[d].label != r.original_prediction)
                .copied()
                .unwrap();
            r.adversarial = data.examples[other].image.clone();
            flipped += 1;
        }
        let rate = success_rate(&results, &SuccessCriterion::new_type(), &model).unwrap();
        assert_eq!(rate, 30.0);
        let classic = success_rate(&results, &SuccessCriterion::classic(), &model).unwrap();
        assert_eq!(classic, 70.0);
    }

    #[test]
    fn success_rate_rejects_empty() {
        let data = toy_dataset(10, 1);
        let model = toy_model(2, &data);
        assert!(success_rate(&[], &SuccessCriterion::new_type(), &model).is_err());
    }

    #[test]
    fn distance_floor_filters_close_results() {
        let data = toy_dataset(40, 5);
        let model = toy_model(6, &data);
        let subset = select_eval_subset(std::slice::from_ref(&model), &data, 10, 3, None).unwrap();
        let results = attack_subset(&model, &data, &subset, &guard_config()).unwrap();
        // Guard results have zero distance, so any positive floor fails all.
        let gated = success_rate(
            &results,
            &SuccessCriterion::new_type_with_floor(1.0),
            &model,
        )
        .unwrap();
        assert_eq!(gated, 0.0);
        let ungated = success_rate(&results, &SuccessCriterion::new_type(), &model).unwrap();
        assert_eq!(ungated, 100.0);
    }

    #[test]
    fn guard_matrix_is_all_hundred_on_screened_subset() {
        let data = toy_dataset(60, 7);
        let models = vec![
            NamedModel::new("a", toy_model(8, &data)),
            NamedModel::new("b", toy_model(9, &data)),
        ];
        let plain: Vec<TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
        let subset = select_eval_subset(&plain, &data, 20, 11, None).unwrap();
        let matrix = transfer_matrix(&models, &data, &subset, &guard_config()).unwrap();
        for row in &matrix.rates {
            for &cell in row {
                assert_eq!(cell, 100.0);
            }
        }
    }

    #[test]
    fn single_model_guard_matrix_is_one_by_one_hundred() {
        let data = toy_dataset(30, 13);
        let models = vec![NamedModel::new("only", toy_model(14, &data))];
        let plain: Vec<TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
        let subset = select_eval_subset(&plain, &data, 10, 15, None).unwrap();
        let matrix = transfer_matrix(&models, &data, &subset, &guard_config()).unwrap();
        assert_eq!(matrix.rates, vec![vec![100.0]]);
        assert!(matrix.is_white_box(0, 0));
    }

    #[test]
    fn matrix_cells_match_success_rate_on_same_results() {
        let data = toy_dataset(60, 17);
        let models = vec![
            NamedModel::new("a", toy_model(18, &data)),
            NamedModel::new("b", toy_model(19, &data)),
        ];
        let plain: Vec<TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
        let subset = select_eval_subset(&plain, &data, 15, 21, None).unwrap();

        let mut cfg = AttackConfig::new(AttackMethod::NiFgsm);
        cfg.alpha = Some(2.0);
        cfg.max_iterations = 10;
        let matrix = transfer_matrix(&models, &data, &subset, &cfg).unwrap();

        // Recompute row 0 from cached results.
        let results = attack_subset(&models[0].model, &data, &subset, &cfg).unwrap();
        for (t, target) in models.iter().enumerate() {
            let rate = success_rate(&results, &SuccessCriterion::new_type(), &target.model).unwrap();
            assert_eq!(matrix.rates[0][t], rate);
        }
    }

    #[test]
    fn matrix_rejects_unscreened_model_suite() {
        let data = toy_dataset(40, 23);
        let screened = vec![NamedModel::new("a", toy_model(24, &data))];
        let plain: Vec<TrainedModel> = screened.iter().map(|m| m.model.clone()).collect();
        let subset = select_eval_subset(&plain, &data, 10, 25, None).unwrap();
        let other = vec![NamedModel::new("a", toy_model(99, &data))];
        assert!(matches!(
            transfer_matrix(&other, &data, &subset, &guard_config()),
            Err(Error::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn sweep_values_must_increase() {
        let data = toy_dataset(30, 27);
        let models = vec![NamedModel::new("a", toy_model(28, &data))];
        let plain: Vec<TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
        let subset = select_eval_subset(&plain, &data, 10, 29, None).unwrap();
        let base = AttackConfig::new(AttackMethod::NiFgsm);
        let err = sweep_perturbation(
            &models,
            &data,
            &subset,
            &[AttackMethod::NiFgsm],
            &[10.0, 10.0],
            &base,
        );
        assert!(err.is_err());
    }

    #[test]
    fn decay_sweep_rejects_non_momentum_methods() {
        let data = toy_dataset(30, 31);
        let models = vec![NamedModel::new("a", toy_model(32, &data))];
        let plain: Vec<TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
        let subset = select_eval_subset(&plain, &data, 10, 33, None).unwrap();
        let base = AttackConfig::new(AttackMethod::NmiFgsm);
        let err = sweep_decay(&models, &data, &subset, &[AttackMethod::NiFgsm], &[0.0, 0.5], &base);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn decay_sweep_mu_zero_equals_plain_methods_exactly() {
        let data = toy_dataset(50, 35);
        let models = vec![
            NamedModel::new("a", toy_model(36, &data)),
            NamedModel::new("b", toy_model(37, &data)),
        ];
        let plain: Vec<TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
        let subset = select_eval_subset(&plain, &data, 12, 39, None).unwrap();

        let mut base = AttackConfig::new(AttackMethod::NmiFgsm);
        base.alpha = Some(1.5);
        base.max_iterations = 12;
        let swept = sweep_decay(
            &models,
            &data,
            &subset,
            &[AttackMethod::NmiFgsm, AttackMethod::NmiFgm],
            &[0.0, 0.8],
            &base,
        )
        .unwrap();

        for (plain_method, momentum_method) in
            [(AttackMethod::NiFgsm, AttackMethod::NmiFgsm), (AttackMethod::NiFgm, AttackMethod::NmiFgm)]
        {
            let mut cfg = base.clone();
            cfg.method = plain_method;
            let results = attack_subset(&models[0].model, &data, &subset, &cfg).unwrap();
            for (t, target) in models.iter().enumerate() {
                let ni_rate =
                    success_rate(&results, &SuccessCriterion::new_type(), &target.model).unwrap();
                let mu0 = swept.rate(0, momentum_method, t).unwrap();
                assert_eq!(mu0, ni_rate, "{momentum_method} vs {plain_method} target {t}");
            }
        }
    }

    #[test]
    fn sweep_iterations_single_point_matches_direct_run() {
        let data = toy_dataset(40, 41);
        let models = vec![NamedModel::new("a", toy_model(42, &data))];
        let plain: Vec<TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
        let subset = select_eval_subset(&plain, &data, 10, 43, None).unwrap();

        let mut base = AttackConfig::new(AttackMethod::NiFgsm);
        base.delta = 30.0;
        let swept = sweep_iterations(
            &models,
            &data,
            &subset,
            &[AttackMethod::NiFgsm],
            &[8],
            &base,
        )
        .unwrap();

        let mut direct = base.clone();
        direct.max_iterations = 8;
        direct.alpha = None;
        let results = attack_subset(&models[0].model, &data, &subset, &direct).unwrap();
        let rate = success_rate(&results, &SuccessCriterion::new_type(), &models[0].model).unwrap();
        assert_eq!(swept.rates[0][0][0], rate);
    }

    #[test]
    fn parallel_and_sequential_attack_runs_agree() {
        let data = toy_dataset(40, 45);
        let model = toy_model(46, &data);
        let subset = select_eval_subset(std::slice::from_ref(&model), &data, 12, 47, None).unwrap();
        let mut cfg = AttackConfig::new(AttackMethod::NmiFgm);
        cfg.alpha = Some(1.0);
        cfg.max_iterations = 8;

        let parallel = attack_subset(&model, &data, &subset, &cfg).unwrap();
        // Sequential reference.
        let sequential: Vec<AttackResult> = subset
            .examples(&data)
            .iter()
            .map(|ex| run_attack(&model, ex, &cfg).unwrap())
            .collect();
        assert_eq!(parallel, sequential);
    }
}
