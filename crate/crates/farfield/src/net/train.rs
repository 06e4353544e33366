//! Plain seeded SGD training.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::tensor::Tensor;
use crate::Result;

use super::{evaluate_accuracy, LabeledExample, LayerSpec, ModelSpec, TrainedModel, TrainingFingerprint};

/// Hyperparameters for `train`. Everything is deterministic under `seed`.
#[derive(Debug, Clone)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Stop as soon as the end-of-epoch training accuracy reaches this value.
    pub target_accuracy: Option<f64>,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            learning_rate: 0.05,
            epochs: 20,
            batch_size: 32,
            seed: 1,
            target_accuracy: Some(0.99),
        }
    }
}

/// Trains a classifier with minibatch SGD. Initialization and batch order
/// are derived from `params.seed`, so the same call produces bit-identical
/// parameters. `test` is only evaluated for the fingerprint record.
pub fn train(
    spec: &ModelSpec,
    dataset: &[LabeledExample],
    test: Option<&[LabeledExample]>,
    params: &TrainParams,
) -> Result<TrainedModel> {
    if dataset.is_empty() {
        return Err(Error::invalid("training dataset is empty"));
    }
    if params.batch_size == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }
    spec.validate()?;
    for (i, ex) in dataset.iter().enumerate() {
        if ex.label >= spec.class_count {
            return Err(Error::invalid(format!(
                "example {i} has label {} but the model has {} classes",
                ex.label, spec.class_count
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let init = initialize_parameters(spec, &mut rng);
    let mut model = TrainedModel::from_parts(
        spec.clone(),
        init,
        TrainingFingerprint {
            seed: params.seed,
            epochs_run: 0,
            train_accuracy: 0.0,
            test_accuracy: None,
        },
    )?;

    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    let mut epochs_run = 0;
    for _ in 0..params.epochs {
        indices.shuffle(&mut rng);
        for batch in indices.chunks(params.batch_size) {
            let mut acc: Option<Vec<Tensor>> = None;
            for &ix in batch {
                let (_, grads) = model.example_gradients(&dataset[ix])?;
                acc = Some(match acc {
                    None => grads,
                    Some(prev) => prev
                        .iter()
                        .zip(grads.iter())
                        .map(|(a, g)| a.add(g).expect("matching shapes"))
                        .collect(),
                });
            }
            let acc = acc.expect("non-empty batch");
            let step = -params.learning_rate / batch.len() as f64;
            for (p, g) in model.params_mut().iter_mut().zip(acc.iter()) {
                *p = p.add(&g.scale(step)).expect("matching shapes");
            }
        }
        epochs_run += 1;
        if let Some(target) = params.target_accuracy {
            if evaluate_accuracy(&model, dataset)? >= target {
                break;
            }
        }
    }

    let train_accuracy = evaluate_accuracy(&model, dataset)?;
    let test_accuracy = match test {
        Some(t) if !t.is_empty() => Some(evaluate_accuracy(&model, t)?),
        _ => None,
    };
    let fp = model.fingerprint_mut();
    fp.epochs_run = epochs_run;
    fp.train_accuracy = train_accuracy;
    fp.test_accuracy = test_accuracy;
    Ok(model)
}

/// Uniform init in `[-limit, limit]` with `limit = sqrt(6 / (fan_in + fan_out))`;
/// biases start at zero.
fn initialize_parameters(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Vec<Tensor> {
    let mut params = Vec::new();
    for layer in &spec.layers {
        match layer {
            LayerSpec::Dense { inputs, outputs } => {
                let limit = (6.0 / (inputs + outputs) as f64).sqrt();
                params.push(random_tensor(vec![*outputs, *inputs], limit, rng));
                params.push(Tensor::zeros(vec![*outputs]));
            }
            LayerSpec::Conv2d { in_channels, out_channels, kernel, .. } => {
                let fan_in = in_channels * kernel * kernel;
                let fan_out = out_channels * kernel * kernel;
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                params.push(random_tensor(
                    vec![*out_channels, *in_channels, *kernel, *kernel],
                    limit,
                    rng,
                ));
                params.push(Tensor::zeros(vec![*out_channels]));
            }
            _ => {}
        }
    }
    params
}

fn random_tensor(shape: Vec<usize>, limit: f64, rng: &mut ChaCha8Rng) -> Tensor {
    let len = shape.iter().product();
    let data: Vec<f64> = (0..len).map(|_| rng.gen_range(-limit..limit)).collect();
    Tensor::new(shape, data).expect("finite init")
}
