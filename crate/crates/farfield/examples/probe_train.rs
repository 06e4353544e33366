//! Scratch probe: training hyperparameter search on the current synth set.

use farfield::net::{evaluate_accuracy, train, ModelSpec, TrainParams};
use farfield::synth::{generate, SynthSpec};

fn main() {
    let train_set = generate(4000, "train", &SynthSpec { seed: 42, ..SynthSpec::default() });
    let test_set = generate(1000, "test", &SynthSpec { seed: 43, ..SynthSpec::default() });

    for (name, spec) in [("mlp-a", ModelSpec::mlp_a()), ("mlp-b", ModelSpec::mlp_b()), ("cnn-a", ModelSpec::cnn_a()), ("cnn-b", ModelSpec::cnn_b())] {
        for lr in [0.2, 0.15] {
            for bs in [32usize] {
                let m = train(
                    &spec.clone(),
                    &train_set.examples,
                    None,
                    &TrainParams {
                        learning_rate: lr,
                        epochs: 40,
                        batch_size: bs,
                        seed: 101,
                        target_accuracy: Some(0.995),
                    },
                )
                .unwrap();
                let fp = m.fingerprint();
                let test_acc = evaluate_accuracy(&m, &test_set.examples).unwrap();
                println!(
                    "{name} lr {lr:>5} bs {bs:>2}: epochs {:>2} train {:.4} test {test_acc:.4}",
                    fp.epochs_run, fp.train_accuracy
                );
            }
        }
    }
}
