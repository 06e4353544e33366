//! Scratch probe: trains the suite on synthetic data and reports the trend
//! numbers the acceptance criteria depend on, at reduced scale.

use std::time::Instant;

use farfield::attack::{AttackConfig, AttackMethod};
use farfield::data::select_eval_subset;
use farfield::eval::{attack_subset, success_rate, NamedModel, SuccessCriterion};
use farfield::net::{train, ModelSpec, TrainParams, TrainedModel};
use farfield::synth::{generate, SynthSpec};

fn main() {
    let t0 = Instant::now();
    let train_set = generate(4000, "train", &SynthSpec { seed: 42, ..SynthSpec::default() });
    let test_set = generate(1000, "test", &SynthSpec { seed: 43, ..SynthSpec::default() });
    println!("[{:.1?}] dataset ready", t0.elapsed());

    let archs: Vec<(&str, ModelSpec, u64)> = vec![
        ("mlp-a", ModelSpec::mlp_a(), 101),
        ("mlp-b", ModelSpec::mlp_b(), 202),
        ("cnn-a", ModelSpec::cnn_a(), 303),
        ("cnn-b", ModelSpec::cnn_b(), 404),
    ];
    let mut models: Vec<NamedModel> = Vec::new();
    for (name, spec, seed) in archs {
        let t = Instant::now();
        let m = train(
            &spec,
            &train_set.examples,
            Some(&test_set.examples),
            &TrainParams {
                learning_rate: 0.15,
                epochs: 40,
                batch_size: 32,
                seed,
                target_accuracy: Some(0.995),
            },
        )
        .unwrap();
        let fp = m.fingerprint();
        println!(
            "[{:.1?}] {name}: epochs {} train {:.4} test {:?} ({:.1?})",
            t0.elapsed(),
            fp.epochs_run,
            fp.train_accuracy,
            fp.test_accuracy,
            t.elapsed()
        );
        models.push(NamedModel::new(name, m));
    }

    let plain: Vec<TrainedModel> = models.iter().map(|m| m.model.clone()).collect();
    let subset = select_eval_subset(&plain, &test_set, 100, 7, Some(5)).unwrap();
    println!("[{:.1?}] subset of {} screened", t0.elapsed(), subset.indices.len());

    let criterion = SuccessCriterion::new_type();
    let methods = AttackMethod::NEW_TYPE;

    // Reference config rates, source model 0, all targets.
    println!("--- reference config (delta 650, N 250, mu 0.8), source mlp-a");
    for method in methods {
        let t = Instant::now();
        let cfg = AttackConfig::reference(method);
        let results = attack_subset(&models[0].model, &test_set, &subset, &cfg).unwrap();
        let rates: Vec<f64> = models
            .iter()
            .map(|m| success_rate(&results, &criterion, &m.model).unwrap())
            .collect();
        let mean_d: f64 =
            results.iter().map(|r| r.distance_l2).sum::<f64>() / results.len() as f64;
        let dloss: f64 = results
            .iter()
            .map(|r| r.loss_final - r.loss_initial)
            .sum::<f64>()
            / results.len() as f64;
        println!(
            "{method:>9}: rates {rates:?} meanL2 {mean_d:.0} dLoss {dloss:+.3} ({:.1?})",
            t.elapsed()
        );
    }

    // Other sources at reference config, NMI-FGSM only (diag vs offdiag).
    println!("--- reference config, other sources, nmi-fgsm");
    for si in 1..4 {
        let cfg = AttackConfig::reference(AttackMethod::NmiFgsm);
        let results = attack_subset(&models[si].model, &test_set, &subset, &cfg).unwrap();
        let rates: Vec<f64> = models
            .iter()
            .map(|m| success_rate(&results, &criterion, &m.model).unwrap())
            .collect();
        println!("source {}: rates {rates:?}", models[si].name);
    }

    // Delta endpoints, white-box.
    println!("--- delta endpoints (N 250, mu 0.8), white-box on source");
    for method in methods {
        let mut line = format!("{method:>9}:");
        for delta in [65.0, 325.0, 650.0] {
            let mut cfg = AttackConfig::reference(method);
            cfg.delta = delta;
            cfg.alpha = None;
            let results = attack_subset(&models[0].model, &test_set, &subset, &cfg).unwrap();
            let wb = success_rate(&results, &criterion, &models[0].model).unwrap();
            let mean_d: f64 =
                results.iter().map(|r| r.distance_l2).sum::<f64>() / results.len() as f64;
            line.push_str(&format!(" d{delta}={wb:.1}(L2~{mean_d:.0})"));
        }
        println!("{line}");
    }

    // Iteration endpoints at delta 650.
    println!("--- iteration endpoints (delta 650, mu 0.8), white-box");
    for method in methods {
        let mut line = format!("{method:>9}:");
        for n in [50usize, 400] {
            let mut cfg = AttackConfig::reference(method);
            cfg.max_iterations = n;
            cfg.alpha = None;
            let results = attack_subset(&models[0].model, &test_set, &subset, &cfg).unwrap();
            let wb = success_rate(&results, &criterion, &models[0].model).unwrap();
            line.push_str(&format!(" N{n}={wb:.1}"));
        }
        println!("{line}");
    }

    // Decay shape at delta 650, N 250.
    println!("--- decay shape (delta 650, N 250), white-box");
    for method in [AttackMethod::NmiFgsm, AttackMethod::NmiFgm] {
        let mut line = format!("{method:>9}:");
        for mu in [0.0, 0.5, 1.0, 1.4] {
            let mut cfg = AttackConfig::reference(method);
            cfg.decay = mu;
            let results = attack_subset(&models[0].model, &test_set, &subset, &cfg).unwrap();
            let wb = success_rate(&results, &criterion, &models[0].model).unwrap();
            line.push_str(&format!(" mu{mu}={wb:.1}"));
        }
        println!("{line}");
    }

    println!("[{:.1?}] probe done", t0.elapsed());
}
