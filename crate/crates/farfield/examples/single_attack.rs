//! Runs one far-field attack against one test image and writes the original
//! and adversarial images side by side plus a JSON result.
//!
//! Usage:
//!   cargo run --release -p farfield --example single_attack [method] [index] [model]
//! (defaults: nmi-fgsm, 0, mlp-a). Requires `generate_dataset` and
//! `train_models` to have run with their default paths.

use std::path::Path;

use farfield::attack::AttackMethod;
use farfield::config::RunConfig;
use farfield::runner::{cmd_attack, AttackOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let method = args.next().map(|m| AttackMethod::parse(&m).expect("valid method"));
    let index: usize = args.next().map_or(0, |s| s.parse().expect("numeric index"));
    let model = args.next().unwrap_or_else(|| "mlp-a".to_string());

    let mut config = RunConfig::desk_reference(Path::new("data"), Path::new("runs/example"));
    config.run.trace = true;

    let outcome = match cmd_attack(&config, &AttackOptions { model, index, method }) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    };

    let r = &outcome.result;
    println!("result json:   {}", outcome.json_path.display());
    println!("original pgm:  {}", outcome.original_pgm.display());
    println!("adversarial:   {}", outcome.adversarial_pgm.display());
    println!(
        "iterations {}  distance L2 {:.1}  Linf {:.1}",
        r.iterations_used, r.distance_l2, r.distance_linf
    );
    println!(
        "prediction {} -> {}  loss {:.4} -> {:.4}  stop {:?}",
        r.original_prediction, r.adversarial_prediction, r.loss_initial, r.loss_final, r.stop_reason
    );
    if let Some(trace) = &r.trace {
        for p in trace.iter().step_by((trace.len() / 8).max(1)) {
            println!("  iter {:>4}  loss {:>9.5}  distance {:>8.2}", p.iteration, p.loss, p.distance);
        }
    }
}
