//! Trains the four-model desk-scale suite and writes model files plus the
//! suite manifest.
//!
//! Usage: `cargo run --release -p farfield --example train_models [data_dir] [out_dir]`
//! (defaults: `data`, `runs/example`). Run `generate_dataset` first.

use std::path::PathBuf;

use farfield::config::RunConfig;
use farfield::runner::cmd_train;

fn main() {
    let mut args = std::env::args().skip(1);
    let data_dir = args.next().map_or_else(|| PathBuf::from("data"), PathBuf::from);
    let out_dir = args.next().map_or_else(|| PathBuf::from("runs/example"), PathBuf::from);

    let config = RunConfig::desk_reference(&data_dir, &out_dir);
    let outcome = match cmd_train(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    };

    println!("suite manifest: {}", outcome.manifest_path.display());
    for record in &outcome.manifest.models {
        println!(
            "  {:>6}  arch {:>6}  seed {:>4}  epochs {:>2}  train {:.4}  test {}",
            record.name,
            record.arch,
            record.seed,
            record.epochs_run,
            record.train_accuracy,
            record.test_accuracy.map_or("n/a".into(), |a| format!("{a:.4}")),
        );
    }
}
