//! Builds the white-box/black-box transfer matrix at the reference
//! configuration: adversarial examples are generated on each model in turn
//! and evaluated against all four.
//!
//! Usage: `cargo run --release -p farfield --example transfer_matrix [method]`
//! (default: nmi-fgsm). Requires `generate_dataset` and `train_models`.

use std::path::Path;

use farfield::config::RunConfig;
use farfield::runner::cmd_matrix;

fn main() {
    let mut config = RunConfig::desk_reference(Path::new("data"), Path::new("runs/example"));
    if let Some(method) = std::env::args().nth(1) {
        config.attack.method = method;
    }

    match cmd_matrix(&config) {
        Ok(paths) => {
            println!("csv:     {}", paths.csv.display());
            println!("summary: {}", paths.summary.display());
            print!("{}", std::fs::read_to_string(&paths.summary).expect("summary readable"));
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
