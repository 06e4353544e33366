//! Sweeps the momentum decay factor over 0.0..1.4 for the momentum methods,
//! at fixed delta and iterations, reporting success rates against
//! every model.
//!
//! Usage: `cargo run --release -p farfield --example sweep_decay`
//! Requires `generate_dataset` and `train_models`.

use std::path::Path;

use farfield::config::RunConfig;
use farfield::runner::{cmd_sweep, SweepKind};

fn main() {
    let config = RunConfig::desk_reference(Path::new("data"), Path::new("runs/example"));
    match cmd_sweep(&config, SweepKind::Decay) {
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
