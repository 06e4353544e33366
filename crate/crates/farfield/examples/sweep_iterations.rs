//! Sweeps the iteration count over 50..400 at fixed delta and decay,
//! reporting success rates per method against
//! every model.
//!
//! Usage: `cargo run --release -p farfield --example sweep_iterations`
//! Requires `generate_dataset` and `train_models`.

use std::path::Path;

use farfield::config::RunConfig;
use farfield::runner::{cmd_sweep, SweepKind};

fn main() {
    let config = RunConfig::desk_reference(Path::new("data"), Path::new("runs/example"));
    match cmd_sweep(&config, SweepKind::Iterations) {
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
