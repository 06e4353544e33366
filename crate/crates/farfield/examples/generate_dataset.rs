//! Writes the synthetic 28x28 dataset as MNIST-layout IDX files.
//!
//! Usage: `cargo run --release -p farfield --example generate_dataset [dir]`
//! (default directory: `data`).

use std::path::PathBuf;

fn main() {
    let dir = std::env::args().nth(1).map_or_else(|| PathBuf::from("data"), PathBuf::from);
    let (train, test) = farfield::synth::write_dataset(&dir, 6000, 2000, 42)
        .expect("dataset generation failed");
    println!(
        "wrote {} training and {} test examples ({} classes) to {}",
        train.len(),
        test.len(),
        train.class_count,
        dir.display()
    );
    println!("files: train-images-idx3-ubyte train-labels-idx1-ubyte t10k-images-idx3-ubyte t10k-labels-idx1-ubyte");
}
