//! Checks the analytic input gradients of all four architectures against
//! central finite differences. Every attack rests on these gradients, so
//! this is the first thing to run when something looks off.
//!
//! Usage: `cargo run --release -p farfield --example gradient_check`

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use farfield::net::{train, LabeledExample, ModelSpec, TrainParams};
use farfield::tensor::Tensor;

fn main() {
    let specs = [
        ("mlp-a", ModelSpec::mlp_a()),
        ("mlp-b", ModelSpec::mlp_b()),
        ("cnn-a", ModelSpec::cnn_a()),
        ("cnn-b", ModelSpec::cnn_b()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(12345);
    let mut worst: f64 = 0.0;

    for (name, spec) in specs {
        // Zero-epoch training yields seeded random parameters.
        let dummy = vec![LabeledExample { image: Tensor::zeros(vec![28, 28]), label: 0 }];
        let model = train(
            &spec,
            &dummy,
            None,
            &TrainParams { epochs: 0, seed: rng.gen(), ..TrainParams::default() },
        )
        .expect("model builds");

        let pixels: Vec<f64> = (0..784).map(|_| rng.gen_range(0.0..255.0)).collect();
        let image = Tensor::new(vec![28, 28], pixels).unwrap();
        let label = rng.gen_range(0..10);
        let grad = model.input_gradient(&image, label).expect("gradient");

        let mut max_rel: f64 = 0.0;
        for _ in 0..30 {
            let ix = rng.gen_range(0..784);
            let h = 1e-4;
            let mut plus = image.data().to_vec();
            let mut minus = image.data().to_vec();
            plus[ix] += h;
            minus[ix] -= h;
            let jp = model.loss(&Tensor::new(vec![28, 28], plus).unwrap(), label).unwrap();
            let jm = model.loss(&Tensor::new(vec![28, 28], minus).unwrap(), label).unwrap();
            let numeric = (jp - jm) / (2.0 * h);
            let analytic = grad.data()[ix];
            let rel = (numeric - analytic).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            max_rel = max_rel.max(rel);
        }
        worst = worst.max(max_rel);
        println!("{name:>6}: max relative gradient error over 30 coordinates = {max_rel:.3e}");
    }

    if worst < 1e-4 {
        println!("all gradients agree with finite differences (worst {worst:.3e})");
    } else {
        println!("GRADIENT MISMATCH: worst relative error {worst:.3e}");
        std::process::exit(1);
    }
}
