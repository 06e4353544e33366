//! Far-field adversarial examples.
//!
//! Most adversarial-example tooling looks for a small perturbation that flips
//! a classifier's answer. This crate does the opposite: it generates inputs
//! that are *far* from the original image (distance at least `delta`) yet are
//! still assigned the original class by a chosen network. It implements the
//! negative-direction iterative attacks NI-FGSM, NI-FGM and their momentum
//! variants NMI-FGSM, NMI-FGM, alongside the classic FGSM / FGM / I-FGSM
//! baselines, over small self-trained classifiers, plus an evaluation harness
//! for white-box/black-box transfer matrices and hyperparameter sweeps.
//!
//! The runnable programs under `examples/` are the primary interface; each
//! one exercises a major capability end to end:
//!
//! ```text
//! cargo run --release -p farfield --example generate_dataset
//! cargo run --release -p farfield --example train_models
//! cargo run --release -p farfield --example single_attack
//! cargo run --release -p farfield --example transfer_matrix
//! cargo run --release -p farfield --example sweep_perturbation
//! cargo run --release -p farfield --example sweep_iterations
//! cargo run --release -p farfield --example sweep_decay
//! cargo run --release -p farfield --example gradient_check
//! ```
//!
//! A thin config-driven command-line front end lives in the `farfield-cli`
//! crate and wraps the same [`runner`] entry points.

pub mod attack;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod net;
pub mod runner;
pub mod synth;
pub mod tensor;

pub use attack::{run_attack, AttackConfig, AttackMethod, AttackResult, StopReason, Termination};
pub use error::Error;
pub use net::{train, LabeledExample, ModelSpec, TrainParams, TrainedModel};
pub use tensor::{NormOrder, Tensor};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
