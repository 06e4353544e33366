//! Declarative run configuration: one TOML document drives training,
//! attacks, matrices and sweeps. The canonicalized config (after any
//! command-line overrides) is fingerprinted, and every output artifact
//! embeds that fingerprint so artifacts from different runs cannot be
//! silently mixed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attack::{AttackConfig, AttackMethod, Termination};
use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub run: RunSection,
    pub dataset: DatasetSection,
    pub models: Vec<ModelSection>,
    pub training: TrainingSection,
    pub subset: SubsetSection,
    pub attack: AttackSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSection {
    /// Global seed; sections without their own seed derive from it.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads for per-example parallelism; 0 means all cores.
    /// Outputs are independent of this knob.
    #[serde(default)]
    pub jobs: usize,
    /// Record per-iteration traces in single-attack results.
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSection {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSection {
    pub name: String,
    /// One of the built-in architectures: mlp-a, mlp-b, cnn-a, cnn-b.
    pub arch: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub target_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsetSection {
    pub size: usize,
    pub seed: u64,
    pub min_per_class: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackSection {
    /// Method name, e.g. "nmi-fgsm".
    pub method: String,
    pub epsilon: f64,
    pub delta: f64,
    /// Omit to derive delta / iterations (epsilon / iterations for i-fgsm).
    pub alpha: Option<f64>,
    pub iterations: usize,
    pub decay: f64,
    /// "fixed" or "distance".
    pub termination: String,
    #[serde(default)]
    pub target: Option<usize>,
    /// Diagnostic zero-step mode: the attack returns the original image.
    #[serde(default)]
    pub guard: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSection {
    pub deltas: Vec<f64>,
    pub iterations: Vec<usize>,
    pub decays: Vec<f64>,
    /// Methods for the delta and iteration sweeps.
    pub methods: Vec<String>,
    /// Methods for the decay sweep (momentum methods only).
    pub decay_methods: Vec<String>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            deltas: (1..=10).map(|i| 65.0 * i as f64).collect(),
            iterations: (1..=8).map(|i| 50 * i).collect(),
            decays: (0..=7).map(|i| 0.2 * i as f64).collect(),
            methods: AttackMethod::NEW_TYPE.iter().map(|m| m.to_string()).collect(),
            decay_methods: vec!["nmi-fgsm".into(), "nmi-fgm".into()],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// The desk-scale reference configuration: four models, a screened
    /// subset of 500 test images, delta 650, 250 iterations, decay 0.8.
    pub fn desk_reference(data_dir: &Path, out_dir: &Path) -> Self {
        RunConfig {
            run: RunSection { seed: 42, out_dir: out_dir.to_path_buf(), jobs: 0, trace: false },
            dataset: DatasetSection {
                train_images: data_dir.join("train-images-idx3-ubyte"),
                train_labels: data_dir.join("train-labels-idx1-ubyte"),
                test_images: data_dir.join("t10k-images-idx3-ubyte"),
                test_labels: data_dir.join("t10k-labels-idx1-ubyte"),
            },
            models: vec![
                ModelSection { name: "mlp-a".into(), arch: "mlp-a".into(), seed: 101 },
                ModelSection { name: "mlp-b".into(), arch: "mlp-b".into(), seed: 202 },
                ModelSection { name: "cnn-a".into(), arch: "cnn-a".into(), seed: 303 },
                ModelSection { name: "cnn-b".into(), arch: "cnn-b".into(), seed: 404 },
            ],
            training: TrainingSection {
                learning_rate: 0.15,
                epochs: 40,
                batch_size: 32,
                target_accuracy: Some(0.995),
            },
            subset: SubsetSection { size: 500, seed: 7, min_per_class: Some(45) },
            attack: AttackSection {
                method: "nmi-fgsm".into(),
                epsilon: 32.0,
                delta: 650.0,
                alpha: None,
                iterations: 250,
                decay: 0.8,
                termination: "fixed".into(),
                target: None,
                guard: false,
            },
            sweep: SweepSection::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("at least one model must be defined".into()));
        }
        let mut names: Vec<&str> = self.models.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.models.len() {
            return Err(Error::Config("model names must be unique".into()));
        }
        for m in &self.models {
            crate::net::ModelSpec::by_name(&m.arch)
                .map_err(|e| Error::Config(format!("model {}: {e}", m.name)))?;
        }
        if self.subset.size == 0 {
            return Err(Error::Config("subset size must be at least 1".into()));
        }
        self.attack_config(None)?.validate()?;
        for name in self.sweep.methods.iter().chain(self.sweep.decay_methods.iter()) {
            AttackMethod::parse(name).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Builds the attack configuration, optionally overriding the method.
    pub fn attack_config(&self, method: Option<AttackMethod>) -> Result<AttackConfig> {
        let method = match method {
            Some(m) => m,
            None => AttackMethod::parse(&self.attack.method)?,
        };
        let termination = match self.attack.termination.as_str() {
            "fixed" => Termination::FixedIterations,
            "distance" => Termination::DistanceReached,
            other => {
                return Err(Error::Config(format!(
                    "unknown termination {other:?} (expected \"fixed\" or \"distance\")"
                )))
            }
        };
        Ok(AttackConfig {
            method,
            epsilon: self.attack.epsilon,
            delta: self.attack.delta,
            alpha: self.attack.alpha,
            max_iterations: self.attack.iterations,
            decay: self.attack.decay,
            termination,
            clamp_range: (0.0, 255.0),
            target: self.attack.target,
            zero_step_guard: self.attack.guard,
            record_trace: self.run.trace,
        })
    }

    /// Fingerprint of the canonicalized config. Execution-environment knobs
    /// (output directory, thread count, trace verbosity) are excluded:
    /// outputs must be byte-identical across those settings.
    pub fn fingerprint(&self) -> String {
        let value = serde_json::json!({
            "seed": self.run.seed,
            "dataset": self.dataset,
            "models": self.models,
            "training": self.training,
            "subset": self.subset,
            "attack": self.attack,
            "sweep": self.sweep,
        });
        hash_json(&value)
    }

    /// Fingerprint of the parts that determine the trained model suite
    /// (dataset, model definitions, training hyperparameters). Model files
    /// record this value; evaluation commands refuse to mix suites.
    pub fn suite_fingerprint(&self) -> String {
        let value = serde_json::json!({
            "dataset": self.dataset,
            "models": self.models,
            "training": self.training,
        });
        hash_json(&value)
    }

    pub fn parsed_methods(&self) -> Result<Vec<AttackMethod>> {
        self.sweep.methods.iter().map(|s| AttackMethod::parse(s)).collect()
    }

    pub fn parsed_decay_methods(&self) -> Result<Vec<AttackMethod>> {
        self.sweep.decay_methods.iter().map(|s| AttackMethod::parse(s)).collect()
    }
}

fn hash_json(value: &serde_json::Value) -> String {
    // serde_json maps are ordered, so this serialization is canonical.
    let digest = Sha256::digest(value.to_string().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
