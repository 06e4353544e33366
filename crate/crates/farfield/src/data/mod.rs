//! Dataset ingestion, evaluation-subset selection, and image/report export.

mod csv_out;
mod idx;
mod image_out;

pub use csv_out::{write_csv, write_csv_with_comments};
pub use idx::{load_idx, write_idx_images, write_idx_labels};
pub use image_out::{export_image, read_pgm, ImageFileFormat};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::net::{LabeledExample, TrainedModel};
use crate::Result;

/// An immutable set of labeled images with uniform shape.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub examples: Vec<LabeledExample>,
    pub class_count: usize,
    pub name: String,
    /// Split tag, e.g. "train" or "test".
    pub split: String,
}

impl Dataset {
    /// Builds a dataset, checking shape uniformity and label range.
    pub fn new(
        examples: Vec<LabeledExample>,
        class_count: usize,
        name: impl Into<String>,
        split: impl Into<String>,
    ) -> Result<Self> {
        if let Some(first) = examples.first() {
            let shape = first.image.shape().to_vec();
            for (i, ex) in examples.iter().enumerate() {
                if ex.image.shape() != shape {
                    return Err(Error::invalid(format!(
                        "example {i} has shape {:?}, expected {:?}",
                        ex.image.shape(),
                        shape
                    )));
                }
                if ex.label >= class_count {
                    return Err(Error::invalid(format!(
                        "example {i} has label {} but class count is {class_count}",
                        ex.label
                    )));
                }
            }
        }
        Ok(Dataset {
            examples,
            class_count,
            name: name.into(),
            split: split.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Indices of dataset examples that every screened model classifies
/// correctly, plus the identities of those models.
#[derive(Debug, Clone)]
pub struct EvalSubset {
    pub indices: Vec<usize>,
    pub model_identities: Vec<String>,
}

impl EvalSubset {
    /// The screened examples themselves, in index order.
    pub fn examples<'a>(&self, dataset: &'a Dataset) -> Vec<&'a LabeledExample> {
        self.indices.iter().map(|&i| &dataset.examples[i]).collect()
    }

    /// Errors unless the given models are exactly the screened ones.
    pub fn check_models(&self, models: &[TrainedModel]) -> Result<()> {
        let current: Vec<String> = models.iter().map(|m| m.identity()).collect();
        if current != self.model_identities {
            return Err(Error::FingerprintMismatch {
                what: "evaluation subset screening models".into(),
                expected: self.model_identities.join(","),
                actual: current.join(","),
            });
        }
        Ok(())
    }
}

/// Draws `n` example indices, uniformly without replacement, from the pool
/// of examples that *every* model classifies correctly. Deterministic under
/// `seed`. With `min_per_class` set, that many picks per class are drawn
/// first (uniformly within each class pool) before the remainder is filled
/// uniformly from the rest.
pub fn select_eval_subset(
    models: &[TrainedModel],
    dataset: &Dataset,
    n: usize,
    seed: u64,
    min_per_class: Option<usize>,
) -> Result<EvalSubset> {
    if n == 0 {
        return Err(Error::invalid("subset size must be at least 1"));
    }
    if models.is_empty() {
        return Err(Error::invalid("at least one model is required for screening"));
    }

    let mut pool = Vec::new();
    for (i, ex) in dataset.examples.iter().enumerate() {
        let mut all_correct = true;
        for model in models {
            if model.predict(&ex.image)? != ex.label {
                all_correct = false;
                break;
            }
        }
        if all_correct {
            pool.push(i);
        }
    }
    if pool.len() < n {
        return Err(Error::InsufficientPool { requested: n, available: pool.len() });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: Vec<usize> = match min_per_class {
        None => {
            let mut shuffled = pool.clone();
            shuffled.shuffle(&mut rng);
            shuffled.truncate(n);
            shuffled
        }
        Some(k) => {
            let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.class_count];
            for &i in &pool {
                per_class[dataset.examples[i].label].push(i);
            }
            if k * dataset.class_count > n {
                return Err(Error::invalid(format!(
                    "min_per_class {k} over {} classes exceeds subset size {n}",
                    dataset.class_count
                )));
            }
            let mut chosen = Vec::with_capacity(n);
            let mut rest = Vec::new();
            for (class, mut ids) in per_class.into_iter().enumerate() {
                if ids.len() < k {
                    return Err(Error::InsufficientPool {
                        requested: k,
                        available: ids.len(),
                    }
                    .tag_class(class));
                }
                ids.shuffle(&mut rng);
                chosen.extend_from_slice(&ids[..k]);
                rest.extend_from_slice(&ids[k..]);
            }
            rest.shuffle(&mut rng);
            chosen.extend_from_slice(&rest[..n - chosen.len()]);
            chosen
        }
    };

    let mut indices = chosen;
    indices.sort_unstable();
    Ok(EvalSubset {
        indices,
        model_identities: models.iter().map(|m| m.identity()).collect(),
    })
}

impl Error {
    fn tag_class(self, class: usize) -> Error {
        match self {
            Error::InsufficientPool { requested, available } => Error::InvalidArgument(format!(
                "class {class}: needs {requested} correctly-classified examples, pool has {available}"
            )),
            other => other,
        }
    }
}
