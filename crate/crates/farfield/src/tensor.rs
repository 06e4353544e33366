//! Dense `f64` tensors and the handful of elementwise and reduction
//! operations the attack arithmetic is built from.
//!
//! Tensors are immutable values: every operation returns a fresh tensor and
//! leaves its operands untouched, so they are safe to share across threads.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Which vector norm to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormOrder {
    L1,
    L2,
    Linf,
}

/// Dense numeric array: a shape and a flat row-major `f64` buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor, validating that the buffer matches the shape and
    /// holds only finite values.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::invalid(format!(
                "shape {:?} implies {} elements, buffer has {}",
                shape,
                expected,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite element {bad}")));
        }
        Ok(Tensor { shape, data })
    }

    /// 1-D tensor from a slice.
    pub fn from_slice(values: &[f64]) -> Self {
        Tensor {
            shape: vec![values.len()],
            data: values.to_vec(),
        }
    }

    /// All-zeros tensor of the given shape.
    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; len],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Reinterprets the buffer under a new shape of equal length.
    pub fn reshape(&self, shape: Vec<usize>) -> Result<Tensor> {
        let expected: usize = shape.iter().product();
        if expected != self.data.len() {
            return Err(Error::invalid(format!(
                "cannot reshape {} elements into {:?}",
                self.data.len(),
                shape
            )));
        }
        Ok(Tensor {
            shape,
            data: self.data.clone(),
        })
    }

    /// Elementwise sign: -1, 0 or +1 per element, with sign(0) = 0.
    pub fn sign(&self) -> Tensor {
        self.map(|v| {
            if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Vector norm of the flattened buffer.
    pub fn norm(&self, order: NormOrder) -> f64 {
        match order {
            NormOrder::L1 => self.data.iter().map(|v| v.abs()).sum(),
            NormOrder::L2 => self.data.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormOrder::Linf => self.data.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Clamps every element into `[lo, hi]`.
    pub fn clamp(&self, lo: f64, hi: f64) -> Result<Tensor> {
        if lo > hi {
            return Err(Error::invalid(format!("clamp bounds inverted: {lo} > {hi}")));
        }
        Ok(self.map(|v| v.clamp(lo, hi)))
    }

    /// Elementwise sum. Errors when shapes differ.
    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip(other, |a, b| a + b)
    }

    /// Elementwise difference. Errors when shapes differ.
    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip(other, |a, b| a - b)
    }

    /// Multiplies every element by a finite scalar.
    pub fn scale(&self, c: f64) -> Tensor {
        assert!(c.is_finite(), "scale factor must be finite");
        self.map(|v| v * c)
    }

    /// Elementwise product. Errors when shapes differ.
    pub fn hadamard(&self, other: &Tensor) -> Result<Tensor> {
        self.zip(other, |a, b| a * b)
    }

    /// Clips each element of `self` into `[center_i - eps, center_i + eps]`.
    pub fn clip_to_ball(&self, center: &Tensor, eps: f64) -> Result<Tensor> {
        if eps < 0.0 {
            return Err(Error::invalid(format!("negative ball radius {eps}")));
        }
        self.zip(center, |v, c| v.clamp(c - eps, c + eps))
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                actual: other.shape.clone(),
            });
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}
