//! Minimal deterministic neural toolkit shared by the graph encoder and the
//! sequence classifier: dense layers with exact reverse-mode gradients,
//! softmax cross-entropy, SGD/Adam and a versioned binary parameter format.

mod blob;
mod dense;
mod loss;
mod optim;
mod train;

pub use blob::{LayerBlob, ModelBlob, SectionTag, TensorBlob, BLOB_MAGIC, BLOB_VERSION};
pub use dense::{sigmoid, Activation, DenseLayer, Mlp, MlpCache};
pub use loss::{softmax, softmax_cross_entropy};
pub use optim::{Optimizer, OptimizerKind, TrainConfig};
pub use train::fit;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("cache does not match the model or gradient: {0}")]
    StaleCache(String),
    #[error("class index {index} out of range for {classes} classes")]
    ClassIndex { index: usize, classes: usize },
    #[error("non-finite gradient in {path}")]
    NonFinite { path: String },
    #[error("model format: {0}")]
    Format(String),
    #[error("no training data")]
    EmptyData,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Ordered view over a model's trainable tensors.
pub trait Parameters {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;
    fn tensor_names(&self) -> Vec<String>;

    fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}

/// Gradients aligned tensor-for-tensor with [`Parameters::tensors`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Vec<f64>>);

impl Gradients {
    pub fn zeros_like<P: Parameters + ?Sized>(params: &P) -> Self {
        Gradients(
            params
                .tensors()
                .iter()
                .map(|t| vec![0.0; t.len()])
                .collect(),
        )
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        assert_eq!(
            self.0.len(),
            other.0.len(),
            "gradient tensor count mismatch"
        );
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.0 {
            t.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|&x| x == 0.0)
    }

    /// Sums gradients in slice order.
    pub fn sum(parts: &[Gradients]) -> Option<Gradients> {
        let (first, rest) = parts.split_first()?;
        let mut acc = first.clone();
        for g in rest {
            acc.add_assign(g);
        }
        Some(acc)
    }
}
