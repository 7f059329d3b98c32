//! Graph feature network: multi-hop propagated features `[d, X, ÃX, …, ÃᵏX]`
//! fed through a node MLP, summed over nodes and projected to a fixed-width
//! graph embedding.

mod model;
mod propagate;

pub use model::{GfnModel, GfnTrace};
pub use propagate::{augment_features, graph_input, normalized_adjacency, NormalizedAdjacency};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::nn::{fit, NnError, TrainConfig};

#[derive(Debug, Error, PartialEq)]
pub enum GfnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid GFN configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GfnConfig {
    /// Propagation order.
    pub k: usize,
    pub node_hidden: usize,
    pub embed_dim: usize,
    pub class_count: usize,
}

impl Default for GfnConfig {
    fn default() -> Self {
        Self {
            k: 3,
            node_hidden: 64,
            embed_dim: 64,
            class_count: 4,
        }
    }
}

impl GfnConfig {
    pub fn validate(&self) -> Result<(), GfnError> {
        if self.node_hidden == 0 || self.embed_dim == 0 || self.class_count == 0 {
            return Err(GfnError::Config("widths must be >= 1".into()));
        }
        Ok(())
    }

    /// Width of X^G for node features of width `f`.
    pub fn input_width(&self, f: usize) -> usize {
        1 + (self.k + 1) * f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEmbedding {
    pub window_index: usize,
    pub vector: Vec<f64>,
}

/// Precomputed X^G of one slice graph with its class index.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    pub input: Matrix,
    pub label: usize,
}

/// Trains `head ∘ encode` with softmax cross-entropy on slice graphs that
/// carry their parent address's label.
pub fn pretrain_gfn(
    data: &[LabeledGraph],
    config: &GfnConfig,
    train: &TrainConfig,
) -> Result<(GfnModel, Vec<f64>), GfnError> {
    config.validate()?;
    let first = data.first().ok_or(NnError::EmptyData)?;
    let width = first.input.cols();
    if width == 0 || (width - 1) % (config.k + 1) != 0 {
        return Err(GfnError::Shape(format!(
            "X^G width {width} incompatible with k = {}",
            config.k
        )));
    }
    let feature_width = (width - 1) / (config.k + 1);
    let mut model = GfnModel::new(*config, feature_width, train.seed)?;
    model.fit_normalization(data.iter().map(|g| &g.input));
    let history = fit(&mut model, data.len(), train, |m: &GfnModel, i| {
        let g = &data[i];
        m.loss_and_gradients(&g.input, g.label)
    })?;
    Ok((model, history))
}
