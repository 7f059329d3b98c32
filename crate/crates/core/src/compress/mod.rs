//! Two-stage address node compression.
//!
//! The single-transaction pass folds every degree-1 address hanging off one
//! side of a transaction into a hyper node. The multi-transaction pass groups
//! addresses with overlapping transaction sets using the shared-transaction
//! similarity `M = (A·Aᵀ)·D⁻¹`, thresholded by `psi`, and merges groups whose
//! seed has more than `sigma` similar neighbors.

mod multi;
mod sfe;
mod single;

pub use multi::{address_similarity, compress_multi_tx_addresses, SimilarityWorkspace};
pub use sfe::{sfe, sfe_u64, SfeVector, SFE_WIDTH};
pub use single::compress_single_tx_addresses;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CompressError {
    #[error("statistics requested for an empty value list")]
    EmptyInput,
    #[error("address node {0} has no transactions")]
    MalformedGraph(usize),
    #[error("invalid compression config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionConfig {
    /// Similarity threshold in (0, 1].
    pub psi: f64,
    /// Minimum number of similar addresses (exclusive) for a seed to merge.
    pub sigma: usize,
}

impl Default for CompressionConfig {
    fn default() -> Self {
        Self { psi: 0.5, sigma: 2 }
    }
}

impl CompressionConfig {
    pub fn validate(&self) -> Result<(), CompressError> {
        if !(self.psi > 0.0 && self.psi <= 1.0) {
            return Err(CompressError::Config(format!(
                "psi {} outside (0, 1]",
                self.psi
            )));
        }
        Ok(())
    }
}
