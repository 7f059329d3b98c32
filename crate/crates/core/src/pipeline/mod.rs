//! Staged end-to-end pipeline with on-disk artifacts.
//!
//! Every stage reads its inputs from the work directory, writes its outputs
//! there and records a SHA-256 digest of each artifact in `digests.json`.

mod config;
mod construct;
mod stages;

pub use config::{PipelineConfig, TimingClock};
pub use construct::{construct_address, ConstructedAddress};
pub use stages::{run_all, run_stage, Stage, ARTIFACTS};

use std::path::PathBuf;

use thiserror::Error;

use crate::augment::AugmentError;
use crate::compress::CompressError;
use crate::gfn::GfnError;
use crate::graph::GraphError;
use crate::ingest::IngestError;
use crate::metrics::MetricsError;
use crate::nn::NnError;
use crate::seq::SeqError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("missing artifact {artifact}; run the `{stage}` stage first")]
    Dependency {
        stage: &'static str,
        artifact: PathBuf,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Other(String),
}

impl PipelineError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Input(_) => 3,
            PipelineError::Dependency { .. } => 4,
            PipelineError::Numeric(_) => 5,
            PipelineError::Io { .. } | PipelineError::Other(_) => 1,
        }
    }
}

impl From<IngestError> for PipelineError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Fraction(_) | IngestError::Spec(_) => PipelineError::Config(e.to_string()),
            _ => PipelineError::Input(e.to_string()),
        }
    }
}

impl From<GraphError> for PipelineError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::SliceUnit => PipelineError::Config(e.to_string()),
            _ => PipelineError::Input(e.to_string()),
        }
    }
}

impl From<CompressError> for PipelineError {
    fn from(e: CompressError) -> Self {
        match e {
            CompressError::Config(_) => PipelineError::Config(e.to_string()),
            _ => PipelineError::Input(e.to_string()),
        }
    }
}

impl From<AugmentError> for PipelineError {
    fn from(e: AugmentError) -> Self {
        match e {
            AugmentError::Config(_) => PipelineError::Config(e.to_string()),
            AugmentError::NoConvergence { .. } => PipelineError::Numeric(e.to_string()),
            _ => PipelineError::Input(e.to_string()),
        }
    }
}

impl From<NnError> for PipelineError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::Config(_) => PipelineError::Config(e.to_string()),
            NnError::NonFinite { .. } => PipelineError::Numeric(e.to_string()),
            NnError::EmptyData => PipelineError::Input(e.to_string()),
            _ => PipelineError::Other(e.to_string()),
        }
    }
}

impl From<GfnError> for PipelineError {
    fn from(e: GfnError) -> Self {
        match e {
            GfnError::Nn(inner) => inner.into(),
            GfnError::Config(_) => PipelineError::Config(e.to_string()),
            GfnError::Shape(_) => PipelineError::Other(e.to_string()),
        }
    }
}

impl From<SeqError> for PipelineError {
    fn from(e: SeqError) -> Self {
        match e {
            SeqError::Nn(inner) => inner.into(),
            SeqError::Config(_) => PipelineError::Config(e.to_string()),
            SeqError::EmptySequence => PipelineError::Input(e.to_string()),
            SeqError::Shape(_) => PipelineError::Other(e.to_string()),
        }
    }
}

impl From<MetricsError> for PipelineError {
    fn from(e: MetricsError) -> Self {
        PipelineError::Input(e.to_string())
    }
}
