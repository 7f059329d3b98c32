//! Structural augmentation of compressed graphs: four centralities on the
//! undirected simple projection, folded together with value statistics into
//! a fixed-width node feature matrix.

mod centrality;
mod features;

pub use centrality::{
    betweenness_centrality, closeness_centrality, compute_centralities, degree_centrality,
    pagerank, Adjacency, Centralities, PageRankConfig,
};
pub use features::{
    assemble_node_features, kind_of_row, node_sfe, signed_log1p, transform_sfe, CENTRALITY_OFFSET,
    KIND_OFFSET, NODE_FEATURE_WIDTH, TARGET_OFFSET,
};

use thiserror::Error;

use crate::graph::AddressGraph;
use crate::linalg::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum AugmentError {
    #[error("pagerank did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("node {0} has no values and no incident edges")]
    EmptyNode(usize),
    #[error("centrality vectors do not match node count {0}")]
    Shape(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// A compressed graph reduced to what the encoder consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedGraph {
    pub window_index: usize,
    pub adjacency: Adjacency,
    pub features: Matrix,
}

pub fn augment_graph(
    graph: &AddressGraph,
    pr: &PageRankConfig,
) -> Result<AugmentedGraph, AugmentError> {
    let adjacency = Adjacency::from(graph);
    let centralities = compute_centralities(&adjacency, pr)?;
    let features = assemble_node_features(graph, &centralities)?;
    Ok(AugmentedGraph {
        window_index: graph.window_index,
        adjacency,
        features,
    })
}
