use crate::compress::{sfe_u64, SfeVector, SFE_WIDTH};
use crate::graph::{AddressGraph, NodeKind};
use crate::linalg::Matrix;

use super::{AugmentError, Centralities};

pub const NODE_FEATURE_WIDTH: usize = SFE_WIDTH + 4 + 1 + 4;
pub const KIND_OFFSET: usize = SFE_WIDTH;
pub const TARGET_OFFSET: usize = SFE_WIDTH + 4;
pub const CENTRALITY_OFFSET: usize = SFE_WIDTH + 5;

/// How each SFE component is rescaled before it enters the feature row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scale {
    SignedLog,
    Log,
    Raw,
}

const SFE_SCALES: [Scale; SFE_WIDTH] = [
    Scale::SignedLog, // max
    Scale::SignedLog, // min
    Scale::SignedLog, // sum
    Scale::SignedLog, // mean
    Scale::Log,       // count
    Scale::SignedLog, // range
    Scale::SignedLog, // mid_range
    Scale::SignedLog, // p25
    Scale::SignedLog, // p50
    Scale::SignedLog, // p75
    Scale::Log,       // variance
    Scale::SignedLog, // std_dev
    Scale::SignedLog, // mean_abs_dev
    Scale::Raw,       // coeff_variation
    Scale::Raw,       // kurtosis
    Scale::Raw,       // skewness
    Scale::Raw,       // tilt
];

pub fn signed_log1p(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

pub fn transform_sfe(s: &SfeVector) -> [f64; SFE_WIDTH] {
    let mut out = [0.0; SFE_WIDTH];
    for (i, (&v, scale)) in s.0.iter().zip(SFE_SCALES).enumerate() {
        out[i] = match scale {
            Scale::SignedLog => signed_log1p(v),
            Scale::Log => v.ln_1p(),
            Scale::Raw => v,
        };
    }
    out
}

/// Per-node SFE: hyper nodes summarize their absorbed values, every other
/// node its incident edge values.
pub fn node_sfe(graph: &AddressGraph) -> Result<Vec<SfeVector>, AugmentError> {
    let incident = graph.incident_values();
    graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let values = if node.raw_values.is_empty() {
                &incident[i]
            } else {
                &node.raw_values
            };
            sfe_u64(values).map_err(|_| AugmentError::EmptyNode(i))
        })
        .collect()
}

/// Builds the `n × 26` feature matrix: transformed SFE, node-kind one-hot,
/// target flag, then degree/closeness/betweenness/pagerank.
pub fn assemble_node_features(
    graph: &AddressGraph,
    centralities: &Centralities,
) -> Result<Matrix, AugmentError> {
    let n = graph.node_count();
    if [
        &centralities.degree,
        &centralities.closeness,
        &centralities.betweenness,
        &centralities.pagerank,
    ]
    .iter()
    .any(|c| c.len() != n)
    {
        return Err(AugmentError::Shape(n));
    }
    let sfes = node_sfe(graph)?;
    let mut x = Matrix::zeros(n, NODE_FEATURE_WIDTH);
    for (i, node) in graph.nodes.iter().enumerate() {
        let row = x.row_mut(i);
        row[..SFE_WIDTH].copy_from_slice(&transform_sfe(&sfes[i]));
        row[KIND_OFFSET + node.kind.index()] = 1.0;
        row[TARGET_OFFSET] = if node.is_target { 1.0 } else { 0.0 };
        row[CENTRALITY_OFFSET] = centralities.degree[i];
        row[CENTRALITY_OFFSET + 1] = centralities.closeness[i];
        row[CENTRALITY_OFFSET + 2] = centralities.betweenness[i];
        row[CENTRALITY_OFFSET + 3] = centralities.pagerank[i];
    }
    Ok(x)
}

pub fn kind_of_row(row: &[f64]) -> Option<NodeKind> {
    NodeKind::ALL
        .into_iter()
        .find(|k| row[KIND_OFFSET + k.index()] == 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::{compute_centralities, Adjacency, PageRankConfig};
    use crate::compress::compress_single_tx_addresses;
    use crate::graph::{build_window_graph, TxWindow};
    use crate::ingest::{Transaction, TxIo};
    use std::sync::Arc;

    fn graph() -> AddressGraph {
        let tx = |id: &str, ins: &[(&str, u64)], outs: &[(&str, u64)]| {
            Arc::new(Transaction {
                tx_id: id.into(),
                timestamp: 0,
                block_height: 0,
                inputs: ins.iter().map(|&(a, v)| TxIo::new(a, v)).collect(),
                outputs: outs.iter().map(|&(a, v)| TxIo::new(a, v)).collect(),
            })
        };
        let w = TxWindow {
            index: 0,
            transactions: vec![
                tx("t1", &[("a", 500), ("x", 20)], &[("y", 300), ("b", 220)]),
                tx("t2", &[("b", 200)], &[("a", 150), ("z", 50)]),
            ],
        };
        compress_single_tx_addresses(&build_window_graph(&w, "a").unwrap())
    }

    #[test]
    fn width_one_hot_and_target() {
        let g = graph();
        let c = compute_centralities(&Adjacency::from(&g), &PageRankConfig::default()).unwrap();
        let x = assemble_node_features(&g, &c).unwrap();
        assert_eq!(x.cols(), 26);
        for (i, node) in g.nodes.iter().enumerate() {
            let row = x.row(i);
            let one_hot: f64 = row[KIND_OFFSET..KIND_OFFSET + 4].iter().sum();
            assert_eq!(one_hot, 1.0);
            assert_eq!(kind_of_row(row), Some(node.kind));
            assert_eq!(
                row[TARGET_OFFSET],
                if i == g.target_node { 1.0 } else { 0.0 }
            );
        }
    }

    #[test]
    fn transaction_row_summarizes_incident_edges() {
        let g = graph();
        let c = compute_centralities(&Adjacency::from(&g), &PageRankConfig::default()).unwrap();
        let x = assemble_node_features(&g, &c).unwrap();
        // t1 carries edges 500, 20, 300, 220 (some via hyper nodes)
        let t1 = g.nodes.iter().position(|n| n.key == "t1").unwrap();
        assert!((x[(t1, 2)] - signed_log1p(1040.0)).abs() < 1e-12);
        assert!((x[(t1, 4)] - 4f64.ln_1p()).abs() < 1e-12);
    }

    #[test]
    fn empty_node_is_error() {
        let mut g = graph();
        g.edges.retain(|e| e.address_node != g.target_node);
        let c = compute_centralities(&Adjacency::from(&g), &PageRankConfig::default()).unwrap();
        assert_eq!(
            assemble_node_features(&g, &c).unwrap_err(),
            AugmentError::EmptyNode(g.target_node)
        );
    }

    #[test]
    fn signed_log_is_odd() {
        assert_eq!(signed_log1p(0.0), 0.0);
        assert_eq!(signed_log1p(-3.0), -signed_log1p(3.0));
    }
}
