//! Heterogeneous address/transaction slice graphs.
//!
//! An address history is cut into fixed-size chronological windows and each
//! window becomes one bipartite graph: address-kind nodes on one side,
//! transaction nodes on the other, with valued edges recording who funded
//! or received what.

mod build;
mod dump;

pub use build::{build_window_graph, slice_history, TxWindow, DEFAULT_SLICE_UNIT};
pub use dump::dump_graph;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("address {0:?} has an empty history")]
    EmptyHistory(String),
    #[error("target address {0:?} does not participate in the window")]
    TargetMissing(String),
    #[error("slice unit must be at least 1")]
    SliceUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    PlainAddress,
    TransactionNode,
    SingleTxHyper,
    MultiTxHyper,
}

impl NodeKind {
    pub const ALL: [NodeKind; 4] = [
        NodeKind::PlainAddress,
        NodeKind::TransactionNode,
        NodeKind::SingleTxHyper,
        NodeKind::MultiTxHyper,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_address_side(self) -> bool {
        !matches!(self, NodeKind::TransactionNode)
    }

    pub fn is_hyper(self) -> bool {
        matches!(self, NodeKind::SingleTxHyper | NodeKind::MultiTxHyper)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    pub key: String,
    pub is_target: bool,
    /// Satoshi amounts absorbed by compression; empty for uncompressed nodes.
    pub raw_values: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// The address funds the transaction.
    Input,
    /// The transaction pays the address.
    Output,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Input => "input",
            Direction::Output => "output",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub address_node: usize,
    pub tx_node: usize,
    pub direction: Direction,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub target_node: usize,
    pub window_index: usize,
}

impl AddressGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of incident edges per node (parallel edges counted separately).
    pub fn edge_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for e in &self.edges {
            deg[e.address_node] += 1;
            deg[e.tx_node] += 1;
        }
        deg
    }

    /// Undirected simple projection: sorted, deduplicated neighbor lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![BTreeSet::new(); self.nodes.len()];
        for e in &self.edges {
            if e.address_node != e.tx_node {
                sets[e.address_node].insert(e.tx_node);
                sets[e.tx_node].insert(e.address_node);
            }
        }
        sets.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    pub fn incident_values(&self) -> Vec<Vec<u64>> {
        let mut vals = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            vals[e.address_node].push(e.value);
            vals[e.tx_node].push(e.value);
        }
        vals
    }

    pub fn total_edge_value(&self) -> u128 {
        self.edges.iter().map(|e| e.value as u128).sum()
    }

    pub fn count_kind(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Every edge joins an address-side node to a transaction node.
    pub fn is_bipartite(&self) -> bool {
        self.edges.iter().all(|e| {
            self.nodes[e.address_node].kind.is_address_side()
                && self.nodes[e.tx_node].kind == NodeKind::TransactionNode
        })
    }

    /// Rebuilds the graph keeping only nodes where `keep[i]` is true and
    /// remapping edge endpoints. Edges touching dropped nodes are discarded.
    pub(crate) fn retain_nodes(&mut self, keep: &[bool]) {
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, node) in std::mem::take(&mut self.nodes).into_iter().enumerate() {
            if keep[i] {
                remap[i] = nodes.len();
                nodes.push(node);
            }
        }
        self.nodes = nodes;
        self.edges
            .retain(|e| keep[e.address_node] && keep[e.tx_node]);
        for e in &mut self.edges {
            e.address_node = remap[e.address_node];
            e.tx_node = remap[e.tx_node];
        }
        self.target_node = remap[self.target_node];
    }
}
