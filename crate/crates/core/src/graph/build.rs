use std::collections::HashMap;
use std::sync::Arc;

use crate::ingest::{AddressRecord, Transaction};

use super::{AddressGraph, Direction, Edge, GraphError, Node, NodeKind};

pub const DEFAULT_SLICE_UNIT: usize = 100;

#[derive(Debug, Clone)]
pub struct TxWindow {
    pub index: usize,
    pub transactions: Vec<Arc<Transaction>>,
}

/// Cuts the history into consecutive windows of `unit` transactions; the
/// last window keeps the remainder.
pub fn slice_history(record: &AddressRecord, unit: usize) -> Result<Vec<TxWindow>, GraphError> {
    if unit == 0 {
        return Err(GraphError::SliceUnit);
    }
    if record.history.is_empty() {
        return Err(GraphError::EmptyHistory(record.address.clone()));
    }
    Ok(record
        .history
        .chunks(unit)
        .enumerate()
        .map(|(index, chunk)| TxWindow {
            index,
            transactions: chunk.to_vec(),
        })
        .collect())
}

pub fn build_window_graph(window: &TxWindow, target: &str) -> Result<AddressGraph, GraphError> {
    if !window.transactions.iter().any(|tx| tx.involves(target)) {
        return Err(GraphError::TargetMissing(target.to_string()));
    }

    let mut nodes = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut address_index: HashMap<&str, usize> = HashMap::new();

    for tx in &window.transactions {
        let tx_node = nodes.len();
        nodes.push(Node {
            kind: NodeKind::TransactionNode,
            key: tx.tx_id.clone(),
            is_target: false,
            raw_values: Vec::new(),
        });
        // (address node, direction) -> edge index within this transaction
        let mut local: HashMap<(usize, Direction), usize> = HashMap::new();
        let sides = [
            (Direction::Input, &tx.inputs),
            (Direction::Output, &tx.outputs),
        ];
        for (direction, ios) in sides {
            for io in ios {
                let addr_node = *address_index.entry(io.address.as_str()).or_insert_with(|| {
                    nodes.push(Node {
                        kind: NodeKind::PlainAddress,
                        key: io.address.clone(),
                        is_target: io.address == target,
                        raw_values: Vec::new(),
                    });
                    nodes.len() - 1
                });
                match local.get(&(addr_node, direction)) {
                    Some(&ei) => edges[ei].value += io.value,
                    None => {
                        local.insert((addr_node, direction), edges.len());
                        edges.push(Edge {
                            address_node: addr_node,
                            tx_node,
                            direction,
                            value: io.value,
                        });
                    }
                }
            }
        }
    }

    let target_node = address_index[target];
    Ok(AddressGraph {
        nodes,
        edges,
        target_node,
        window_index: window.index,
    })
}
