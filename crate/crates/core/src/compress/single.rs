use std::collections::BTreeMap;

use crate::graph::{AddressGraph, Direction, Edge, Node, NodeKind};

/// Replaces, per transaction and side, all non-target plain addresses with a
/// single incident edge by one `SingleTxHyper` node carrying their values.
pub fn compress_single_tx_addresses(graph: &AddressGraph) -> AddressGraph {
    let degree = graph.edge_degrees();
    // (tx node, direction) -> edge indices being folded
    let mut groups: BTreeMap<(usize, Direction), Vec<usize>> = BTreeMap::new();
    for (ei, e) in graph.edges.iter().enumerate() {
        let node = &graph.nodes[e.address_node];
        if node.kind == NodeKind::PlainAddress && !node.is_target && degree[e.address_node] == 1 {
            groups.entry((e.tx_node, e.direction)).or_default().push(ei);
        }
    }
    if groups.is_empty() {
        return graph.clone();
    }

    let mut out = graph.clone();
    let mut keep = vec![true; graph.nodes.len()];
    for edge_ids in groups.values() {
        for &ei in edge_ids {
            keep[graph.edges[ei].address_node] = false;
        }
    }
    // Hyper nodes are appended after the survivors, so their indices are
    // known once the survivor count is.
    out.retain_nodes(&keep);
    let remap = survivor_remap(&keep);
    for ((tx_node, direction), edge_ids) in groups {
        let raw_values: Vec<u64> = edge_ids.iter().map(|&ei| graph.edges[ei].value).collect();
        let hyper = out.nodes.len();
        out.nodes.push(Node {
            kind: NodeKind::SingleTxHyper,
            key: format!("s:{}:{}", graph.nodes[tx_node].key, direction),
            is_target: false,
            raw_values: raw_values.clone(),
        });
        out.edges.push(Edge {
            address_node: hyper,
            tx_node: remap[tx_node],
            direction,
            value: raw_values.iter().sum(),
        });
    }
    out
}

pub(super) fn survivor_remap(keep: &[bool]) -> Vec<usize> {
    let mut next = 0;
    keep.iter()
        .map(|&k| {
            if k {
                next += 1;
                next - 1
            } else {
                usize::MAX
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::sfe_u64;
    use crate::graph::{build_window_graph, TxWindow};
    use crate::ingest::{Transaction, TxIo};
    use std::sync::Arc;

    type Io<'a> = &'a [(&'a str, u64)];

    fn window(txs: &[(&str, Io, Io)]) -> TxWindow {
        TxWindow {
            index: 0,
            transactions: txs
                .iter()
                .map(|(id, ins, outs)| {
                    Arc::new(Transaction {
                        tx_id: id.to_string(),
                        timestamp: 0,
                        block_height: 0,
                        inputs: ins.iter().map(|&(a, v)| TxIo::new(a, v)).collect(),
                        outputs: outs.iter().map(|&(a, v)| TxIo::new(a, v)).collect(),
                    })
                })
                .collect(),
        }
    }

    #[test]
    fn three_inputs_fold_into_one() {
        let w = window(&[("t", &[("x", 1), ("y", 2), ("z", 3)], &[("a", 6)])]);
        let g = build_window_graph(&w, "a").unwrap();
        let c = compress_single_tx_addresses(&g);
        let hypers: Vec<_> = c
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::SingleTxHyper)
            .collect();
        assert_eq!(hypers.len(), 1);
        let s = sfe_u64(&hypers[0].raw_values).unwrap();
        assert_eq!(s.sum(), 6.0);
        assert_eq!(s.count(), 3.0);
        // target untouched, tx + target + hyper remain
        assert_eq!(c.nodes.len(), 3);
        assert!(c.nodes[c.target_node].is_target);
        assert_eq!(c.total_edge_value(), g.total_edge_value());
    }

    #[test]
    fn no_single_tx_addresses_is_identity() {
        let w = window(&[
            ("t1", &[("a", 2)], &[("b", 2)]),
            ("t2", &[("b", 2)], &[("a", 2)]),
        ]);
        let g = build_window_graph(&w, "a").unwrap();
        assert_eq!(compress_single_tx_addresses(&g), g);
    }

    #[test]
    fn at_most_two_hypers_per_tx() {
        let w = window(&[(
            "t",
            &[("a", 10), ("i1", 1), ("i2", 1)],
            &[("o1", 4), ("o2", 4), ("o3", 4)],
        )]);
        let g = build_window_graph(&w, "a").unwrap();
        let c = compress_single_tx_addresses(&g);
        assert_eq!(c.count_kind(NodeKind::SingleTxHyper), 2);
        assert_eq!(c.count_kind(NodeKind::PlainAddress), 1);
        assert!(c.is_bipartite());
    }

    #[test]
    fn idempotent() {
        let w = window(&[
            ("t1", &[("a", 10), ("i1", 1)], &[("o1", 4), ("b", 3)]),
            ("t2", &[("b", 2)], &[("a", 2), ("o2", 1)]),
        ]);
        let g = build_window_graph(&w, "a").unwrap();
        let once = compress_single_tx_addresses(&g);
        assert_eq!(compress_single_tx_addresses(&once), once);
    }
}
