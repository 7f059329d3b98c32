use std::time::Instant;

use crate::augment::{augment_graph, AugmentedGraph, PageRankConfig};
use crate::compress::{
    compress_multi_tx_addresses, compress_single_tx_addresses, CompressionConfig,
};
use crate::graph::{build_window_graph, slice_history, AddressGraph, NodeKind};
use crate::ingest::AddressRecord;

use super::PipelineError;

/// Graphs of one address plus the cost of each construction stage, both as a
/// deterministic operation count and as measured wall seconds.
#[derive(Debug, Clone)]
pub struct ConstructedAddress {
    pub graphs: Vec<AugmentedGraph>,
    pub work: [f64; 4],
    pub wall: [f64; 4],
}

fn single_cost(g: &AddressGraph) -> f64 {
    (g.node_count() + g.edges.len()) as f64
}

fn multi_cost(g: &AddressGraph) -> f64 {
    let candidates = g
        .nodes
        .iter()
        .filter(|n| n.kind == NodeKind::PlainAddress && !n.is_target)
        .count() as f64;
    let txs = g.count_kind(NodeKind::TransactionNode) as f64;
    candidates * candidates * txs + candidates * candidates + g.edges.len() as f64
}

fn augment_cost(g: &AddressGraph) -> f64 {
    let v = g.node_count() as f64;
    let e = g.edges.len() as f64;
    2.0 * v * (v + e) + e
}

/// Slice, build, compress (single then multi) and augment every window.
pub fn construct_address(
    record: &AddressRecord,
    slice_unit: usize,
    compression: &CompressionConfig,
    pagerank: &PageRankConfig,
) -> Result<ConstructedAddress, PipelineError> {
    let mut work = [0.0; 4];
    let mut wall = [0.0; 4];
    let mut graphs = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |slot: usize, wall: &mut [f64; 4]| {
        wall[slot] += clock.elapsed().as_secs_f64();
        clock = Instant::now();
    };

    let windows = slice_history(record, slice_unit)?;
    lap(0, &mut wall);
    for window in &windows {
        let raw = build_window_graph(window, &record.address)?;
        lap(0, &mut wall);
        let participations: usize = window
            .transactions
            .iter()
            .map(|t| t.inputs.len() + t.outputs.len())
            .sum();
        work[0] += (participations + raw.node_count()) as f64;

        work[1] += single_cost(&raw);
        let single = compress_single_tx_addresses(&raw);
        lap(1, &mut wall);

        work[2] += multi_cost(&single);
        let multi = compress_multi_tx_addresses(&single, compression)?;
        lap(2, &mut wall);

        work[3] += augment_cost(&multi);
        graphs.push(augment_graph(&multi, pagerank)?);
        lap(3, &mut wall);
    }
    Ok(ConstructedAddress { graphs, work, wall })
}
