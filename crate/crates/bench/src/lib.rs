//! Shared fixtures for the criterion benchmarks.

use chainlens_core::augment::PageRankConfig;
use chainlens_core::compress::{
    compress_multi_tx_addresses, compress_single_tx_addresses, CompressionConfig,
};
use chainlens_core::graph::{build_window_graph, slice_history, AddressGraph, DEFAULT_SLICE_UNIT};
use chainlens_core::ingest::{
    generate_synthetic_dataset, BehaviorClass, SyntheticSpec, TransactionStore,
};

pub struct Fixture {
    pub store: TransactionStore,
    /// One address per behavior class, in class order.
    pub addresses: Vec<(BehaviorClass, String)>,
}

pub fn fixture(seed: u64) -> Fixture {
    let ds =
        generate_synthetic_dataset(&SyntheticSpec::new(4, seed)).expect("synthetic spec is valid");
    let addresses = BehaviorClass::ALL
        .iter()
        .map(|&c| {
            let (a, _) = ds
                .labels
                .iter()
                .find(|(_, &l)| l == c)
                .expect("every class present");
            (c, a.clone())
        })
        .collect();
    Fixture {
        store: TransactionStore::new(ds.transactions),
        addresses,
    }
}

/// First-window graph of `address` at each construction stage: raw, single-tx
/// compressed and multi-tx compressed.
pub fn stage_graphs(store: &TransactionStore, address: &str) -> [AddressGraph; 3] {
    let record = store.collect_address_history(address);
    let windows = slice_history(&record, DEFAULT_SLICE_UNIT).expect("history is non-empty");
    let raw = build_window_graph(&windows[0], address).expect("target present");
    let single = compress_single_tx_addresses(&raw);
    let multi =
        compress_multi_tx_addresses(&single, &CompressionConfig::default()).expect("valid graph");
    [raw, single, multi]
}

pub fn pagerank_config() -> PageRankConfig {
    PageRankConfig::default()
}
