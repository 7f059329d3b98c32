//! Bitcoin address behavior classification.
//!
//! An address history is sliced into chronological transaction windows; each
//! window becomes a heterogeneous address/transaction graph that is
//! compressed, augmented with centrality features and encoded by a graph
//! feature network. The resulting embedding sequence is classified by an
//! LSTM with an MLP head.

pub mod augment;
pub mod compress;
pub mod gfn;
pub mod graph;
pub mod ingest;
pub mod linalg;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod seq;

pub use augment::{AugmentedGraph, Centralities, PageRankConfig};
pub use compress::{CompressionConfig, SfeVector};
pub use graph::{AddressGraph, Direction, Edge, Node, NodeKind};
pub use ingest::{AddressRecord, BehaviorClass, Transaction, TransactionStore, TxIo};
pub use linalg::Matrix;
