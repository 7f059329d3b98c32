//! Transaction data model, record parsing, label loading and per-address
//! history assembly.
//!
//! Transactions arrive as newline-delimited JSON objects:
//!
//! ```text
//! {"tx_id":"a","timestamp":10,"block_height":1,"inputs":[{"address":"x","value":5}],"outputs":[{"address":"y","value":5}]}
//! ```
//!
//! Values are integer satoshis. A transaction with no inputs is a coinbase.

mod split;
mod synthetic;

pub use split::{stratified_split, Split};
pub use synthetic::{generate_synthetic_dataset, Archetype, SyntheticDataset, SyntheticSpec};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate transaction id {tx_id:?}")]
    DuplicateId { line: usize, tx_id: String },
    #[error("line {line}: unknown behavior class {name:?}")]
    UnknownClass { line: usize, name: String },
    #[error("address {address:?} labeled both {first} and {second}")]
    LabelConflict {
        address: String,
        first: BehaviorClass,
        second: BehaviorClass,
    },
    #[error("class {0} has no addresses")]
    DegenerateClass(BehaviorClass),
    #[error("train fraction {0} outside (0, 1)")]
    Fraction(f64),
    #[error("invalid synthetic spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Address behavior label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BehaviorClass {
    Exchange,
    Mining,
    Gambling,
    Service,
}

impl BehaviorClass {
    pub const ALL: [BehaviorClass; 4] = [
        BehaviorClass::Exchange,
        BehaviorClass::Mining,
        BehaviorClass::Gambling,
        BehaviorClass::Service,
    ];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            BehaviorClass::Exchange => "exchange",
            BehaviorClass::Mining => "mining",
            BehaviorClass::Gambling => "gambling",
            BehaviorClass::Service => "service",
        }
    }
}

impl fmt::Display for BehaviorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BehaviorClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exchange" => Ok(BehaviorClass::Exchange),
            "mining" => Ok(BehaviorClass::Mining),
            "gambling" => Ok(BehaviorClass::Gambling),
            "service" => Ok(BehaviorClass::Service),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TxIo {
    pub address: String,
    pub value: u64,
}

impl TxIo {
    pub fn new(address: impl Into<String>, value: u64) -> Self {
        Self {
            address: address.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transaction {
    pub tx_id: String,
    pub timestamp: i64,
    pub block_height: u64,
    pub inputs: Vec<TxIo>,
    pub outputs: Vec<TxIo>,
}

impl Transaction {
    pub fn is_coinbase(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn involves(&self, address: &str) -> bool {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .any(|io| io.address == address)
    }

    /// Chronological ordering key.
    pub fn order_key(&self) -> (i64, u64, &str) {
        (self.timestamp, self.block_height, &self.tx_id)
    }

    pub fn total_input(&self) -> u64 {
        self.inputs.iter().map(|io| io.value).sum()
    }

    pub fn total_output(&self) -> u64 {
        self.outputs.iter().map(|io| io.value).sum()
    }
}

pub fn parse_transactions<R: BufRead>(reader: R) -> Result<Vec<Transaction>, IngestError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let tx: Transaction = serde_json::from_str(&line).map_err(|e| IngestError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if tx.tx_id.is_empty() {
            return Err(IngestError::Parse {
                line: line_no,
                message: "empty tx_id".into(),
            });
        }
        if tx.outputs.is_empty() {
            return Err(IngestError::Parse {
                line: line_no,
                message: "transaction has no outputs".into(),
            });
        }
        if !seen.insert(tx.tx_id.clone()) {
            return Err(IngestError::DuplicateId {
                line: line_no,
                tx_id: tx.tx_id,
            });
        }
        out.push(tx);
    }
    Ok(out)
}

/// Writes one record per line, in the format read by [`parse_transactions`].
pub fn serialize_transactions(txs: &[Transaction]) -> String {
    let mut s = String::new();
    for tx in txs {
        s.push_str(&serde_json::to_string(tx).expect("transaction serializes"));
        s.push('\n');
    }
    s
}

#[derive(Deserialize)]
struct LabelRecord {
    address: String,
    class: String,
}

#[derive(Serialize)]
struct LabelRecordOut<'a> {
    address: &'a str,
    class: BehaviorClass,
}

pub fn load_address_labels<R: BufRead>(
    reader: R,
) -> Result<BTreeMap<String, BehaviorClass>, IngestError> {
    let mut labels = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LabelRecord = serde_json::from_str(&line).map_err(|e| IngestError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let class =
            rec.class
                .parse::<BehaviorClass>()
                .map_err(|name| IngestError::UnknownClass {
                    line: line_no,
                    name,
                })?;
        match labels.get(&rec.address) {
            Some(&prev) if prev != class => {
                return Err(IngestError::LabelConflict {
                    address: rec.address,
                    first: prev,
                    second: class,
                })
            }
            Some(_) => {}
            None => {
                labels.insert(rec.address, class);
            }
        }
    }
    Ok(labels)
}

pub fn serialize_labels(labels: &BTreeMap<String, BehaviorClass>) -> String {
    let mut s = String::new();
    for (address, &class) in labels {
        let rec = LabelRecordOut { address, class };
        s.push_str(&serde_json::to_string(&rec).expect("label serializes"));
        s.push('\n');
    }
    s
}

/// Immutable transaction store indexed by participating address.
#[derive(Debug, Default)]
pub struct TransactionStore {
    txs: Vec<Arc<Transaction>>,
    by_address: HashMap<String, Vec<usize>>,
}

impl TransactionStore {
    pub fn new(txs: Vec<Transaction>) -> Self {
        let txs: Vec<Arc<Transaction>> = txs.into_iter().map(Arc::new).collect();
        let mut by_address: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, tx) in txs.iter().enumerate() {
            for io in tx.inputs.iter().chain(&tx.outputs) {
                let list = by_address.entry(io.address.clone()).or_default();
                if list.last() != Some(&i) {
                    list.push(i);
                }
            }
        }
        Self { txs, by_address }
    }

    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn transactions(&self) -> impl Iterator<Item = &Transaction> {
        self.txs.iter().map(|t| t.as_ref())
    }

    pub fn collect_address_history(&self, address: &str) -> AddressRecord {
        let mut history: Vec<Arc<Transaction>> = self
            .by_address
            .get(address)
            .map(|idx| idx.iter().map(|&i| Arc::clone(&self.txs[i])).collect())
            .unwrap_or_default();
        history.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
        AddressRecord {
            address: address.to_string(),
            history,
            label: None,
        }
    }
}

/// One address under analysis with its chronological transaction history.
#[derive(Debug, Clone)]
pub struct AddressRecord {
    pub address: String,
    pub history: Vec<Arc<Transaction>>,
    pub label: Option<BehaviorClass>,
}

impl AddressRecord {
    pub fn with_label(mut self, label: BehaviorClass) -> Self {
        self.label = Some(label);
        self
    }
}

/// Convenience wrapper around [`TransactionStore::collect_address_history`].
pub fn collect_address_history(address: &str, store: &TransactionStore) -> AddressRecord {
    store.collect_address_history(address)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(id: &str, ts: i64, ins: &[(&str, u64)], outs: &[(&str, u64)]) -> Transaction {
        Transaction {
            tx_id: id.into(),
            timestamp: ts,
            block_height: ts as u64,
            inputs: ins.iter().map(|&(a, v)| TxIo::new(a, v)).collect(),
            outputs: outs.iter().map(|&(a, v)| TxIo::new(a, v)).collect(),
        }
    }

    #[test]
    fn parse_single_line() {
        let line = r#"{"tx_id":"a","timestamp":10,"block_height":1,"inputs":[{"address":"x","value":5}],"outputs":[{"address":"y","value":5}]}"#;
        let txs = parse_transactions(line.as_bytes()).unwrap();
        assert_eq!(txs.len(), 1);
        let t = &txs[0];
        assert_eq!(t.tx_id, "a");
        assert_eq!(t.timestamp, 10);
        assert_eq!(t.block_height, 1);
        assert_eq!(t.inputs, vec![TxIo::new("x", 5)]);
        assert_eq!(t.outputs, vec![TxIo::new("y", 5)]);
        assert!(!t.is_coinbase());
        assert_eq!(serialize_transactions(&txs).trim_end(), line);
    }

    #[test]
    fn empty_stream() {
        assert!(parse_transactions(&b""[..]).unwrap().is_empty());
    }

    #[test]
    fn coinbase_flag() {
        let line = r#"{"tx_id":"cb","timestamp":1,"block_height":1,"inputs":[],"outputs":[{"address":"pool","value":625000000}]}"#;
        let txs = parse_transactions(line.as_bytes()).unwrap();
        assert!(txs[0].is_coinbase());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let data = "{\"tx_id\":\"a\",\"timestamp\":1,\"block_height\":1,\"inputs\":[],\"outputs\":[{\"address\":\"y\",\"value\":1}]}\nnot json\n";
        match parse_transactions(data.as_bytes()) {
            Err(IngestError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_value_rejected() {
        let data = r#"{"tx_id":"a","timestamp":1,"block_height":1,"inputs":[],"outputs":[{"address":"y","value":-1}]}"#;
        assert!(matches!(
            parse_transactions(data.as_bytes()),
            Err(IngestError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn missing_outputs_rejected() {
        let data = r#"{"tx_id":"a","timestamp":1,"block_height":1,"inputs":[{"address":"y","value":1}],"outputs":[]}"#;
        assert!(matches!(
            parse_transactions(data.as_bytes()),
            Err(IngestError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn duplicate_id_rejected() {
        let txs = vec![tx("a", 1, &[], &[("y", 1)]), tx("a", 2, &[], &[("z", 1)])];
        let data = serialize_transactions(&txs);
        match parse_transactions(data.as_bytes()) {
            Err(IngestError::DuplicateId { line, tx_id }) => {
                assert_eq!(line, 2);
                assert_eq!(tx_id, "a");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn labels_single_and_idempotent() {
        let one = load_address_labels(&br#"{"address":"addr1","class":"mining"}"#[..]).unwrap();
        assert_eq!(one.get("addr1"), Some(&BehaviorClass::Mining));

        let twice = "{\"address\":\"addr1\",\"class\":\"exchange\"}\n{\"address\":\"addr1\",\"class\":\"Exchange\"}\n";
        let m = load_address_labels(twice.as_bytes()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m["addr1"], BehaviorClass::Exchange);
    }

    #[test]
    fn labels_conflict_and_unknown() {
        let conflict = "{\"address\":\"addr1\",\"class\":\"exchange\"}\n{\"address\":\"addr1\",\"class\":\"mining\"}\n";
        assert!(matches!(
            load_address_labels(conflict.as_bytes()),
            Err(IngestError::LabelConflict { .. })
        ));
        let unknown = r#"{"address":"addr1","class":"mixer"}"#;
        assert!(matches!(
            load_address_labels(unknown.as_bytes()),
            Err(IngestError::UnknownClass { line: 1, .. })
        ));
    }

    #[test]
    fn history_sorted_by_timestamp() {
        let store = TransactionStore::new(vec![
            tx("late", 20, &[("a", 1)], &[("b", 1)]),
            tx("early", 10, &[("c", 1)], &[("a", 1)]),
            tx("other", 5, &[("c", 1)], &[("d", 1)]),
        ]);
        let rec = collect_address_history("a", &store);
        let ids: Vec<_> = rec.history.iter().map(|t| t.tx_id.as_str()).collect();
        assert_eq!(ids, ["early", "late"]);
        assert!(collect_address_history("nobody", &store).history.is_empty());
    }

    #[test]
    fn history_ties_broken_by_height_then_id() {
        let mut t1 = tx("b", 10, &[("a", 1)], &[("x", 1)]);
        let mut t2 = tx("a", 10, &[("a", 1)], &[("x", 1)]);
        let t3 = tx("c", 10, &[("a", 1)], &[("x", 1)]);
        t1.block_height = 3;
        t2.block_height = 3;
        let store = TransactionStore::new(vec![t1, t2, t3]);
        let ids: Vec<_> = store
            .collect_address_history("a")
            .history
            .iter()
            .map(|t| t.tx_id.clone())
            .collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn address_listed_twice_counts_once() {
        let store = TransactionStore::new(vec![tx("t", 1, &[("a", 1)], &[("a", 1), ("a", 2)])]);
        assert_eq!(store.collect_address_history("a").history.len(), 1);
    }
}
