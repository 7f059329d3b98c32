//! Synthetic labeled datasets with one behavioral archetype per class.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BehaviorClass, IngestError, Transaction, TxIo};

/// Generation parameters for one behavior class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archetype {
    /// Probability that a transaction pays the target (target on the output side).
    pub incoming_share: f64,
    /// Probability that an incoming transaction is a coinbase.
    pub coinbase_share: f64,
    /// Inclusive counterparty count on the input side of incoming transactions.
    pub fan_in: (usize, usize),
    /// Inclusive counterparty count on the output side of outgoing transactions.
    pub fan_out: (usize, usize),
    /// Log-uniform value bounds in satoshis for counterparty transfers.
    pub value_range: (u64, u64),
    /// Log-uniform value bounds for coinbase rewards.
    pub coinbase_value: (u64, u64),
    /// Mean seconds between consecutive transactions.
    pub mean_interval: f64,
    /// When true, intervals are `mean_interval` with ±5% jitter instead of exponential.
    pub periodic: bool,
    /// Size of the recurring counterparty pool.
    pub pool_size: usize,
    /// Probability that a counterparty is drawn from the recurring pool.
    pub reuse: f64,
    /// Probability that a transaction carries a change output.
    pub change_share: f64,
}

impl Archetype {
    pub fn default_for(class: BehaviorClass) -> Self {
        match class {
            // Pool address: coinbase rewards in, periodic payouts to a recurring miner set.
            BehaviorClass::Mining => Archetype {
                incoming_share: 0.5,
                coinbase_share: 1.0,
                fan_in: (1, 1),
                fan_out: (20, 60),
                value_range: (100_000, 10_000_000),
                coinbase_value: (500_000_000, 700_000_000),
                mean_interval: 3_600.0,
                periodic: true,
                pool_size: 80,
                reuse: 0.9,
                change_share: 0.3,
            },
            // High-frequency deposits and withdrawals from a wide user base.
            BehaviorClass::Exchange => Archetype {
                incoming_share: 0.55,
                coinbase_share: 0.0,
                fan_in: (1, 3),
                fan_out: (1, 3),
                value_range: (100_000, 1_000_000_000),
                coinbase_value: (0, 0),
                mean_interval: 120.0,
                periodic: false,
                pool_size: 200,
                reuse: 0.2,
                change_share: 0.8,
            },
            // Many small bets and payouts with a recurring player set.
            BehaviorClass::Gambling => Archetype {
                incoming_share: 0.6,
                coinbase_share: 0.0,
                fan_in: (1, 1),
                fan_out: (1, 2),
                value_range: (1_000, 1_000_000),
                coinbase_value: (0, 0),
                mean_interval: 300.0,
                periodic: false,
                pool_size: 30,
                reuse: 0.85,
                change_share: 0.2,
            },
            // Heterogeneous mid-volume traffic.
            BehaviorClass::Service => Archetype {
                incoming_share: 0.5,
                coinbase_share: 0.0,
                fan_in: (1, 5),
                fan_out: (2, 10),
                value_range: (1_000_000, 100_000_000),
                coinbase_value: (0, 0),
                mean_interval: 7_200.0,
                periodic: false,
                pool_size: 20,
                reuse: 0.4,
                change_share: 0.6,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub addresses_per_class: usize,
    /// Inclusive bounds on each target address's transaction count.
    pub tx_count_range: (usize, usize),
    pub seed: u64,
    /// Indexed by [`BehaviorClass::index`].
    pub archetypes: [Archetype; 4],
}

impl SyntheticSpec {
    pub fn new(addresses_per_class: usize, seed: u64) -> Self {
        Self {
            addresses_per_class,
            tx_count_range: (20, 250),
            seed,
            archetypes: BehaviorClass::ALL.map(Archetype::default_for),
        }
    }

    fn validate(&self) -> Result<(), IngestError> {
        let (lo, hi) = self.tx_count_range;
        if self.addresses_per_class == 0 {
            return Err(IngestError::Spec("addresses_per_class must be >= 1".into()));
        }
        if lo == 0 || lo > hi {
            return Err(IngestError::Spec(format!(
                "bad tx_count_range ({lo}, {hi})"
            )));
        }
        for a in &self.archetypes {
            if a.fan_in.0 > a.fan_in.1 || a.fan_out.0 > a.fan_out.1 || a.fan_out.0 == 0 {
                return Err(IngestError::Spec("bad fan bounds".into()));
            }
            if a.value_range.0 == 0 || a.value_range.0 > a.value_range.1 {
                return Err(IngestError::Spec("bad value range".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    /// Sorted chronologically.
    pub transactions: Vec<Transaction>,
    pub labels: BTreeMap<String, BehaviorClass>,
}

pub fn generate_synthetic_dataset(spec: &SyntheticSpec) -> Result<SyntheticDataset, IngestError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels = BTreeMap::new();
    let mut used = HashSet::new();
    let mut transactions = Vec::new();
    let mut tx_counter = 0u64;

    for class in BehaviorClass::ALL {
        let arch = &spec.archetypes[class.index()];
        for _ in 0..spec.addresses_per_class {
            let target = loop {
                let name = format!("1{:016x}{:08x}", rng.gen::<u64>(), rng.gen::<u32>());
                if used.insert(name.clone()) {
                    break name;
                }
            };
            let n_tx = rng.gen_range(spec.tx_count_range.0..=spec.tx_count_range.1);
            let mut gen = AddressGen {
                target: &target,
                arch,
                fresh: 0,
            };
            let mut t = 1_500_000_000 + rng.gen_range(0..30_000_000i64);
            for _ in 0..n_tx {
                let interval = if arch.periodic {
                    arch.mean_interval * rng.gen_range(0.95..1.05)
                } else {
                    -arch.mean_interval * (1.0 - rng.gen::<f64>()).ln()
                };
                t += interval.max(1.0) as i64;
                tx_counter += 1;
                let tx_id = format!("{:016x}{:016x}", rng.gen::<u64>(), tx_counter);
                transactions.push(gen.transaction(&mut rng, tx_id, t));
            }
            labels.insert(target, class);
        }
    }
    transactions.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
    Ok(SyntheticDataset {
        transactions,
        labels,
    })
}

struct AddressGen<'a> {
    target: &'a str,
    arch: &'a Archetype,
    fresh: usize,
}

impl AddressGen<'_> {
    fn counterparty(&mut self, rng: &mut ChaCha8Rng) -> String {
        if self.arch.pool_size > 0 && rng.gen_bool(self.arch.reuse) {
            format!("{}p{}", self.target, rng.gen_range(0..self.arch.pool_size))
        } else {
            self.fresh += 1;
            format!("{}f{}", self.target, self.fresh)
        }
    }

    fn distinct_counterparties(&mut self, rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
        let mut out: Vec<String> = Vec::with_capacity(n);
        while out.len() < n {
            let c = self.counterparty(rng);
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    fn transaction(&mut self, rng: &mut ChaCha8Rng, tx_id: String, timestamp: i64) -> Transaction {
        let arch = self.arch;
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        if rng.gen_bool(arch.incoming_share) {
            if rng.gen_bool(arch.coinbase_share) {
                outputs.push(TxIo::new(
                    self.target,
                    log_uniform(rng, arch.coinbase_value),
                ));
            } else {
                let n = rng.gen_range(arch.fan_in.0..=arch.fan_in.1).max(1);
                let mut total = 0;
                for addr in self.distinct_counterparties(rng, n) {
                    let v = log_uniform(rng, arch.value_range);
                    total += v;
                    inputs.push(TxIo::new(addr, v));
                }
                let change = if rng.gen_bool(arch.change_share) {
                    total / rng.gen_range(3..10)
                } else {
                    0
                };
                outputs.push(TxIo::new(self.target, total - change));
                if change > 0 {
                    self.fresh += 1;
                    outputs.push(TxIo::new(format!("{}f{}", self.target, self.fresh), change));
                }
            }
        } else {
            let n = rng.gen_range(arch.fan_out.0..=arch.fan_out.1);
            let mut total = 0;
            for addr in self.distinct_counterparties(rng, n) {
                let v = log_uniform(rng, arch.value_range);
                total += v;
                outputs.push(TxIo::new(addr, v));
            }
            let change = if rng.gen_bool(arch.change_share) {
                log_uniform(rng, arch.value_range)
            } else {
                0
            };
            inputs.push(TxIo::new(self.target, total + change));
            if change > 0 {
                outputs.push(TxIo::new(self.target, change));
            }
        }
        Transaction {
            tx_id,
            timestamp,
            block_height: ((timestamp - 1_231_006_505) / 600).max(0) as u64,
            inputs,
            outputs,
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, (lo, hi): (u64, u64)) -> u64 {
    if lo >= hi {
        return lo;
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    (rng.gen_range(a..b).exp().round() as u64).clamp(lo, hi)
}
