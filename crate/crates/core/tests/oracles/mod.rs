//! Independent reference implementations and fuzz generators for tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::Arc;

use chainlens_core::augment::Adjacency;
use chainlens_core::graph::TxWindow;
use chainlens_core::ingest::{Transaction, TxIo};
use chainlens_core::nn::{Gradients, Parameters};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ---------- statistics ----------

/// Seventeen statistics in the library's component order, from textbook
/// population formulas.
pub fn stats_oracle(values: &[f64]) -> [f64; 17] {
    let n = values.len() as f64;
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantile = |q: f64| {
        let h = (s.len() - 1) as f64 * q;
        let below = h.floor();
        let i = below as usize;
        if i + 1 >= s.len() {
            s[i]
        } else {
            s[i] + (h - below) * (s[i + 1] - s[i])
        }
    };
    let max = *s.last().unwrap();
    let min = s[0];
    let sum: f64 = values.iter().sum();
    let mean = sum / n;
    let constant = values.iter().all(|&v| v == values[0]);
    let central = |p: i32| {
        if constant {
            0.0
        } else {
            values.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / n
        }
    };
    let var = central(2);
    let std = var.sqrt();
    let mad = if constant {
        0.0
    } else {
        values.iter().map(|v| (v - mean).abs()).sum::<f64>() / n
    };
    let median = quantile(0.5);
    let safe = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let kurt = if var == 0.0 {
        0.0
    } else {
        central(4) / (var * var) - 3.0
    };
    let skew = safe(central(3), var.powf(1.5));
    [
        max,
        min,
        sum,
        mean,
        n,
        max - min,
        0.5 * (max + min),
        quantile(0.25),
        median,
        quantile(0.75),
        var,
        std,
        mad,
        safe(std, mean),
        kurt,
        skew,
        safe(mean - median, std),
    ]
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(b.abs())
}

// ---------- centrality ----------

pub fn random_adjacency(rng: &mut ChaCha8Rng, max_nodes: usize) -> Adjacency {
    let n = rng.gen_range(1..=max_nodes);
    let p = rng.gen_range(0.1..0.7);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Adjacency::from_edges(n, &edges)
}

fn dense(adj: &Adjacency) -> Vec<Vec<bool>> {
    let n = adj.len();
    let mut m = vec![vec![false; n]; n];
    for (a, b) in adj.edges() {
        m[a][b] = true;
        m[b][a] = true;
    }
    m
}

pub fn degree_oracle(adj: &Adjacency) -> Vec<f64> {
    let n = adj.len();
    let mut deg = vec![0.0; n];
    for (a, b) in adj.edges() {
        deg[a] += 1.0;
        deg[b] += 1.0;
    }
    deg
}

/// All-pairs hop distances by Floyd–Warshall; `None` when unreachable.
pub fn floyd_warshall(adj: &Adjacency) -> Vec<Vec<Option<usize>>> {
    let n = adj.len();
    let m = dense(adj);
    let mut d: Vec<Vec<Option<usize>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Some(0)
                    } else if m[i][j] {
                        Some(1)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

pub fn closeness_oracle(adj: &Adjacency) -> Vec<f64> {
    let n = adj.len();
    let d = floyd_warshall(adj);
    (0..n)
        .map(|i| {
            let reach: Vec<usize> = (0..n).filter(|&j| j != i).filter_map(|j| d[i][j]).collect();
            if reach.is_empty() {
                return 0.0;
            }
            let r = reach.len() as f64;
            let total: usize = reach.iter().sum();
            (r / total as f64) * (r / (n - 1) as f64)
        })
        .collect()
}

/// Enumerates every shortest path between every unordered pair and credits
/// interior nodes.
pub fn betweenness_oracle(adj: &Adjacency) -> Vec<f64> {
    let n = adj.len();
    let m = dense(adj);
    let d = floyd_warshall(adj);
    let mut cb = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let Some(len) = d[s][t] else { continue };
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let last = *path.last().unwrap();
                if last == t {
                    paths.push(path);
                    continue;
                }
                if path.len() > len {
                    continue;
                }
                for next in 0..n {
                    if m[last][next] && !path.contains(&next) {
                        let mut p = path.clone();
                        p.push(next);
                        stack.push(p);
                    }
                }
            }
            let shortest: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == len + 1).collect();
            let total = shortest.len() as f64;
            for p in &shortest {
                for &v in &p[1..p.len() - 1] {
                    cb[v] += 1.0 / total;
                }
            }
        }
    }
    cb
}

/// Dense Google-matrix power iteration run to machine precision.
pub fn pagerank_oracle(adj: &Adjacency, alpha: f64) -> Vec<f64> {
    let n = adj.len();
    let m = dense(adj);
    let deg: Vec<usize> = (0..n)
        .map(|i| m[i].iter().filter(|&&b| b).count())
        .collect();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let link = if deg[j] == 0 {
                1.0 / n as f64
            } else if m[j][i] {
                1.0 / deg[j] as f64
            } else {
                0.0
            };
            g[i][j] = alpha * link + (1.0 - alpha) / n as f64;
        }
    }
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let y: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| g[i][j] * x[j]).sum())
            .collect();
        let diff: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if diff < 1e-15 {
            break;
        }
    }
    x
}

// ---------- gradients ----------

pub const FD_STEP: f64 = 1e-5;

/// Largest relative error between `analytic` and central differences of
/// `loss` over every parameter.
pub fn gradient_error<M: Parameters + Clone>(
    model: &M,
    analytic: &Gradients,
    loss: impl Fn(&M) -> f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    let sizes: Vec<usize> = model.tensors().iter().map(|t| t.len()).collect();
    for (t, &len) in sizes.iter().enumerate() {
        for j in 0..len {
            let mut plus = model.clone();
            plus.tensors_mut()[t][j] += FD_STEP;
            let mut minus = model.clone();
            minus.tensors_mut()[t][j] -= FD_STEP;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * FD_STEP);
            let a = analytic.0[t][j];
            let rel = (numeric - a).abs() / (numeric.abs() + a.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    worst
}

// ---------- fuzzed windows ----------

/// Random window around address "T": a small counterparty pool so addresses
/// recur across transactions, duplicate entries, coinbase transactions.
pub fn random_window(rng: &mut ChaCha8Rng) -> TxWindow {
    let pool = rng.gen_range(2..16);
    let tx_count = rng.gen_range(1..30);
    let mut txs = Vec::with_capacity(tx_count);
    let io = |rng: &mut ChaCha8Rng, k: usize| -> Vec<TxIo> {
        (0..k)
            .map(|_| TxIo {
                address: format!("a{}", rng.gen_range(0..pool)),
                value: rng.gen_range(0..1_000_000_000_000u64),
            })
            .collect()
    };
    for i in 0..tx_count {
        let coinbase = rng.gen_bool(0.1);
        let mut inputs = if coinbase {
            Vec::new()
        } else {
            let k = rng.gen_range(1..5);
            io(rng, k)
        };
        let k = rng.gen_range(1..6);
        let mut outputs = io(rng, k);
        let target = TxIo {
            address: "T".into(),
            value: rng.gen_range(1..1_000_000_000u64),
        };
        if !coinbase && rng.gen_bool(0.5) {
            inputs.push(target);
        } else {
            outputs.push(target);
        }
        txs.push(Arc::new(Transaction {
            tx_id: format!("t{i}"),
            timestamp: i as i64,
            block_height: i as u64,
            inputs,
            outputs,
        }));
    }
    TxWindow {
        index: 0,
        transactions: txs,
    }
}
