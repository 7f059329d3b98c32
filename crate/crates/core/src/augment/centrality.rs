use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::graph::AddressGraph;

/// Undirected simple graph as sorted neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency(Vec<Vec<usize>>);

impl Adjacency {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Adjacency(adj)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.0[v]
    }

    pub fn edge_count(&self) -> usize {
        self.0.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Each undirected edge once, as `(low, high)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, list) in self.0.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }
}

impl From<&AddressGraph> for Adjacency {
    fn from(g: &AddressGraph) -> Self {
        Adjacency(g.neighbors())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    pub alpha: f64,
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            alpha: 0.85,
            tolerance: 1e-10,
            max_iters: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centralities {
    pub degree: Vec<f64>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub pagerank: Vec<f64>,
}

pub fn compute_centralities(
    adj: &Adjacency,
    pr: &PageRankConfig,
) -> Result<Centralities, AugmentError> {
    Ok(Centralities {
        degree: degree_centrality(adj),
        closeness: closeness_centrality(adj),
        betweenness: betweenness_centrality(adj),
        pagerank: pagerank(adj, pr)?,
    })
}

pub fn degree_centrality(adj: &Adjacency) -> Vec<f64> {
    adj.0.iter().map(|n| n.len() as f64).collect()
}

fn bfs_distances(adj: &Adjacency, source: usize, dist: &mut [usize], queue: &mut VecDeque<usize>) {
    dist.fill(usize::MAX);
    dist[source] = 0;
    queue.clear();
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        for &w in adj.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
}

/// Closeness with the Wasserman–Faust correction for disconnected graphs:
/// `(r−1)/Σd · (r−1)/(N−1)` where `r` counts the reachable set including the
/// node itself.
pub fn closeness_centrality(adj: &Adjacency) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    (0..n)
        .map(|s| {
            bfs_distances(adj, s, &mut dist, &mut queue);
            let (reach, total) = dist
                .iter()
                .filter(|&&d| d != usize::MAX)
                .fold((0usize, 0usize), |(r, t), &d| (r + 1, t + d));
            if reach <= 1 || n <= 1 {
                0.0
            } else {
                let r1 = (reach - 1) as f64;
                (r1 / total as f64) * (r1 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Unnormalized shortest-path betweenness over unordered pairs (Brandes).
pub fn betweenness_centrality(adj: &Adjacency) -> Vec<f64> {
    let n = adj.len();
    let mut cb = vec![0.0; n];
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::new();

    for s in 0..n {
        stack.clear();
        for p in &mut preds {
            p.clear();
        }
        sigma.fill(0.0);
        dist.fill(-1);
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in adj.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        delta.fill(0.0);
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    // every unordered pair was counted from both endpoints
    for c in &mut cb {
        *c /= 2.0;
    }
    cb
}

/// Power iteration on the undirected view; isolated nodes spread their mass
/// uniformly.
pub fn pagerank(adj: &Adjacency, cfg: &PageRankConfig) -> Result<Vec<f64>, AugmentError> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(AugmentError::Config(format!(
            "alpha {} outside (0, 1)",
            cfg.alpha
        )));
    }
    let n = adj.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let out_deg: Vec<f64> = adj.0.iter().map(|l| l.len() as f64).collect();
    let mut pr = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iters {
        let dangling: f64 = (0..n).filter(|&v| out_deg[v] == 0.0).map(|v| pr[v]).sum();
        let base = (1.0 - cfg.alpha) / nf + cfg.alpha * dangling / nf;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = adj.neighbors(v).iter().map(|&u| pr[u] / out_deg[u]).sum();
            *slot = base + cfg.alpha * inflow;
        }
        residual = pr.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pr, &mut next);
        if residual < cfg.tolerance {
            // renormalize away accumulated rounding
            let total: f64 = pr.iter().sum();
            pr.iter_mut().for_each(|p| *p /= total);
            return Ok(pr);
        }
    }
    Err(AugmentError::NoConvergence {
        iterations: cfg.max_iters,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Adjacency {
        Adjacency::from_edges(3, &[(0, 1), (1, 2)])
    }

    #[test]
    fn path_graph() {
        let a = path3();
        assert_eq!(degree_centrality(&a), vec![1.0, 2.0, 1.0]);
        let c = closeness_centrality(&a);
        assert_eq!(c[1], 1.0);
        assert!((c[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(betweenness_centrality(&a), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn isolated_node() {
        let a = Adjacency::from_edges(3, &[(0, 1)]);
        assert_eq!(degree_centrality(&a)[2], 0.0);
        assert_eq!(closeness_centrality(&a)[2], 0.0);
        let single = Adjacency::from_edges(1, &[]);
        assert_eq!(closeness_centrality(&single), vec![0.0]);
        assert_eq!(
            pagerank(&single, &PageRankConfig::default()).unwrap(),
            vec![1.0]
        );
    }

    #[test]
    fn complete_graph_has_no_betweenness() {
        let edges: Vec<_> = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .collect();
        let k4 = Adjacency::from_edges(4, &edges);
        assert_eq!(betweenness_centrality(&k4), vec![0.0; 4]);
    }

    #[test]
    fn triangle_pagerank_uniform() {
        let k3 = Adjacency::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let pr = pagerank(&k3, &PageRankConfig::default()).unwrap();
        for p in pr {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pagerank_sums_to_one_with_dangling() {
        let a = Adjacency::from_edges(5, &[(0, 1), (1, 2)]);
        let pr = pagerank(&a, &PageRankConfig::default()).unwrap();
        assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pr.iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn pagerank_reports_non_convergence() {
        let a = path3();
        let cfg = PageRankConfig {
            max_iters: 2,
            ..PageRankConfig::default()
        };
        match pagerank(&a, &cfg) {
            Err(AugmentError::NoConvergence {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parallel_edges_collapse() {
        let a = Adjacency::from_edges(2, &[(0, 1), (1, 0), (0, 1)]);
        assert_eq!(a.edge_count(), 1);
        assert_eq!(a.edges(), vec![(0, 1)]);
    }
}
