use std::collections::BTreeMap;

use crate::graph::{AddressGraph, Direction, Edge, Node, NodeKind};
use crate::linalg::Matrix;

use super::single::survivor_remap;
use super::{CompressError, CompressionConfig};

/// Shared-transaction similarity among the graph's multi-transaction
/// address nodes.
#[derive(Debug, Clone)]
pub struct SimilarityWorkspace {
    /// Graph node index of each row.
    pub members: Vec<usize>,
    /// Graph node index of each incidence column.
    pub tx_nodes: Vec<usize>,
    /// `A`: n×d binary incidence.
    pub incidence: Matrix,
    /// `S = A·Aᵀ`: common transaction counts.
    pub shared: Matrix,
    /// Diagonal of `D`, the degree matrix of `S`.
    pub degree: Vec<f64>,
    /// `M = S·D⁻¹`, so `m_ij = s_ij / s_jj`.
    pub similarity: Matrix,
    /// `Q = max(0, M − psi)` elementwise.
    pub thresholded: Matrix,
}

impl SimilarityWorkspace {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Number of nonzero entries in row `i` of `Q`.
    pub fn nonzero(&self, i: usize) -> usize {
        self.thresholded.row(i).iter().filter(|&&q| q > 0.0).count()
    }

    /// Row indices `j` with `q_ij > 0`.
    pub fn similar_to(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.thresholded
            .row(i)
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > 0.0)
            .map(|(j, _)| j)
    }
}

/// Candidate rows are the non-target plain address nodes.
pub fn address_similarity(
    graph: &AddressGraph,
    psi: f64,
) -> Result<SimilarityWorkspace, CompressError> {
    let members: Vec<usize> = graph
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.kind == NodeKind::PlainAddress && !n.is_target)
        .map(|(i, _)| i)
        .collect();
    let tx_nodes: Vec<usize> = graph
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.kind == NodeKind::TransactionNode)
        .map(|(i, _)| i)
        .collect();

    let mut row_of = vec![usize::MAX; graph.nodes.len()];
    for (r, &m) in members.iter().enumerate() {
        row_of[m] = r;
    }
    let mut col_of = vec![usize::MAX; graph.nodes.len()];
    for (c, &t) in tx_nodes.iter().enumerate() {
        col_of[t] = c;
    }

    let n = members.len();
    let mut incidence = Matrix::zeros(n, tx_nodes.len());
    for e in &graph.edges {
        let r = row_of[e.address_node];
        if r != usize::MAX {
            incidence[(r, col_of[e.tx_node])] = 1.0;
        }
    }

    let shared = incidence.matmul_t(&incidence);
    let degree: Vec<f64> = (0..n).map(|i| shared[(i, i)]).collect();
    if let Some(r) = degree.iter().position(|&d| d == 0.0) {
        return Err(CompressError::MalformedGraph(members[r]));
    }
    let mut similarity = Matrix::zeros(n, n);
    let mut thresholded = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let m = shared[(i, j)] / degree[j];
            similarity[(i, j)] = m;
            thresholded[(i, j)] = (m - psi).max(0.0);
        }
    }
    Ok(SimilarityWorkspace {
        members,
        tx_nodes,
        incidence,
        shared,
        degree,
        similarity,
        thresholded,
    })
}

/// Merges similarity groups into `MultiTxHyper` nodes.
///
/// Seeds with `nonzero(q_i) > sigma` are visited by descending nonzero count,
/// ties broken by node key. Each seed absorbs its still-unassigned similar
/// addresses; a group that ends up with only the seed is left alone.
pub fn compress_multi_tx_addresses(
    graph: &AddressGraph,
    config: &CompressionConfig,
) -> Result<AddressGraph, CompressError> {
    config.validate()?;
    let ws = address_similarity(graph, config.psi)?;
    if ws.is_empty() {
        return Ok(graph.clone());
    }

    let mut seeds: Vec<(usize, usize)> = (0..ws.len())
        .map(|i| (i, ws.nonzero(i)))
        .filter(|&(_, nz)| nz > config.sigma)
        .collect();
    seeds.sort_by(|a, b| {
        b.1.cmp(&a.1).then_with(|| {
            graph.nodes[ws.members[a.0]]
                .key
                .cmp(&graph.nodes[ws.members[b.0]].key)
        })
    });

    let mut assigned = vec![false; ws.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (seed, _) in seeds {
        if assigned[seed] {
            continue;
        }
        let mut group = vec![seed];
        group.extend(ws.similar_to(seed).filter(|&j| j != seed && !assigned[j]));
        if group.len() < 2 {
            continue;
        }
        for &r in &group {
            assigned[r] = true;
        }
        groups.push(group.into_iter().map(|r| ws.members[r]).collect());
    }
    if groups.is_empty() {
        return Ok(graph.clone());
    }

    let mut group_of = vec![usize::MAX; graph.nodes.len()];
    for (g, members) in groups.iter().enumerate() {
        for &m in members {
            group_of[m] = g;
        }
    }
    let keep: Vec<bool> = group_of.iter().map(|&g| g == usize::MAX).collect();

    let mut raw: Vec<Vec<u64>> = vec![Vec::new(); groups.len()];
    let mut rewired: Vec<BTreeMap<(usize, Direction), u64>> = vec![BTreeMap::new(); groups.len()];
    for e in &graph.edges {
        let g = group_of[e.address_node];
        if g != usize::MAX {
            raw[g].push(e.value);
            *rewired[g].entry((e.tx_node, e.direction)).or_default() += e.value;
        }
    }

    let mut out = graph.clone();
    out.retain_nodes(&keep);
    let remap = survivor_remap(&keep);
    for (g, members) in groups.iter().enumerate() {
        let hyper = out.nodes.len();
        out.nodes.push(Node {
            kind: NodeKind::MultiTxHyper,
            key: format!("m:{}", graph.nodes[members[0]].key),
            is_target: false,
            raw_values: std::mem::take(&mut raw[g]),
        });
        for (&(tx_node, direction), &value) in &rewired[g] {
            out.edges.push(Edge {
                address_node: hyper,
                tx_node: remap[tx_node],
                direction,
                value,
            });
        }
    }
    Ok(out)
}
