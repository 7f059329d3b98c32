use crate::augment::Adjacency;
use crate::linalg::Matrix;

use super::GfnError;

/// `Ã = D̃^{-1/2}(A + I)D̃^{-1/2}` stored row-sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    rows: Vec<Vec<(usize, f64)>>,
}

impl NormalizedAdjacency {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.rows.len();
        let mut m = Matrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                m[(i, j)] = w;
            }
        }
        m
    }

    /// `Ã · x`
    pub fn multiply(&self, x: &Matrix) -> Matrix {
        assert_eq!(x.rows(), self.rows.len(), "propagation shape mismatch");
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for (i, row) in self.rows.iter().enumerate() {
            let dst = out.row_mut(i);
            for &(j, w) in row {
                for (d, &v) in dst.iter_mut().zip(x.row(j)) {
                    *d += w * v;
                }
            }
        }
        out
    }
}

pub fn normalized_adjacency(adj: &Adjacency) -> NormalizedAdjacency {
    let n = adj.len();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| 1.0 / ((adj.neighbors(i).len() + 1) as f64).sqrt())
        .collect();
    let rows = (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = adj
                .neighbors(i)
                .iter()
                .map(|&j| (j, inv_sqrt[i] * inv_sqrt[j]))
                .collect();
            row.push((i, inv_sqrt[i] * inv_sqrt[i]));
            row.sort_by_key(|&(j, _)| j);
            row
        })
        .collect();
    NormalizedAdjacency { rows }
}

/// `[d | X | ÃX | Ã²X | … | ÃᵏX]`, each power obtained from the previous
/// one by a single propagation.
pub fn augment_features(
    x: &Matrix,
    a_norm: &NormalizedAdjacency,
    degree: &[f64],
    k: usize,
) -> Result<Matrix, GfnError> {
    let n = x.rows();
    if a_norm.len() != n || degree.len() != n {
        return Err(GfnError::Shape(format!(
            "features {n} rows, adjacency {}, degree {}",
            a_norm.len(),
            degree.len()
        )));
    }
    let f = x.cols();
    let width = 1 + (k + 1) * f;
    let mut out = Matrix::zeros(n, width);
    for i in 0..n {
        out[(i, 0)] = degree[i];
    }
    let mut hop = x.clone();
    for h in 0..=k {
        if h > 0 {
            hop = a_norm.multiply(&hop);
        }
        let offset = 1 + h * f;
        for i in 0..n {
            out.row_mut(i)[offset..offset + f].copy_from_slice(hop.row(i));
        }
    }
    Ok(out)
}

/// Convenience: X^G for a graph given its adjacency and node features.
pub fn graph_input(adj: &Adjacency, x: &Matrix, k: usize) -> Result<Matrix, GfnError> {
    let degree: Vec<f64> = (0..adj.len())
        .map(|i| adj.neighbors(i).len() as f64)
        .collect();
    augment_features(x, &normalized_adjacency(adj), &degree, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_node() {
        let adj = Adjacency::from_edges(1, &[]);
        assert_eq!(
            normalized_adjacency(&adj).to_dense(),
            Matrix::from_rows(&[vec![1.0]])
        );
        let x = Matrix::from_rows(&[vec![0.5, -2.0]]);
        let xg = graph_input(&adj, &x, 3).unwrap();
        assert_eq!(
            xg.to_rows(),
            vec![vec![0.0, 0.5, -2.0, 0.5, -2.0, 0.5, -2.0, 0.5, -2.0]]
        );
    }

    #[test]
    fn two_connected_nodes() {
        let adj = Adjacency::from_edges(2, &[(0, 1)]);
        let a = normalized_adjacency(&adj).to_dense();
        for v in a.as_slice() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn width_arithmetic() {
        let adj = Adjacency::from_edges(3, &[(0, 1), (1, 2)]);
        let x = Matrix::zeros(3, 26);
        assert_eq!(graph_input(&adj, &x, 3).unwrap().cols(), 105);
        assert_eq!(graph_input(&adj, &x, 0).unwrap().cols(), 27);
    }

    #[test]
    fn shape_mismatch() {
        let adj = Adjacency::from_edges(3, &[(0, 1)]);
        let a = normalized_adjacency(&adj);
        assert!(augment_features(&Matrix::zeros(2, 4), &a, &[0.0; 2], 1).is_err());
    }
}
