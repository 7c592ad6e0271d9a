//! Undirected simple graph with node features and category labels.

mod io;
mod metrics;
mod partition;
mod synth;

use ndarray::Array2;

use crate::error::{Error, Result};

pub use io::{load_graph, save_graph, write_atomic};
pub(crate) use metrics::adjacency_entries;
pub use metrics::{edge_homophily, node_label_informativeness, normalized_adjacency, AdjacencyMode};
pub use partition::{make_partition, Partition, SplitFractions};
pub use synth::{generate_syn_graph, FeatureSource, SynSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_categories: usize,
    features: Array2<f64>,
    labels: Vec<usize>,
    /// Canonical `(u, v)` with `u < v`, sorted, no duplicates.
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and labels
    /// outside `[0, num_categories)`. Edge orientation is normalised.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        num_categories: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = labels.len();
        if num_categories < 2 {
            return Err(Error::InvalidGraph(format!(
                "need at least 2 categories, got {num_categories}"
            )));
        }
        if features.nrows() != n {
            return Err(Error::InvalidGraph(format!(
                "feature matrix has {} rows for {n} nodes",
                features.nrows()
            )));
        }
        if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= num_categories) {
            return Err(Error::InvalidGraph(format!(
                "label {y} of node {i} outside [0, {num_categories})"
            )));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a node outside [0, {n})"
                )));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Graph {
            num_categories,
            features,
            labels,
            edges: list,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_categories(&self) -> usize {
        self.num_categories
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).is_ok()
    }

    /// Sorted neighbour lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Same nodes, features and labels with a different edge set.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Graph::new(
            self.features.clone(),
            self.labels.clone(),
            self.num_categories,
            edges,
        )
    }

    /// Relabels node `i` as `perm[i]`, moving features, labels and edges along.
    pub fn permute_nodes(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_nodes();
        if perm.len() != n {
            return Err(Error::Dimension(format!(
                "permutation of length {} for {n} nodes",
                perm.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        let mut features = Array2::zeros(self.features.raw_dim());
        let mut labels = vec![0; n];
        for i in 0..n {
            features.row_mut(perm[i]).assign(&self.features.row(i));
            labels[perm[i]] = self.labels[i];
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v]));
        Graph::new(features, labels, self.num_categories, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_bad_edges() {
        let x = Array2::zeros((3, 1));
        assert!(Graph::new(x.clone(), vec![0, 0, 1], 2, [(2, 2)]).is_err());
        assert!(Graph::new(x.clone(), vec![0, 0, 1], 2, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(x.clone(), vec![0, 0, 1], 2, [(0, 3)]).is_err());
        assert!(Graph::new(x.clone(), vec![0, 0, 2], 2, [(0, 1)]).is_err());
        let g = Graph::new(x, vec![0, 0, 1], 2, [(1, 0), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert!(g.has_edge(1, 0));
        assert_eq!(g.degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn permutation_moves_everything() {
        let x = array![[1.0], [2.0], [3.0]];
        let g = Graph::new(x, vec![0, 1, 1], 2, [(0, 1)]).unwrap();
        let p = g.permute_nodes(&[2, 0, 1]).unwrap();
        assert_eq!(p.labels(), &[1, 1, 0]);
        assert_eq!(p.features()[[2, 0]], 1.0);
        assert_eq!(p.edges(), &[(0, 2)]);
    }
}
