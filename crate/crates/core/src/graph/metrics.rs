use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

/// Fraction of edges whose endpoints share a label.
pub fn edge_homophily(g: &Graph) -> Result<f64> {
    if g.num_edges() == 0 {
        return Err(Error::Degenerate("edge homophily of an edgeless graph".into()));
    }
    let y = g.labels();
    let same = g.edges().iter().filter(|&&(u, v)| y[u] == y[v]).count();
    Ok(same as f64 / g.num_edges() as f64)
}

fn entropy(probs: impl Iterator<Item = f64>) -> f64 {
    probs.filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum()
}

/// Normalised mutual information between the labels at the two ends of a
/// uniformly drawn (directed) edge: `(H(y_u) - H(y_u | y_v)) / H(y_u)`.
pub fn node_label_informativeness(g: &Graph) -> Result<f64> {
    if g.num_edges() == 0 {
        return Err(Error::Degenerate(
            "label informativeness of an edgeless graph".into(),
        ));
    }
    let c = g.num_categories();
    let y = g.labels();
    let mut joint = vec![0.0f64; c * c];
    for &(u, v) in g.edges() {
        joint[y[u] * c + y[v]] += 1.0;
        joint[y[v] * c + y[u]] += 1.0;
    }
    let total = 2.0 * g.num_edges() as f64;
    joint.iter_mut().for_each(|p| *p /= total);
    let marginal: Vec<f64> = (0..c).map(|a| joint[a * c..(a + 1) * c].iter().sum()).collect();
    let h_marg = entropy(marginal.iter().copied());
    if h_marg <= 0.0 {
        return Err(Error::Degenerate(
            "all edge endpoints share one label (zero entropy)".into(),
        ));
    }
    let h_joint = entropy(joint.iter().copied());
    // H(y_u | y_v) = H(y_u, y_v) - H(y_v), and both marginals coincide
    Ok((2.0 * h_marg - h_joint) / h_marg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencyMode {
    /// Symmetric 0/1 adjacency without self-loops.
    Binary,
    /// `D^-1/2 (A + I) D^-1/2` with `D` the degree matrix of `A + I`.
    #[default]
    SymNormSelfLoops,
}

/// `(row, col, value)` entries of the requested propagation matrix, rows
/// ascending and columns ascending within a row.
pub(crate) fn adjacency_entries(g: &Graph, mode: AdjacencyMode) -> Vec<(usize, usize, f64)> {
    let nbrs = g.neighbors();
    let mut out = Vec::with_capacity(2 * g.num_edges() + g.num_nodes());
    match mode {
        AdjacencyMode::Binary => {
            for (i, ns) in nbrs.iter().enumerate() {
                out.extend(ns.iter().map(|&j| (i, j, 1.0)));
            }
        }
        AdjacencyMode::SymNormSelfLoops => {
            let inv_sqrt: Vec<f64> = nbrs
                .iter()
                .map(|ns| 1.0 / ((ns.len() + 1) as f64).sqrt())
                .collect();
            for (i, ns) in nbrs.iter().enumerate() {
                let mut row: Vec<usize> = ns.clone();
                row.push(i);
                row.sort_unstable();
                out.extend(row.into_iter().map(|j| (i, j, inv_sqrt[i] * inv_sqrt[j])));
            }
        }
    }
    out
}

pub fn normalized_adjacency(g: &Graph, mode: AdjacencyMode) -> Array2<f64> {
    let n = g.num_nodes();
    let mut a = Array2::zeros((n, n));
    for (i, j, w) in adjacency_entries(g, mode) {
        a[[i, j]] = w;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn graph(labels: Vec<usize>, c: usize, edges: &[(usize, usize)]) -> Graph {
        let n = labels.len();
        Graph::new(Array2::zeros((n, 1)), labels, c, edges.iter().copied()).unwrap()
    }

    #[test]
    fn homophily_cases() {
        let g = graph(vec![1, 1, 1], 2, &[(0, 1), (1, 2)]);
        assert_eq!(edge_homophily(&g).unwrap(), 1.0);
        let star = graph(vec![0, 1, 1, 1], 2, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(edge_homophily(&star).unwrap(), 0.0);
        // 5 edges, 3 same-label
        let g = graph(
            vec![0, 0, 0, 1, 1],
            2,
            &[(0, 1), (1, 2), (3, 4), (2, 3), (0, 4)],
        );
        assert_abs_diff_eq!(edge_homophily(&g).unwrap(), 0.6);
        assert!(edge_homophily(&graph(vec![0, 1], 2, &[])).is_err());
    }

    #[test]
    fn nli_cases() {
        // perfectly homophilic, balanced
        let g = graph(vec![0, 0, 1, 1, 2, 2], 3, &[(0, 1), (2, 3), (4, 5)]);
        assert_abs_diff_eq!(node_label_informativeness(&g).unwrap(), 1.0, epsilon = 1e-12);
        // deterministic swap between two labels
        let g = graph(vec![0, 1, 0, 1], 2, &[(0, 1), (1, 2), (2, 3)]);
        assert_abs_diff_eq!(node_label_informativeness(&g).unwrap(), 1.0, epsilon = 1e-12);
        // 4 categories x 2 nodes; one within-edge per category and two edges
        // per category pair gives a uniform directed joint distribution
        let labels = vec![0, 0, 1, 1, 2, 2, 3, 3];
        let mut edges = vec![];
        for a in 0..4 {
            edges.push((2 * a, 2 * a + 1));
            for b in a + 1..4 {
                edges.push((2 * a, 2 * b));
                edges.push((2 * a + 1, 2 * b + 1));
            }
        }
        let g = graph(labels, 4, &edges);
        assert_abs_diff_eq!(node_label_informativeness(&g).unwrap(), 0.0, epsilon = 1e-12);
        let mono = graph(vec![1, 1], 2, &[(0, 1)]);
        assert!(node_label_informativeness(&mono).is_err());
    }

    #[test]
    fn adjacency_cases() {
        let single = graph(vec![0], 2, &[]);
        assert_eq!(
            normalized_adjacency(&single, AdjacencyMode::SymNormSelfLoops),
            ndarray::array![[1.0]]
        );
        let pair = graph(vec![0, 1], 2, &[(0, 1)]);
        let a = normalized_adjacency(&pair, AdjacencyMode::SymNormSelfLoops);
        for v in a.iter() {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-15);
        }
        let tri = graph(vec![0, 1, 0], 2, &[(0, 1), (1, 2), (0, 2)]);
        let b = normalized_adjacency(&tri, AdjacencyMode::Binary);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b[[i, j]], if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    fn random_graph(n: usize, c: usize, pairs: &[(usize, usize)], labels: &[usize]) -> Graph {
        let mut set = std::collections::BTreeSet::new();
        for &(u, v) in pairs {
            let (u, v) = (u % n, v % n);
            if u != v {
                set.insert((u.min(v), u.max(v)));
            }
        }
        let labels = labels.iter().take(n).map(|y| y % c).collect();
        Graph::new(Array2::zeros((n, 1)), labels, c, set).unwrap()
    }

    proptest! {
        #[test]
        fn sym_norm_is_symmetric_and_contractive(
            pairs in prop::collection::vec((0usize..12, 0usize..12), 0..30),
            labels in prop::collection::vec(0usize..3, 12),
        ) {
            let g = random_graph(12, 3, &pairs, &labels);
            let a = normalized_adjacency(&g, AdjacencyMode::SymNormSelfLoops);
            prop_assert!((&a - &a.t()).iter().all(|v| v.abs() < 1e-15));
            // power iteration on a symmetric matrix: Rayleigh quotient bound
            let mut x = ndarray::Array1::from_elem(12, 1.0);
            let mut lambda = 0.0f64;
            for _ in 0..200 {
                let y = a.dot(&x);
                let norm = y.dot(&y).sqrt();
                if norm == 0.0 { break; }
                lambda = x.dot(&y) / x.dot(&x);
                x = y / norm;
            }
            prop_assert!(lambda.abs() <= 1.0 + 1e-9);
        }

        #[test]
        fn metrics_are_relabeling_invariant(
            pairs in prop::collection::vec((0usize..10, 0usize..10), 1..25),
            labels in prop::collection::vec(0usize..3, 10),
            seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            let g = random_graph(10, 3, &pairs, &labels);
            prop_assume!(g.num_edges() > 0);
            let mut rng = crate::seed::rng(seed);
            let mut perm: Vec<usize> = (0..10).collect();
            perm.shuffle(&mut rng);
            let p = g.permute_nodes(&perm).unwrap();
            prop_assert_eq!(edge_homophily(&g).unwrap(), edge_homophily(&p).unwrap());

            // permuting category ids leaves NLI unchanged
            if let Ok(nli) = node_label_informativeness(&g) {
                let cat = [2usize, 0, 1];
                let relabeled = Graph::new(
                    g.features().clone(),
                    g.labels().iter().map(|&y| cat[y]).collect(),
                    3,
                    g.edges().iter().copied(),
                ).unwrap();
                let nli2 = node_label_informativeness(&relabeled).unwrap();
                prop_assert!((nli - nli2).abs() < 1e-12);
            }
        }
    }
}
