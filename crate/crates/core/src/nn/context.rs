use ndarray::Array2;

use super::{Csr, Real};
use crate::graph::{AdjacencyMode, Graph};

/// Per-graph tensors shared by every forward pass: features, the GCN
/// propagation matrix, the neighbour-mean operator and the attention
/// neighbourhoods. First-layer propagated features are precomputed.
#[derive(Debug, Clone)]
pub struct GraphTensors<T: Real> {
    pub num_nodes: usize,
    pub num_categories: usize,
    pub labels: Vec<usize>,
    pub x: Array2<T>,
    /// `D^-1/2 (A + I) D^-1/2` (symmetric).
    pub sym_adj: Csr<T>,
    pub sym_ax: Array2<T>,
    /// Row-normalised neighbour mean; isolated nodes get an empty row.
    pub mean_adj: Csr<T>,
    pub mean_ax: Array2<T>,
    /// Incoming attention neighbourhoods `N(i) ∪ {i}`; values unused.
    pub attn: Csr<T>,
}

impl<T: Real> GraphTensors<T> {
    pub fn new(g: &Graph) -> Self {
        let n = g.num_nodes();
        let x = g.features().mapv(T::of);
        let sym_adj = Csr::from_sorted_entries(
            n,
            n,
            crate::graph::adjacency_entries(g, AdjacencyMode::SymNormSelfLoops)
                .into_iter()
                .map(|(i, j, w)| (i, j, T::of(w))),
        );
        let nbrs = g.neighbors();
        let mean_adj = Csr::from_sorted_entries(
            n,
            n,
            nbrs.iter().enumerate().flat_map(|(i, ns)| {
                let w = T::of(1.0 / ns.len().max(1) as f64);
                ns.iter().map(move |&j| (i, j, w))
            }),
        );
        let attn = Csr::from_sorted_entries(
            n,
            n,
            nbrs.iter().enumerate().flat_map(|(i, ns)| {
                let mut row = ns.clone();
                row.push(i);
                row.sort_unstable();
                row.into_iter().map(move |j| (i, j, T::one()))
            }),
        );
        let sym_ax = sym_adj.spmm(&x.view());
        let mean_ax = mean_adj.spmm(&x.view());
        GraphTensors {
            num_nodes: n,
            num_categories: g.num_categories(),
            labels: g.labels().to_vec(),
            x,
            sym_adj,
            sym_ax,
            mean_adj,
            mean_ax,
            attn,
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.x.ncols()
    }
}
