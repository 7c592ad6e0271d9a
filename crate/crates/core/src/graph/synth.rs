//! Homophily-controlled preferential-attachment generator.
//!
//! Nodes arrive one at a time with a uniformly drawn category and attach
//! `m` edges to distinct existing nodes, each target chosen with probability
//! proportional to `H[y_new][y_target] * degree(target)`.

use std::path::PathBuf;

use ndarray::{Array1, Array2};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FeatureSource {
    /// `x = mean_separation * u_c + std * N(0, I)` with `u_c` a random unit
    /// vector per category.
    Gaussian {
        dim: usize,
        mean_separation: f64,
        std: f64,
    },
    /// Rows drawn per category from an existing bundle's features/labels
    /// (edges are ignored). Category `c` samples pool rows labelled `c`.
    Pool { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynSpec {
    pub num_nodes: usize,
    pub num_categories: usize,
    pub edges_per_new_node: usize,
    pub target_homophily: f64,
    /// Explicit row-stochastic compatibility matrix; derived from
    /// `target_homophily` when absent.
    #[serde(default)]
    pub compatibility: Option<Vec<Vec<f64>>>,
    pub features: FeatureSource,
    pub seed: u64,
}

impl SynSpec {
    /// 1490 nodes, 5 categories, 2 edges per arriving node. The Gaussian
    /// features are weak enough that a GCN cannot classify a fully
    /// heterophilous graph from them, yet strong enough for feature cosine
    /// similarity to favour same-category pairs.
    pub fn syn_cora(target_homophily: f64, seed: u64) -> Self {
        SynSpec {
            num_nodes: 1490,
            num_categories: 5,
            edges_per_new_node: 2,
            target_homophily,
            compatibility: None,
            features: FeatureSource::Gaussian {
                dim: 256,
                mean_separation: 3.0,
                std: 1.0,
            },
            seed,
        }
    }

    /// `H_ii = h`, `H_ij = (1 - h) / (C - 1)`.
    pub fn homophily_matrix(h: f64, c: usize) -> Vec<Vec<f64>> {
        let off = (1.0 - h) / (c as f64 - 1.0);
        (0..c)
            .map(|i| (0..c).map(|j| if i == j { h } else { off }).collect())
            .collect()
    }

    pub fn compatibility_matrix(&self) -> Result<Vec<Vec<f64>>> {
        let c = self.num_categories;
        let h = match &self.compatibility {
            Some(h) => h.clone(),
            None => {
                if !(0.0..=1.0).contains(&self.target_homophily) {
                    return Err(Error::invalid(format!(
                        "target_homophily {} outside [0, 1]",
                        self.target_homophily
                    )));
                }
                Self::homophily_matrix(self.target_homophily, c)
            }
        };
        if h.len() != c || h.iter().any(|r| r.len() != c) {
            return Err(Error::Dimension(format!("compatibility matrix must be {c}x{c}")));
        }
        for (i, row) in h.iter().enumerate() {
            if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::invalid(format!("compatibility row {i} has invalid entries")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("compatibility row {i} sums to {s}")));
            }
        }
        Ok(h)
    }
}

fn validate(spec: &SynSpec) -> Result<()> {
    if spec.num_categories < 2 {
        return Err(Error::invalid("need at least 2 categories"));
    }
    if spec.num_nodes < spec.num_categories {
        return Err(Error::invalid("num_nodes must be at least num_categories"));
    }
    if spec.edges_per_new_node == 0 {
        return Err(Error::invalid("edges_per_new_node must be positive"));
    }
    Ok(())
}

/// Picks an index with probability proportional to `weights`, or `None` if
/// they are all zero.
fn weighted_pick(weights: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut r = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = Some(i);
            if r < w {
                return Some(i);
            }
            r -= w;
        }
    }
    last
}

fn grow_edges(
    labels: &[usize],
    compat: &[Vec<f64>],
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let n = labels.len();
    let c = compat.len();
    let mut degree = vec![0usize; n];
    let mut edges = Vec::with_capacity(n * m);
    let mut weights = Vec::with_capacity(n);
    for u in c..n {
        let row = &compat[labels[u]];
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        for _ in 0..m {
            weights.clear();
            weights.extend((0..u).map(|v| {
                if chosen.contains(&v) {
                    0.0
                } else {
                    row[labels[v]] * degree[v] as f64
                }
            }));
            let pick = weighted_pick(&weights, rng).or_else(|| {
                // all degree-weighted candidates are zero: uniform over the
                // remaining nodes whose category is compatible
                let support: Vec<usize> = (0..u)
                    .filter(|v| !chosen.contains(v) && row[labels[*v]] > 0.0)
                    .collect();
                support.choose(rng).copied()
            });
            match pick {
                Some(v) => chosen.push(v),
                None => break,
            }
        }
        for &v in &chosen {
            degree[u] += 1;
            degree[v] += 1;
            edges.push((v, u));
        }
    }
    edges
}

fn gaussian_features(
    labels: &[usize],
    c: usize,
    dim: usize,
    separation: f64,
    std: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Array2<f64>> {
    if dim == 0 || !(std >= 0.0) || !separation.is_finite() {
        return Err(Error::invalid("gaussian feature source needs dim > 0 and std >= 0"));
    }
    let means: Vec<Array1<f64>> = (0..c)
        .map(|_| {
            let v: Array1<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let norm = v.dot(&v).sqrt();
            v * (separation / norm)
        })
        .collect();
    let mut x = Array2::zeros((labels.len(), dim));
    for (i, &y) in labels.iter().enumerate() {
        let mut row = x.row_mut(i);
        for (j, slot) in row.iter_mut().enumerate() {
            let z: f64 = StandardNormal.sample(rng);
            *slot = means[y][j] + std * z;
        }
    }
    Ok(x)
}

fn pool_features(
    labels: &[usize],
    c: usize,
    path: &std::path::Path,
    rng: &mut ChaCha8Rng,
) -> Result<Array2<f64>> {
    let (pool, pool_labels, pool_c) = super::io::load_feature_pool(path)?;
    if pool_c < c {
        return Err(Error::invalid(format!(
            "feature pool has {pool_c} categories, generator needs {c}"
        )));
    }
    let mut by_cat: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (i, &y) in pool_labels.iter().enumerate() {
        if y < c {
            by_cat[y].push(i);
        }
    }
    if let Some(k) = by_cat.iter().position(|v| v.is_empty()) {
        return Err(Error::invalid(format!("feature pool has no rows of category {k}")));
    }
    for rows in &mut by_cat {
        rows.shuffle(rng);
    }
    // without replacement until a category's pool is exhausted, then cycle
    let mut cursor = vec![0usize; c];
    let mut x = Array2::zeros((labels.len(), pool.ncols()));
    for (i, &y) in labels.iter().enumerate() {
        let src = by_cat[y][cursor[y] % by_cat[y].len()];
        cursor[y] += 1;
        x.row_mut(i).assign(&pool.row(src));
    }
    Ok(x)
}

pub fn generate_syn_graph(spec: &SynSpec) -> Result<Graph> {
    validate(spec)?;
    let compat = spec.compatibility_matrix()?;
    let c = spec.num_categories;
    let mut rng = crate::seed::rng(crate::seed::derive(spec.seed, "syn_structure", 0));
    let mut labels: Vec<usize> = (0..c).collect();
    labels.extend((c..spec.num_nodes).map(|_| rng.random_range(0..c)));
    let edges = grow_edges(&labels, &compat, spec.edges_per_new_node, &mut rng);

    let mut frng = crate::seed::rng(crate::seed::derive(spec.seed, "syn_features", 0));
    let features = match &spec.features {
        FeatureSource::Gaussian {
            dim,
            mean_separation,
            std,
        } => gaussian_features(&labels, c, *dim, *mean_separation, *std, &mut frng)?,
        FeatureSource::Pool { path } => pool_features(&labels, c, path, &mut frng)?,
    };
    Graph::new(features, labels, c, edges)
}
