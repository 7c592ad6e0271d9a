//! Empirical node-level neural tangent kernel and kernel alignment.
//!
//! `Θ(i, j) = Σ_c ⟨∂f_c(v_i)/∂W, ∂f_c(v_j)/∂W⟩` over all parameters, i.e.
//! the per-class Jacobian Gram matrices summed over output coordinates.

use std::collections::HashMap;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{adjacency_entries, AdjacencyMode, Graph};
use crate::nn::{backward, forward_cached, ForwardCache, GraphTensors, ModelState, Real, TrainRun};
use crate::stats::pearson_r;

/// Subsets larger than this use the sketched kernel by default.
pub const EXACT_LIMIT: usize = 2000;
pub const DEFAULT_SKETCH_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NtkMode {
    Exact,
    /// Gradients are hashed into `dim` buckets with random signs (a sparse
    /// sign projection) before the inner products.
    Sketch { dim: usize, seed: u64 },
}

impl NtkMode {
    pub fn for_subset(len: usize) -> Self {
        if len > EXACT_LIMIT {
            NtkMode::Sketch {
                dim: DEFAULT_SKETCH_DIM,
                seed: 0,
            }
        } else {
            NtkMode::Exact
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub node_ids: Vec<usize>,
    pub values: Array2<f64>,
}

fn check_subset(subset: &[usize], n: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::invalid("kernel subset is empty"));
    }
    if let Some(v) = subset.iter().find(|&&v| v >= n) {
        return Err(Error::invalid(format!("kernel subset node {v} outside [0, {n})")));
    }
    Ok(())
}

struct Sketch {
    bucket: Vec<u32>,
    negate: Vec<bool>,
    dim: usize,
}

impl Sketch {
    fn new(num_params: usize, dim: usize, seed: u64) -> Result<Self> {
        use rand::Rng;
        if dim == 0 {
            return Err(Error::invalid("sketch dimension must be positive"));
        }
        let mut rng = crate::seed::rng(crate::seed::derive(seed, "ntk_sketch", 0));
        let bucket = (0..num_params).map(|_| rng.random_range(0..dim as u32)).collect();
        let negate = (0..num_params).map(|_| rng.random::<bool>()).collect();
        Ok(Sketch {
            bucket,
            negate,
            dim,
        })
    }
}

/// Flattened parameter gradient of logit `class` at `node`.
fn logit_gradient<T: Real>(
    state: &ModelState<T>,
    ctx: &GraphTensors<T>,
    cache: &ForwardCache<T>,
    node: usize,
    class: usize,
    sketch: Option<&Sketch>,
    out: &mut [T],
) -> Result<()> {
    let mut seed = Array2::zeros(cache.logits().raw_dim());
    seed[[node, class]] = T::one();
    let grads = backward(state, ctx, cache, &seed)?;
    let flat = grads.iter().flat_map(|g| g.iter().copied());
    match sketch {
        None => out.iter_mut().zip(flat).for_each(|(o, v)| *o = v),
        Some(s) => {
            out.fill(T::zero());
            for (p, v) in flat.enumerate() {
                let b = s.bucket[p] as usize;
                out[b] = if s.negate[p] { out[b] - v } else { out[b] + v };
            }
        }
    }
    Ok(())
}

/// Empirical NTK of `state` restricted to `subset` (in the given order).
pub fn empirical_ntk<T: Real>(
    state: &ModelState<T>,
    ctx: &GraphTensors<T>,
    subset: &[usize],
    mode: NtkMode,
) -> Result<KernelMatrix> {
    check_subset(subset, ctx.num_nodes)?;
    let cache = forward_cached(state, ctx)?;
    let num_params = state.config.num_params();
    let sketch = match mode {
        NtkMode::Exact => None,
        NtkMode::Sketch { dim, seed } => Some(Sketch::new(num_params, dim, seed)?),
    };
    let width = sketch.as_ref().map_or(num_params, |s| s.dim);
    let m = subset.len();
    let mut theta = Array2::<T>::zeros((m, m));
    let mut jac = Array2::<T>::zeros((m, width));
    for class in 0..state.config.output_dim {
        jac.axis_iter_mut(Axis(0))
            .into_par_iter()
            .zip(subset.par_iter())
            .try_for_each(|(mut row, &v)| {
                let out = row.as_slice_mut().expect("rows are contiguous");
                logit_gradient(state, ctx, &cache, v, class, sketch.as_ref(), out)
            })?;
        ndarray::linalg::general_mat_mul(T::one(), &jac, &jac.t(), T::one(), &mut theta);
    }
    let mut values = theta.mapv(|v| v.f64());
    // exact symmetry; the product is symmetric up to summation order
    for i in 0..m {
        for j in 0..i {
            let s = 0.5 * (values[[i, j]] + values[[j, i]]);
            values[[i, j]] = s;
            values[[j, i]] = s;
        }
    }
    Ok(KernelMatrix {
        node_ids: subset.to_vec(),
        values,
    })
}

/// Same-label indicator kernel.
pub fn optimal_kernel(labels: &[usize], subset: &[usize]) -> Result<KernelMatrix> {
    check_subset(subset, labels.len())?;
    let values = Array2::from_shape_fn((subset.len(), subset.len()), |(i, j)| {
        f64::from(u8::from(labels[subset[i]] == labels[subset[j]]))
    });
    Ok(KernelMatrix {
        node_ids: subset.to_vec(),
        values,
    })
}

/// The graph's adjacency (in `mode`) restricted to `subset` rows and columns.
pub fn adjacency_kernel(g: &Graph, subset: &[usize], mode: AdjacencyMode) -> Result<KernelMatrix> {
    check_subset(subset, g.num_nodes())?;
    let index: HashMap<usize, usize> = subset.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut values = Array2::zeros((subset.len(), subset.len()));
    for (u, v, w) in adjacency_entries(g, mode) {
        if let (Some(&i), Some(&j)) = (index.get(&u), index.get(&v)) {
            values[[i, j]] = w;
        }
    }
    Ok(KernelMatrix {
        node_ids: subset.to_vec(),
        values,
    })
}

/// Frobenius cosine `⟨K1, K2⟩ / (‖K1‖ ‖K2‖)`, accumulated in `f64`.
pub fn kernel_alignment(a: &KernelMatrix, b: &KernelMatrix) -> Result<f64> {
    if a.node_ids != b.node_ids {
        return Err(Error::Dimension("kernels index different node lists".into()));
    }
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.values.iter().zip(b.values.iter()) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::Degenerate("kernel with zero Frobenius norm".into()));
    }
    Ok((ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSeries {
    pub epochs: Vec<usize>,
    /// `A(Θ_t, Â)` per epoch.
    pub kernel_graph: Vec<f64>,
    /// `A(Θ_t, Θ*)` per epoch.
    pub kernel_target: Vec<f64>,
    /// `A(Â, Θ*)`; does not depend on training.
    pub graph_target: f64,
    pub adjacency_mode: AdjacencyMode,
    pub ntk_mode: NtkMode,
    pub subset: Vec<usize>,
}

impl AlignmentSeries {
    pub fn final_kernel_graph(&self) -> f64 {
        *self.kernel_graph.last().expect("series is nonempty")
    }

    pub fn final_kernel_target(&self) -> f64 {
        *self.kernel_target.last().expect("series is nonempty")
    }
}

/// Alignments of every snapshot's NTK with the adjacency and target kernels.
pub fn track_alignments<T: Real>(
    run: &TrainRun<T>,
    g: &Graph,
    subset: &[usize],
    adjacency_mode: AdjacencyMode,
    ntk_mode: NtkMode,
) -> Result<AlignmentSeries> {
    if run.snapshots.len() < 2 {
        return Err(Error::invalid(format!(
            "alignment tracking needs at least 2 snapshots, run has {}",
            run.snapshots.len()
        )));
    }
    let ctx = GraphTensors::<T>::new(g);
    let adj = adjacency_kernel(g, subset, adjacency_mode)?;
    let target = optimal_kernel(g.labels(), subset)?;
    let graph_target = kernel_alignment(&adj, &target)?;
    let pairs = run
        .snapshots
        .iter()
        .map(|s| {
            let theta = empirical_ntk(s, &ctx, subset, ntk_mode)?;
            Ok((kernel_alignment(&theta, &adj)?, kernel_alignment(&theta, &target)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlignmentSeries {
        epochs: run.snapshots.iter().map(|s| s.epoch).collect(),
        kernel_graph: pairs.iter().map(|p| p.0).collect(),
        kernel_target: pairs.iter().map(|p| p.1).collect(),
        graph_target,
        adjacency_mode,
        ntk_mode,
        subset: subset.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentCorrelation {
    /// Pearson r of rate vs final kernel-target alignment.
    pub r_target: f64,
    /// Pearson r of rate vs final kernel-graph alignment.
    pub r_graph: f64,
}

/// `points` are `(rate, final kernel-target, final kernel-graph)`.
pub fn mr_alignment_correlation(points: &[(f64, f64, f64)]) -> Result<AlignmentCorrelation> {
    if points.len() < 3 {
        return Err(Error::invalid("correlation needs at least 3 points"));
    }
    let rate: Vec<f64> = points.iter().map(|p| p.0).collect();
    let target: Vec<f64> = points.iter().map(|p| p.1).collect();
    let graph: Vec<f64> = points.iter().map(|p| p.2).collect();
    Ok(AlignmentCorrelation {
        r_target: pearson_r(&rate, &target)?,
        r_graph: pearson_r(&rate, &graph)?,
    })
}
