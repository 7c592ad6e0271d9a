//! Forward and backward passes for the GCN, GraphSAGE and GATv2 stacks.
//!
//! Layers are `z = layer(h)` with ReLU between layers and raw logits out of
//! the last one. The backward pass keeps track of which rows of the upstream
//! gradient are nonzero, so a gradient seeded at a single node only touches
//! that node's receptive field.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::sparse::{matmul, matmul_tn};
use super::{Backbone, GraphTensors, ModelState, Real};
use crate::error::{Error, Result};

const LEAKY_SLOPE: f64 = 0.2;

struct HeadCache<T> {
    src: Array2<T>,
    /// Pre-activation `dst[i] + src[j]` per attention edge (CSR order).
    pre: Array2<T>,
    alpha: Vec<T>,
}

enum LayerCache<T> {
    Gcn {
        /// `A_hat h`; `None` on the first layer (precomputed in the context).
        prop: Option<Array2<T>>,
    },
    Sage {
        input: Option<Array2<T>>,
        mean: Option<Array2<T>>,
    },
    Gat {
        input: Option<Array2<T>>,
        heads: Vec<HeadCache<T>>,
    },
}

/// Activations retained for [`backward`].
pub struct ForwardCache<T: Real> {
    layers: Vec<LayerCache<T>>,
    /// Pre-activations per layer; the last entry is the logits.
    pre: Vec<Array2<T>>,
}

impl<T: Real> ForwardCache<T> {
    pub fn logits(&self) -> &Array2<T> {
        self.pre.last().expect("at least one layer")
    }
}

fn relu<T: Real>(v: T) -> T {
    if v > T::zero() {
        v
    } else {
        T::zero()
    }
}

fn leaky<T: Real>(v: T) -> T {
    if v > T::zero() {
        v
    } else {
        v * T::of(LEAKY_SLOPE)
    }
}

fn leaky_grad<T: Real>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else {
        T::of(LEAKY_SLOPE)
    }
}

fn check_dims<T: Real>(state: &ModelState<T>, ctx: &GraphTensors<T>) -> Result<()> {
    if ctx.feature_dim() != state.config.input_dim {
        return Err(Error::Dimension(format!(
            "graph has {} features, model expects {}",
            ctx.feature_dim(),
            state.config.input_dim
        )));
    }
    Ok(())
}

fn gat_head_forward<T: Real>(
    ctx: &GraphTensors<T>,
    input: &ArrayView2<T>,
    w_src: &Array2<T>,
    w_dst: &Array2<T>,
    attn: &Array2<T>,
    out: &mut Array2<T>,
    scale: T,
) -> HeadCache<T> {
    let src = input.dot(w_src);
    let dst = input.dot(w_dst);
    let width = src.ncols();
    let a = attn.row(0);
    let adj = &ctx.attn;
    let mut pre = Array2::zeros((adj.nnz(), width));
    let mut alpha = vec![T::zero(); adj.nnz()];
    for i in 0..ctx.num_nodes {
        let range = adj.row(i);
        let mut max = T::neg_infinity();
        for p in range.clone() {
            let j = adj.indices[p];
            let mut row = pre.row_mut(p);
            row.assign(&dst.row(i));
            row.scaled_add(T::one(), &src.row(j));
            let e = row
                .iter()
                .zip(a.iter())
                .fold(T::zero(), |acc, (&s, &w)| acc + w * leaky(s));
            alpha[p] = e;
            if e > max {
                max = e;
            }
        }
        let mut total = T::zero();
        for p in range.clone() {
            alpha[p] = (alpha[p] - max).exp();
            total = total + alpha[p];
        }
        let mut o = out.row_mut(i);
        for p in range {
            alpha[p] = alpha[p] / total;
            o.scaled_add(alpha[p] * scale, &src.row(adj.indices[p]));
        }
    }
    HeadCache {
        src,
        pre,
        alpha,
    }
}

/// Forward pass keeping the activations needed by [`backward`].
pub fn forward_cached<T: Real>(
    state: &ModelState<T>,
    ctx: &GraphTensors<T>,
) -> Result<ForwardCache<T>> {
    check_dims(state, ctx)?;
    let cfg = &state.config;
    let per = cfg.tensors_per_layer();
    let num_layers = cfg.num_layers;
    let mut layers = Vec::with_capacity(num_layers);
    let mut pre = Vec::with_capacity(num_layers);
    let mut hidden: Option<Array2<T>> = None;
    for l in 0..num_layers {
        let p = &state.params[l * per..(l + 1) * per];
        let input = hidden.take();
        let (z, cache) = match cfg.backbone {
            Backbone::Gcn => {
                let prop = input.as_ref().map(|h| ctx.sym_adj.spmm(&h.view()));
                let m = prop.as_ref().unwrap_or(&ctx.sym_ax);
                (m.dot(&p[0]), LayerCache::Gcn { prop })
            }
            Backbone::Sage => {
                let mean = input.as_ref().map(|h| ctx.mean_adj.spmm(&h.view()));
                let h = input.as_ref().unwrap_or(&ctx.x);
                let m = mean.as_ref().unwrap_or(&ctx.mean_ax);
                let z = h.dot(&p[0]) + m.dot(&p[1]);
                (z, LayerCache::Sage { input, mean })
            }
            Backbone::Gatv2 => {
                let h = input.as_ref().unwrap_or(&ctx.x).view();
                let heads = cfg.gatv2_heads;
                let scale = T::one() / T::of(heads as f64);
                let mut z = Array2::zeros((ctx.num_nodes, p[0].ncols()));
                let caches = (0..heads)
                    .map(|k| {
                        gat_head_forward(ctx, &h, &p[3 * k], &p[3 * k + 1], &p[3 * k + 2], &mut z, scale)
                    })
                    .collect();
                (
                    z,
                    LayerCache::Gat {
                        input,
                        heads: caches,
                    },
                )
            }
        };
        if l + 1 < num_layers {
            hidden = Some(z.mapv(relu));
        }
        layers.push(cache);
        pre.push(z);
    }
    Ok(ForwardCache { layers, pre })
}

/// Logits, `n x output_dim`.
pub fn forward<T: Real>(state: &ModelState<T>, ctx: &GraphTensors<T>) -> Result<Array2<T>> {
    let mut cache = forward_cached(state, ctx)?;
    Ok(cache.pre.pop().expect("at least one layer"))
}

/// Row-wise softmax of the logits.
pub fn predict_proba<T: Real>(state: &ModelState<T>, ctx: &GraphTensors<T>) -> Result<Array2<T>> {
    Ok(super::softmax_rows(&forward(state, ctx)?))
}

#[allow(clippy::too_many_arguments)]
fn gat_head_backward<T: Real>(
    ctx: &GraphTensors<T>,
    input: &ArrayView2<T>,
    cache: &HeadCache<T>,
    w_src: &Array2<T>,
    w_dst: &Array2<T>,
    attn: &Array2<T>,
    dout: &ArrayView2<T>,
    grads: &mut [Array2<T>],
    dinput: Option<&mut Array2<T>>,
) {
    let adj = &ctx.attn;
    let width = cache.src.ncols();
    let a = attn.row(0);
    let mut dsrc = Array2::<T>::zeros((ctx.num_nodes, width));
    let mut ddst = Array2::<T>::zeros((ctx.num_nodes, width));
    let mut da = Array1::<T>::zeros(width);
    let mut dalpha = Vec::new();
    for i in 0..ctx.num_nodes {
        let g = dout.row(i);
        if g.iter().all(|v| v.is_zero()) {
            continue;
        }
        let range = adj.row(i);
        dalpha.clear();
        let mut weighted = T::zero();
        for p in range.clone() {
            let d = g.dot(&cache.src.row(adj.indices[p]));
            weighted = weighted + cache.alpha[p] * d;
            dalpha.push(d);
        }
        for (k, p) in range.enumerate() {
            let j = adj.indices[p];
            let alpha = cache.alpha[p];
            dsrc.row_mut(j).scaled_add(alpha, &g);
            let de = alpha * (dalpha[k] - weighted);
            if de.is_zero() {
                continue;
            }
            let pre = cache.pre.row(p);
            for o in 0..width {
                let s = pre[o];
                da[o] = da[o] + de * leaky(s);
                let ds = de * a[o] * leaky_grad(s);
                ddst[[i, o]] = ddst[[i, o]] + ds;
                dsrc[[j, o]] = dsrc[[j, o]] + ds;
            }
        }
    }
    grads[0] = matmul_tn(input, &dsrc.view());
    grads[1] = matmul_tn(input, &ddst.view());
    grads[2] = da.insert_axis(Axis(0));
    if let Some(dh) = dinput {
        dh.scaled_add(T::one(), &matmul(&dsrc.view(), &w_src.t()));
        dh.scaled_add(T::one(), &matmul(&ddst.view(), &w_dst.t()));
    }
}

/// Gradients of `sum(dlogits * logits)` with respect to every parameter,
/// in storage order.
pub fn backward<T: Real>(
    state: &ModelState<T>,
    ctx: &GraphTensors<T>,
    cache: &ForwardCache<T>,
    dlogits: &Array2<T>,
) -> Result<Vec<Array2<T>>> {
    let cfg = &state.config;
    if dlogits.dim() != cache.logits().dim() {
        return Err(Error::Dimension(format!(
            "dlogits {:?} vs logits {:?}",
            dlogits.dim(),
            cache.logits().dim()
        )));
    }
    let per = cfg.tensors_per_layer();
    let mut grads: Vec<Array2<T>> = state.params.iter().map(|p| Array2::zeros(p.raw_dim())).collect();
    let mut dz = dlogits.clone();
    for l in (0..cfg.num_layers).rev() {
        let p = &state.params[l * per..(l + 1) * per];
        let g = &mut grads[l * per..(l + 1) * per];
        let need_input = l > 0;
        let dh: Option<Array2<T>> = match &cache.layers[l] {
            LayerCache::Gcn { prop } => {
                let m = prop.as_ref().unwrap_or(&ctx.sym_ax);
                g[0] = matmul_tn(&m.view(), &dz.view());
                need_input.then(|| {
                    let dm = matmul(&dz.view(), &p[0].t());
                    ctx.sym_adj.spmm_t(&dm.view())
                })
            }
            LayerCache::Sage { input, mean } => {
                let h = input.as_ref().unwrap_or(&ctx.x);
                let m = mean.as_ref().unwrap_or(&ctx.mean_ax);
                g[0] = matmul_tn(&h.view(), &dz.view());
                g[1] = matmul_tn(&m.view(), &dz.view());
                need_input.then(|| {
                    let dm = matmul(&dz.view(), &p[1].t());
                    matmul(&dz.view(), &p[0].t()) + ctx.mean_adj.spmm_t(&dm.view())
                })
            }
            LayerCache::Gat { input, heads } => {
                let h = input.as_ref().unwrap_or(&ctx.x).view();
                let scale = T::one() / T::of(heads.len() as f64);
                let dout = dz.mapv(|v| v * scale);
                let mut dh = need_input.then(|| Array2::zeros(h.raw_dim()));
                for (k, hc) in heads.iter().enumerate() {
                    gat_head_backward(
                        ctx,
                        &h,
                        hc,
                        &p[3 * k],
                        &p[3 * k + 1],
                        &p[3 * k + 2],
                        &dout.view(),
                        &mut g[3 * k..3 * k + 3],
                        dh.as_mut(),
                    );
                }
                dh
            }
        };
        if let Some(mut dh) = dh {
            // through the ReLU of the previous layer
            let z_prev = &cache.pre[l - 1];
            dh.zip_mut_with(z_prev, |d, &z| {
                if z <= T::zero() {
                    *d = T::zero();
                }
            });
            dz = dh;
        }
    }
    Ok(grads)
}
