use ndarray::Array2;

use super::{backward, forward_cached, GraphTensors, ModelState, Real};
use crate::error::{Error, Result};

/// Numerically stable row-wise softmax.
pub fn softmax_rows<T: Real>(logits: &Array2<T>) -> Array2<T> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
    out
}

/// Index of the largest entry; ties resolve to the lowest index.
pub(crate) fn argmax<T: Real>(row: ndarray::ArrayView1<T>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of `nodes` whose argmax prediction equals the label.
pub fn accuracy<T: Real>(logits: &Array2<T>, labels: &[usize], nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let hits = nodes
        .iter()
        .filter(|&&v| argmax(logits.row(v)) == labels[v])
        .count();
    hits as f64 / nodes.len() as f64
}

/// Mean cross-entropy over `mask` against smoothed one-hot targets, and its
/// gradient with respect to the logits (zero outside the mask).
pub(crate) fn cross_entropy<T: Real>(
    logits: &Array2<T>,
    labels: &[usize],
    mask: &[usize],
    smoothing: f64,
) -> Result<(f64, Array2<T>)> {
    if mask.is_empty() {
        return Err(Error::invalid("loss mask is empty"));
    }
    let c = logits.ncols();
    let scale = 1.0 / mask.len() as f64;
    let off = smoothing / c as f64;
    let on = 1.0 - smoothing + off;
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut loss = 0.0;
    for &v in mask {
        let y = *labels
            .get(v)
            .ok_or_else(|| Error::invalid(format!("mask node {v} has no label")))?;
        if y >= c {
            return Err(Error::Dimension(format!(
                "label {y} of node {v} outside {c} outputs"
            )));
        }
        let row = logits.row(v);
        let max = row.iter().fold(f64::NEG_INFINITY, |m, &z| m.max(z.f64()));
        let lse = max + row.iter().map(|&z| (z.f64() - max).exp()).sum::<f64>().ln();
        for (k, &z) in row.iter().enumerate() {
            let target = if k == y { on } else { off };
            let logp = z.f64() - lse;
            loss -= target * logp;
            grad[[v, k]] = T::of((logp.exp() - target) * scale);
        }
    }
    Ok((loss * scale, grad))
}

/// Training loss on `mask` and its parameter gradients.
pub fn loss_and_grad<T: Real>(
    state: &ModelState<T>,
    ctx: &GraphTensors<T>,
    mask: &[usize],
    labels: &[usize],
) -> Result<(f64, Vec<Array2<T>>)> {
    let cache = forward_cached(state, ctx)?;
    let (loss, dlogits) =
        cross_entropy(cache.logits(), labels, mask, state.config.label_smoothing)?;
    let grads = backward(state, ctx, &cache, &dlogits)?;
    Ok((loss, grads))
}
