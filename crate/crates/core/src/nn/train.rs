use serde::{Deserialize, Serialize};

use super::loss::cross_entropy;
use super::{
    accuracy, adam_step, backward, forward_cached, init_params, AdamConfig, GraphTensors,
    ModelConfig, ModelState, Real,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyper {
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_weight_decay")]
    pub weight_decay: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Keep a state copy every this many epochs (plus epoch 0 and the last
    /// epoch). Zero disables snapshots.
    #[serde(default)]
    pub snapshot_interval: usize,
}

fn default_lr() -> f64 {
    0.01
}
fn default_weight_decay() -> f64 {
    5e-4
}
fn default_epochs() -> usize {
    100
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            lr: default_lr(),
            weight_decay: default_weight_decay(),
            epochs: default_epochs(),
            snapshot_interval: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainRun<T: Real> {
    pub final_state: ModelState<T>,
    /// Highest validation accuracy; ties keep the earlier epoch.
    pub best_state: ModelState<T>,
    pub history: Vec<EpochStats>,
    /// Ascending by epoch.
    pub snapshots: Vec<ModelState<T>>,
}

impl<T: Real> TrainRun<T> {
    pub fn snapshot_at(&self, epoch: usize) -> Option<&ModelState<T>> {
        self.snapshots.iter().find(|s| s.epoch == epoch)
    }
}

fn wants_snapshot(epoch: usize, interval: usize, last: usize) -> bool {
    interval > 0 && (epoch % interval == 0 || epoch == last)
}

/// Full-batch Adam training from a fresh initialisation under `seed`.
pub fn train<T: Real>(
    ctx: &GraphTensors<T>,
    train_mask: &[usize],
    val_mask: &[usize],
    cfg: &ModelConfig,
    hyper: &Hyper,
    seed: u64,
) -> Result<TrainRun<T>> {
    let mut in_train = vec![false; ctx.num_nodes];
    for &v in train_mask {
        *in_train
            .get_mut(v)
            .ok_or_else(|| Error::invalid(format!("train node {v} out of range")))? = true;
    }
    if let Some(v) = val_mask.iter().find(|&&v| v >= ctx.num_nodes || in_train[v]) {
        return Err(Error::invalid(format!(
            "validation node {v} is out of range or overlaps the training mask"
        )));
    }
    let adam = AdamConfig::new(hyper.lr, hyper.weight_decay);
    let smoothing = cfg.label_smoothing;
    let mut state: ModelState<T> = init_params(cfg, seed)?;
    let mut cache = forward_cached(&state, ctx)?;
    let mut best_state = state.clone();
    let mut best_val = accuracy(cache.logits(), &ctx.labels, val_mask);
    let mut snapshots = Vec::new();
    if wants_snapshot(0, hyper.snapshot_interval, hyper.epochs) {
        snapshots.push(state.clone());
    }
    let names: Vec<String> = (0..state.params.len()).map(|i| state.param_name(i)).collect();
    let mut history = Vec::with_capacity(hyper.epochs);
    for epoch in 1..=hyper.epochs {
        let (_, dlogits) = cross_entropy(cache.logits(), &ctx.labels, train_mask, smoothing)?;
        let grads = backward(&state, ctx, &cache, &dlogits)?;
        adam_step(&mut state.params, &grads, &mut state.adam, &adam, |i| {
            names[i].clone()
        })?;
        state.epoch = epoch;
        cache = forward_cached(&state, ctx)?;
        let logits = cache.logits();
        let (train_loss, _) = cross_entropy(logits, &ctx.labels, train_mask, smoothing)?;
        let val_acc = accuracy(logits, &ctx.labels, val_mask);
        history.push(EpochStats {
            epoch,
            train_loss,
            train_acc: accuracy(logits, &ctx.labels, train_mask),
            val_acc,
        });
        if val_acc > best_val {
            best_val = val_acc;
            best_state = state.clone();
        }
        if wants_snapshot(epoch, hyper.snapshot_interval, hyper.epochs) {
            snapshots.push(state.clone());
        }
    }
    Ok(TrainRun {
        final_state: state,
        best_state,
        history,
        snapshots,
    })
}
