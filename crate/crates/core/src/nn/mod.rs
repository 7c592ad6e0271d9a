//! Dense full-batch GNN stack with hand-written backpropagation.
//!
//! Everything is generic over [`Real`] so the same code runs in `f32` for
//! experiments and `f64` for gradient verification.

mod adam;
mod context;
mod io;
mod loss;
mod model;
mod sparse;
mod train;

use std::fmt::{Debug, Display};

use ndarray::{Array2, LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamConfig, AdamState};
pub use context::GraphTensors;
pub use io::{load_model, save_model};
pub use loss::{accuracy, loss_and_grad, softmax_rows};
pub use model::{backward, forward, forward_cached, predict_proba, ForwardCache};
pub use sparse::Csr;
pub use train::{train, EpochStats, Hyper, TrainRun};

use crate::error::{Error, Result};

pub trait Real:
    Float
    + FromPrimitive
    + LinalgScalar
    + ScalarOperand
    + Send
    + Sync
    + Debug
    + Display
    + Default
    + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Real")
    }

    fn f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backbone {
    #[default]
    Gcn,
    Sage,
    Gatv2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub backbone: Backbone,
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    #[serde(default = "default_heads")]
    pub gatv2_heads: usize,
    #[serde(default)]
    pub label_smoothing: f64,
}

fn default_heads() -> usize {
    1
}

impl ModelConfig {
    pub fn new(backbone: Backbone, input_dim: usize, hidden_dim: usize, output_dim: usize) -> Self {
        ModelConfig {
            backbone,
            num_layers: 3,
            hidden_dim,
            input_dim,
            output_dim,
            gatv2_heads: 1,
            label_smoothing: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0 {
            return Err(Error::invalid("num_layers must be at least 1"));
        }
        if self.hidden_dim == 0 || self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::invalid("model dimensions must be positive"));
        }
        if self.backbone == Backbone::Gatv2 && self.gatv2_heads == 0 {
            return Err(Error::invalid("gatv2_heads must be positive"));
        }
        if !(0.0..1.0).contains(&self.label_smoothing) {
            return Err(Error::invalid(format!(
                "label_smoothing {} outside [0, 1)",
                self.label_smoothing
            )));
        }
        Ok(())
    }

    /// `(in, out)` per layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        (0..self.num_layers)
            .map(|l| {
                let i = if l == 0 { self.input_dim } else { self.hidden_dim };
                let o = if l + 1 == self.num_layers {
                    self.output_dim
                } else {
                    self.hidden_dim
                };
                (i, o)
            })
            .collect()
    }

    pub fn tensors_per_layer(&self) -> usize {
        match self.backbone {
            Backbone::Gcn => 1,
            Backbone::Sage => 2,
            Backbone::Gatv2 => 3 * self.gatv2_heads,
        }
    }

    /// Parameter tensor names and shapes in storage order.
    ///
    /// GCN: one weight per layer. SAGE: self and neighbour weights.
    /// GATv2: per head a source projection, a target projection and an
    /// attention vector of the layer's output width.
    pub fn param_specs(&self) -> Vec<(String, (usize, usize))> {
        let mut out = Vec::new();
        for (l, (i, o)) in self.layer_dims().into_iter().enumerate() {
            match self.backbone {
                Backbone::Gcn => out.push((format!("layer{l}.weight"), (i, o))),
                Backbone::Sage => {
                    out.push((format!("layer{l}.self"), (i, o)));
                    out.push((format!("layer{l}.neigh"), (i, o)));
                }
                Backbone::Gatv2 => {
                    for k in 0..self.gatv2_heads {
                        out.push((format!("layer{l}.head{k}.src"), (i, o)));
                        out.push((format!("layer{l}.head{k}.dst"), (i, o)));
                        out.push((format!("layer{l}.head{k}.attn"), (1, o)));
                    }
                }
            }
        }
        out
    }

    pub fn num_params(&self) -> usize {
        self.param_specs().iter().map(|(_, (r, c))| r * c).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelState<T: Real> {
    pub config: ModelConfig,
    pub params: Vec<Array2<T>>,
    pub adam: AdamState<T>,
    pub seed: u64,
    pub epoch: usize,
}

impl<T: Real> ModelState<T> {
    pub fn param_name(&self, index: usize) -> String {
        self.config
            .param_specs()
            .get(index)
            .map(|(n, _)| n.clone())
            .unwrap_or_else(|| format!("#{index}"))
    }

    pub fn with_params(config: ModelConfig, params: Vec<Array2<T>>, seed: u64) -> Result<Self> {
        config.validate()?;
        let specs = config.param_specs();
        if specs.len() != params.len() {
            return Err(Error::Dimension(format!(
                "expected {} parameter tensors, got {}",
                specs.len(),
                params.len()
            )));
        }
        for ((name, shape), p) in specs.iter().zip(&params) {
            if p.dim() != *shape {
                return Err(Error::Dimension(format!(
                    "{name}: expected {shape:?}, got {:?}",
                    p.dim()
                )));
            }
        }
        let adam = AdamState::zeros_like(&params);
        Ok(ModelState {
            config,
            params,
            adam,
            seed,
            epoch: 0,
        })
    }

    /// Parameters cast to another precision (Adam state is reset).
    pub fn cast<U: Real>(&self) -> ModelState<U> {
        let params = self.params.iter().map(|p| p.mapv(|v| U::of(v.f64()))).collect();
        let mut s = ModelState::with_params(self.config.clone(), params, self.seed)
            .expect("shapes already validated");
        s.epoch = self.epoch;
        s
    }
}

/// Glorot-uniform weights, zero Adam moments. Values are drawn in `f64` so
/// `f32` and `f64` states from the same seed agree up to rounding.
pub fn init_params<T: Real>(config: &ModelConfig, seed: u64) -> Result<ModelState<T>> {
    config.validate()?;
    let mut rng = crate::seed::rng(crate::seed::derive(seed, "init_params", 0));
    let params = config
        .param_specs()
        .into_iter()
        .map(|(_, (r, c))| {
            let fan = if r == 1 { c + 1 } else { r + c };
            let bound = (6.0 / fan as f64).sqrt();
            Array2::from_shape_simple_fn((r, c), || T::of(rng.random_range(-bound..bound)))
        })
        .collect();
    ModelState::with_params(config.clone(), params, seed)
}
