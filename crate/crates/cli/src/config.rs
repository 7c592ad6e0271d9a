use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ncmemo::graph::{AdjacencyMode, SplitFractions, SynSpec};
use ncmemo::lira::MiaConfig;
use ncmemo::memo::MemConfig;
use ncmemo::nn::{Backbone, Hyper, ModelConfig};
use ncmemo::rewire::RewireMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// Directory written by `generate` or `save_graph`.
    Bundle(PathBuf),
    Syn(SynSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    #[serde(default = "default_split")]
    pub split: SplitFractions,
    #[serde(default = "default_sub")]
    pub sub: SplitFractions,
    /// Defaults to a sub-seed of the global seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_split() -> SplitFractions {
    SplitFractions::TRAIN_VAL_TEST
}
fn default_sub() -> SplitFractions {
    SplitFractions::SHARED_CANDIDATE_INDEPENDENT
}

impl Default for PartitionSpec {
    fn default() -> Self {
        PartitionSpec {
            split: default_split(),
            sub: default_sub(),
            seed: None,
        }
    }
}

/// Model settings without the graph-derived input/output widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub backbone: Backbone,
    #[serde(default = "default_layers")]
    pub num_layers: usize,
    #[serde(default = "default_hidden")]
    pub hidden_dim: usize,
    #[serde(default = "default_heads")]
    pub gatv2_heads: usize,
    #[serde(default)]
    pub label_smoothing: f64,
}

fn default_layers() -> usize {
    3
}
fn default_hidden() -> usize {
    32
}
fn default_heads() -> usize {
    1
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            backbone: Backbone::Gcn,
            num_layers: default_layers(),
            hidden_dim: default_hidden(),
            gatv2_heads: default_heads(),
            label_smoothing: 0.0,
        }
    }
}

impl ModelSpec {
    pub fn resolve(&self, input_dim: usize, output_dim: usize) -> ModelConfig {
        ModelConfig {
            backbone: self.backbone,
            num_layers: self.num_layers,
            hidden_dim: self.hidden_dim,
            input_dim,
            output_dim,
            gatv2_heads: self.gatv2_heads,
            label_smoothing: self.label_smoothing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    Memscore,
    Ntk,
    Lds,
    Rewire,
    Mia,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NtkSubset {
    /// Nodes the f models train on.
    #[default]
    FTrain,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NtkSpec {
    #[serde(default = "default_snapshot_interval")]
    pub snapshot_interval: usize,
    #[serde(default)]
    pub adjacency_mode: AdjacencyMode,
    #[serde(default)]
    pub subset: NtkSubset,
    /// Index of the f seed whose run is tracked.
    #[serde(default)]
    pub track_seed: usize,
}

fn default_snapshot_interval() -> usize {
    5
}

impl Default for NtkSpec {
    fn default() -> Self {
        NtkSpec {
            snapshot_interval: default_snapshot_interval(),
            adjacency_mode: AdjacencyMode::default(),
            subset: NtkSubset::default(),
            track_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdsSpec {
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_k() -> usize {
    ncmemo::lds::DEFAULT_K
}

impl Default for LdsSpec {
    fn default() -> Self {
        LdsSpec { k: default_k() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewireSpec {
    #[serde(default = "default_modes")]
    pub modes: Vec<RewireMode>,
    #[serde(default = "default_budgets")]
    pub budgets: Vec<usize>,
    /// Also attack every rewired graph (adds AUC columns).
    #[serde(default)]
    pub with_mia: bool,
    /// Save each rewired graph as a bundle.
    #[serde(default = "default_true")]
    pub save_graphs: bool,
}

fn default_modes() -> Vec<RewireMode> {
    RewireMode::ALL.to_vec()
}
fn default_budgets() -> Vec<usize> {
    vec![100, 500, 1000]
}
fn default_true() -> bool {
    true
}

impl Default for RewireSpec {
    fn default() -> Self {
        RewireSpec {
            modes: default_modes(),
            budgets: default_budgets(),
            with_mia: false,
            save_graphs: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_homophily")]
    pub homophily: Vec<f64>,
}

fn default_homophily() -> Vec<f64> {
    vec![0.0, 0.3, 0.5, 0.7, 1.0]
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            homophily: default_homophily(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    #[serde(default)]
    pub partition: PartitionSpec,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub hyper: Hyper,
    #[serde(default)]
    pub mem: MemConfig,
    #[serde(default)]
    pub modules: Vec<Module>,
    #[serde(default)]
    pub ntk: NtkSpec,
    #[serde(default)]
    pub lds: LdsSpec,
    #[serde(default)]
    pub rewire: RewireSpec,
    #[serde(default)]
    pub mia: MiaConfig,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub float64: bool,
}

impl ExperimentConfig {
    /// Parses JSON, reporting schema violations with their field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("config field `{path}`: {}", e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        self.mem.validate()?;
        if !self.modules.is_empty() {
            self.mia.validate()?;
        }
        if self.lds.k == 0 {
            bail!("config field `lds.k`: must be positive");
        }
        if self.ntk.snapshot_interval == 0 {
            bail!("config field `ntk.snapshot_interval`: must be positive");
        }
        if self.ntk.track_seed >= self.mem.num_seeds {
            bail!(
                "config field `ntk.track_seed`: {} but only {} seeds",
                self.ntk.track_seed,
                self.mem.num_seeds
            );
        }
        if let Some(h) = self.sweep.homophily.iter().find(|h| !(0.0..=1.0).contains(*h)) {
            bail!("config field `sweep.homophily`: {h} outside [0, 1]");
        }
        Ok(())
    }

    pub fn wants(&self, m: Module) -> bool {
        self.modules.contains(&m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"graph": {"syn": {"num_nodes": 60, "num_categories": 3,
        "edges_per_new_node": 2, "target_homophily": 0.5,
        "features": {"kind": "gaussian", "dim": 4, "mean_separation": 1.0, "std": 1.0},
        "seed": 1}}}"#;

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.model, ModelSpec::default());
        assert_eq!(cfg.mem.tau, 0.5);
        assert_eq!(cfg.mia.num_shadow, 16);
        assert!(cfg.modules.is_empty());
    }

    #[test]
    fn unknown_fields_name_their_path() {
        let bad = MINIMAL.replacen("\"seed\": 1}", "\"seed\": 1, \"colour\": 2}", 1);
        let err = format!("{:#}", ExperimentConfig::from_json(&bad).unwrap_err());
        assert!(err.contains("graph.syn"), "{err}");
        let bad = MINIMAL.replacen("{\"graph\"", "{\"hyper\": {\"lr\": \"fast\"}, \"graph\"", 1);
        let err = format!("{:#}", ExperimentConfig::from_json(&bad).unwrap_err());
        assert!(err.contains("hyper.lr"), "{err}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = MINIMAL.replacen("{\"graph\"", "{\"mem\": {\"tau\": 1.5}, \"graph\"", 1);
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = MINIMAL.replacen("{\"graph\"", "{\"sweep\": {\"homophily\": [1.2]}, \"graph\"", 1);
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }
}
