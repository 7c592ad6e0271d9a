//! Label disagreement: the share of a node's nearest feature-space
//! neighbours whose label differs from its own.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::stats::{cohens_d, mean, welch_ttest_one_sided, EffectSize, WelchResult};

pub const DEFAULT_K: usize = 3;

/// For each target, the fraction of its `k` nearest members of
/// `search_space` (itself excluded, ties to the lower id) with another label.
pub fn lds_scores(g: &Graph, search_space: &[usize], targets: &[usize], k: usize) -> Result<Vec<f64>> {
    let n = g.num_nodes();
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if let Some(v) = search_space.iter().chain(targets).find(|&&v| v >= n) {
        return Err(Error::invalid(format!("node {v} outside [0, {n})")));
    }
    let x = g.features();
    let labels = g.labels();
    targets
        .par_iter()
        .map(|&v| {
            let mut cand: Vec<(f64, usize)> = search_space
                .iter()
                .filter(|&&u| u != v)
                .map(|&u| {
                    let d: f64 = x
                        .row(u)
                        .iter()
                        .zip(x.row(v).iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d, u)
                })
                .collect();
            if cand.len() < k {
                return Err(Error::invalid(format!(
                    "search space holds {} nodes besides {v}, need {k}",
                    cand.len()
                )));
            }
            let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if cand.len() > k {
                cand.select_nth_unstable_by(k - 1, order);
            }
            let differ = cand[..k].iter().filter(|&&(_, u)| labels[u] != labels[v]).count();
            Ok(differ as f64 / k as f64)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdsNode {
    pub node: usize,
    pub lds: f64,
    pub memorized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonLevel {
    /// One observation per node.
    Node,
    /// One observation per seed: the seed's group means.
    Seed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdsReport {
    pub k: usize,
    pub per_node: Vec<LdsNode>,
    pub level: ComparisonLevel,
    pub mem_mean: Option<f64>,
    pub nonmem_mean: Option<f64>,
    /// H1: memorized nodes have the larger mean.
    pub welch: Option<WelchResult>,
    pub effect_size: Option<EffectSize>,
    /// A group was empty (or too small), so only means are reported.
    pub incomplete: bool,
}

fn compare(mem: &[f64], nonmem: &[f64]) -> (Option<WelchResult>, Option<EffectSize>) {
    if mem.len() < 2 || nonmem.len() < 2 {
        return (None, None);
    }
    (
        welch_ttest_one_sided(mem, nonmem).ok(),
        cohens_d(mem, nonmem).ok(),
    )
}

fn mean_opt(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| mean(xs))
}

/// Node-level comparison of memorized vs non-memorized LDS.
pub fn lds_comparison(nodes: &[usize], lds: &[f64], memorized: &[bool], k: usize) -> Result<LdsReport> {
    if nodes.len() != lds.len() || lds.len() != memorized.len() {
        return Err(Error::Dimension("node, lds and flag lists differ in length".into()));
    }
    let (mem, nonmem): (Vec<(f64, bool)>, Vec<(f64, bool)>) =
        lds.iter().copied().zip(memorized.iter().copied()).partition(|p| p.1);
    let mem: Vec<f64> = mem.into_iter().map(|p| p.0).collect();
    let nonmem: Vec<f64> = nonmem.into_iter().map(|p| p.0).collect();
    let (welch, effect_size) = compare(&mem, &nonmem);
    Ok(LdsReport {
        k,
        per_node: per_node(nodes, lds, memorized),
        level: ComparisonLevel::Node,
        mem_mean: mean_opt(&mem),
        nonmem_mean: mean_opt(&nonmem),
        incomplete: welch.is_none(),
        welch,
        effect_size,
    })
}

fn per_node(nodes: &[usize], lds: &[f64], memorized: &[bool]) -> Vec<LdsNode> {
    nodes
        .iter()
        .zip(lds)
        .zip(memorized)
        .map(|((&node, &lds), &memorized)| LdsNode {
            node,
            lds,
            memorized,
        })
        .collect()
}

/// Seed-level comparison: each seed contributes its memorized-group mean
/// and its non-memorized-group mean; the test runs over those means.
/// Seeds with an empty group are skipped. `memorized` in the per-node list
/// comes from `ensemble_flags`.
pub fn lds_comparison_by_seed(
    nodes: &[usize],
    lds: &[f64],
    per_seed_flags: &[Vec<bool>],
    ensemble_flags: &[bool],
    k: usize,
) -> Result<LdsReport> {
    if nodes.len() != lds.len()
        || ensemble_flags.len() != lds.len()
        || per_seed_flags.iter().any(|f| f.len() != lds.len())
    {
        return Err(Error::Dimension("node, lds and flag lists differ in length".into()));
    }
    let mut mem_means = Vec::new();
    let mut nonmem_means = Vec::new();
    for flags in per_seed_flags {
        let pick = |want: bool| -> Vec<f64> {
            lds.iter()
                .zip(flags)
                .filter(|p| *p.1 == want)
                .map(|p| *p.0)
                .collect()
        };
        let (m, o) = (pick(true), pick(false));
        if !m.is_empty() && !o.is_empty() {
            mem_means.push(mean(&m));
            nonmem_means.push(mean(&o));
        }
    }
    let (welch, effect_size) = compare(&mem_means, &nonmem_means);
    Ok(LdsReport {
        k,
        per_node: per_node(nodes, lds, ensemble_flags),
        level: ComparisonLevel::Seed,
        mem_mean: mean_opt(&mem_means),
        nonmem_mean: mean_opt(&nonmem_means),
        incomplete: welch.is_none(),
        welch,
        effect_size,
    })
}
