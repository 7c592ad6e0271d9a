//! Feature cosine-similarity rewiring: add the most similar non-edges,
//! delete the least similar edges.

use std::collections::HashSet;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_homophily, Graph, Partition};
use crate::memo::{run_ncmemo, MemConfig, MemOutcome};
use crate::nn::{Hyper, ModelConfig, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewireMode {
    Add,
    Delete,
    Both,
}

impl RewireMode {
    pub const ALL: [RewireMode; 3] = [RewireMode::Add, RewireMode::Delete, RewireMode::Both];

    pub fn name(self) -> &'static str {
        match self {
            RewireMode::Add => "add",
            RewireMode::Delete => "delete",
            RewireMode::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedPair {
    pub u: usize,
    pub v: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewirePlan {
    pub mode: RewireMode,
    pub budget: usize,
    /// Non-edges, most similar first.
    pub additions: Vec<RankedPair>,
    /// Existing edges, least similar first.
    pub deletions: Vec<RankedPair>,
    /// Fewer candidates than `budget` existed for some list.
    pub truncated: bool,
    /// A list was cut short because the next change would have lowered the
    /// mean endpoint similarity.
    pub guard_stopped: bool,
}

impl RewirePlan {
    pub fn is_identity(&self) -> bool {
        self.additions.is_empty() && self.deletions.is_empty()
    }

    pub fn num_changes(&self) -> usize {
        self.additions.len() + self.deletions.len()
    }
}

/// Rows scaled to unit norm; zero rows stay zero and are flagged.
fn unit_rows(x: &Array2<f64>) -> (Array2<f64>, Vec<bool>) {
    let mut out = x.clone();
    let mut zero = Vec::with_capacity(x.nrows());
    for mut row in out.axis_iter_mut(Axis(0)) {
        let norm = row.dot(&row).sqrt();
        zero.push(norm == 0.0);
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
    (out, zero)
}

/// Cosine similarity of feature rows; 0 when either row is zero.
pub fn cosine(g: &Graph, u: usize, v: usize) -> f64 {
    let x = g.features();
    let (a, b) = (x.row(u), x.row(v));
    let (na, nb) = (a.dot(&a).sqrt(), b.dot(&b).sqrt());
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        a.dot(&b) / (na * nb)
    }
}

/// Mean feature cosine similarity over edge endpoints; `None` without edges.
pub fn mean_edge_similarity(g: &Graph) -> Option<f64> {
    if g.num_edges() == 0 {
        return None;
    }
    let total: f64 = g.edges().iter().map(|&(u, v)| cosine(g, u, v)).sum();
    Some(total / g.num_edges() as f64)
}

fn desc(a: &RankedPair, b: &RankedPair) -> std::cmp::Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then((a.u, a.v).cmp(&(b.u, b.v)))
}

fn asc(a: &RankedPair, b: &RankedPair) -> std::cmp::Ordering {
    a.similarity
        .total_cmp(&b.similarity)
        .then((a.u, a.v).cmp(&(b.u, b.v)))
}

fn keep_first(mut v: Vec<RankedPair>, k: usize, ord: fn(&RankedPair, &RankedPair) -> std::cmp::Ordering) -> Vec<RankedPair> {
    if v.len() > k && k > 0 {
        v.select_nth_unstable_by(k - 1, ord);
    }
    v.truncate(k);
    v.sort_by(ord);
    v
}

/// Top-`k` non-adjacent pairs by similarity. Each row keeps its own top-`k`
/// so memory stays at `n * k` before the merge.
fn rank_additions(g: &Graph, k: usize) -> (Vec<RankedPair>, usize) {
    let n = g.num_nodes();
    let (unit, zero) = unit_rows(g.features());
    let adjacency: HashSet<(usize, usize)> = g.edges().iter().copied().collect();
    let per_row: Vec<(Vec<RankedPair>, usize)> = (0..n)
        .into_par_iter()
        .map(|u| {
            if zero[u] || u + 1 >= n {
                return (Vec::new(), 0);
            }
            let sims = unit.slice(ndarray::s![u + 1.., ..]).dot(&unit.row(u));
            let row: Vec<RankedPair> = sims
                .iter()
                .enumerate()
                .map(|(j, &s)| (u + 1 + j, s))
                .filter(|&(v, _)| !zero[v] && !adjacency.contains(&(u, v)))
                .map(|(v, similarity)| RankedPair { u, v, similarity })
                .collect();
            let available = row.len();
            (keep_first(row, k, desc), available)
        })
        .collect();
    let available = per_row.iter().map(|r| r.1).sum();
    let merged = per_row.into_iter().flat_map(|r| r.0).collect();
    (keep_first(merged, k, desc), available)
}

fn rank_deletions(g: &Graph, k: usize) -> Vec<RankedPair> {
    let all = g
        .edges()
        .iter()
        .map(|&(u, v)| RankedPair {
            u,
            v,
            similarity: cosine(g, u, v),
        })
        .collect();
    keep_first(all, k, asc)
}

/// Ranks candidate changes, then admits them one at a time while the
/// running mean endpoint similarity does not drop. Additions are admitted
/// before deletions in `both` mode.
pub fn plan_rewire(g: &Graph, mode: RewireMode, budget: usize) -> RewirePlan {
    let mut plan = RewirePlan {
        mode,
        budget,
        additions: Vec::new(),
        deletions: Vec::new(),
        truncated: false,
        guard_stopped: false,
    };
    if budget == 0 {
        return plan;
    }
    let mut sum: f64 = g.edges().iter().map(|&(u, v)| cosine(g, u, v)).sum();
    let mut count = g.num_edges();
    let mean = |sum: f64, count: usize| {
        if count == 0 {
            f64::NEG_INFINITY
        } else {
            sum / count as f64
        }
    };

    if matches!(mode, RewireMode::Add | RewireMode::Both) {
        let (ranked, available) = rank_additions(g, budget);
        plan.truncated |= available < budget;
        for p in ranked {
            // descending order: once one falls below the mean, all later do
            if p.similarity < mean(sum, count) {
                plan.guard_stopped = true;
                break;
            }
            sum += p.similarity;
            count += 1;
            plan.additions.push(p);
        }
    }
    if matches!(mode, RewireMode::Delete | RewireMode::Both) {
        plan.truncated |= g.num_edges() < budget;
        for p in rank_deletions(g, budget) {
            if count <= 1 || p.similarity > mean(sum, count) {
                plan.guard_stopped = true;
                break;
            }
            sum -= p.similarity;
            count -= 1;
            plan.deletions.push(p);
        }
    }
    if plan.truncated {
        log::warn!(
            "rewire budget {budget} exceeds available candidates ({} mode)",
            mode.name()
        );
    }
    plan
}

/// Applies a plan; a deletion of a missing edge or an addition of an
/// existing one means the plan was made for another graph.
pub fn apply_rewire(g: &Graph, plan: &RewirePlan) -> Result<Graph> {
    let n = g.num_nodes();
    let norm = |p: &RankedPair| -> Result<(usize, usize)> {
        if p.u == p.v || p.u >= n || p.v >= n {
            return Err(Error::invalid(format!("plan pair ({}, {}) is not a valid node pair", p.u, p.v)));
        }
        Ok((p.u.min(p.v), p.u.max(p.v)))
    };
    let mut edges: HashSet<(usize, usize)> = g.edges().iter().copied().collect();
    for p in &plan.deletions {
        let e = norm(p)?;
        if !edges.remove(&e) {
            return Err(Error::invalid(format!("stale plan: edge {e:?} is not in the graph")));
        }
    }
    for p in &plan.additions {
        let e = norm(p)?;
        if g.has_edge(e.0, e.1) || !edges.insert(e) {
            return Err(Error::invalid(format!("stale plan: pair {e:?} is already an edge")));
        }
    }
    g.with_edges(edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewireRow {
    pub mode: RewireMode,
    pub budget: usize,
    pub added: usize,
    pub deleted: usize,
    pub truncated: bool,
    pub homophily_before: f64,
    pub homophily_after: f64,
    pub test_acc_before: f64,
    pub test_acc_after: f64,
    pub mr_before: f64,
    pub mr_after: f64,
    pub selected: bool,
}

impl RewireRow {
    /// Accuracy, homophily and memorization all move the right way.
    pub fn improves_all(&self) -> bool {
        self.test_acc_after > self.test_acc_before
            && self.homophily_after > self.homophily_before
            && self.mr_after < self.mr_before
    }
}

/// Baseline numbers of the unmodified graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewireBaseline {
    pub homophily: f64,
    pub test_acc: f64,
    pub mr: f64,
}

impl RewireBaseline {
    pub fn of<T: Real>(g: &Graph, outcome: &MemOutcome<T>) -> Result<Self> {
        Ok(RewireBaseline {
            homophily: edge_homophily(g)?,
            test_acc: outcome
                .report
                .test_accuracy
                .ok_or_else(|| Error::invalid("partition has no test nodes"))?,
            mr: outcome.report.rate,
        })
    }
}

/// One rewired graph, its retrained outcome and its table row (with
/// `selected` unset). An identity plan reuses the baseline numbers.
pub fn rewire_row<T: Real>(
    g: &Graph,
    p: &Partition,
    plan: &RewirePlan,
    baseline: &RewireBaseline,
    model_cfg: &ModelConfig,
    hyper: &Hyper,
    mem_cfg: &MemConfig,
    global_seed: u64,
) -> Result<(RewireRow, Graph, Option<MemOutcome<T>>)> {
    let rewired = apply_rewire(g, plan)?;
    let mut row = RewireRow {
        mode: plan.mode,
        budget: plan.budget,
        added: plan.additions.len(),
        deleted: plan.deletions.len(),
        truncated: plan.truncated,
        homophily_before: baseline.homophily,
        homophily_after: baseline.homophily,
        test_acc_before: baseline.test_acc,
        test_acc_after: baseline.test_acc,
        mr_before: baseline.mr,
        mr_after: baseline.mr,
        selected: false,
    };
    if plan.is_identity() {
        return Ok((row, rewired, None));
    }
    let outcome = run_ncmemo::<T>(&rewired, p, model_cfg, hyper, mem_cfg, global_seed)?;
    let after = RewireBaseline::of(&rewired, &outcome)?;
    row.homophily_after = after.homophily;
    row.test_acc_after = after.test_acc;
    row.mr_after = after.mr;
    Ok((row, rewired, Some(outcome)))
}

/// Flags the row with the fewest edge changes among those improving
/// accuracy, homophily and memorization at once; earlier rows win ties.
pub fn select_row(rows: &mut [RewireRow]) {
    for r in rows.iter_mut() {
        r.selected = false;
    }
    let best = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.improves_all())
        .min_by_key(|(i, r)| (r.added + r.deleted, *i))
        .map(|(i, _)| i);
    if let Some(i) = best {
        rows[i].selected = true;
    }
}

/// Every mode × budget row against a single baseline run.
pub fn rewire_sweep<T: Real>(
    g: &Graph,
    p: &Partition,
    modes: &[RewireMode],
    budgets: &[usize],
    model_cfg: &ModelConfig,
    hyper: &Hyper,
    mem_cfg: &MemConfig,
    global_seed: u64,
) -> Result<Vec<RewireRow>> {
    let base = run_ncmemo::<T>(g, p, model_cfg, hyper, mem_cfg, global_seed)?;
    let baseline = RewireBaseline::of(g, &base)?;
    let mut rows = Vec::new();
    for &mode in modes {
        for &budget in budgets {
            let plan = plan_rewire(g, mode, budget);
            let (row, _, _) =
                rewire_row::<T>(g, p, &plan, &baseline, model_cfg, hyper, mem_cfg, global_seed)?;
            rows.push(row);
        }
    }
    select_row(&mut rows);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn toy() -> Graph {
        // nodes 0 and 3 share features and are not adjacent
        let x = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        Graph::new(x, vec![0, 1, 1, 0], 2, [(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn zero_budget_is_identity() {
        let g = toy();
        for mode in RewireMode::ALL {
            let plan = plan_rewire(&g, mode, 0);
            assert!(plan.is_identity());
            assert_eq!(apply_rewire(&g, &plan).unwrap(), g);
        }
    }

    #[test]
    fn identical_non_adjacent_pair_is_first_addition() {
        let plan = plan_rewire(&toy(), RewireMode::Add, 2);
        assert_eq!((plan.additions[0].u, plan.additions[0].v), (0, 3));
        assert_abs_diff_eq!(plan.additions[0].similarity, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn deleting_least_similar_edge_raises_mean() {
        let g = toy();
        // edge similarities: (0,1) 0, (1,2) 1/sqrt2, (2,3) 1/sqrt2
        let before = mean_edge_similarity(&g).unwrap();
        assert_abs_diff_eq!(before, 2.0 / 3.0 * std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        let plan = plan_rewire(&g, RewireMode::Delete, 1);
        assert_eq!((plan.deletions[0].u, plan.deletions[0].v), (0, 1));
        let after = mean_edge_similarity(&apply_rewire(&g, &plan).unwrap()).unwrap();
        assert!(after > before);
        assert_abs_diff_eq!(after, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn same_label_identical_additions_raise_homophily() {
        let g = toy();
        let plan = plan_rewire(&g, RewireMode::Add, 1);
        let h = apply_rewire(&g, &plan).unwrap();
        assert!(edge_homophily(&h).unwrap() > edge_homophily(&g).unwrap());
        assert_eq!(h.num_edges(), g.num_edges() + 1);
    }

    #[test]
    fn stale_plans_are_rejected() {
        let g = toy();
        let plan = plan_rewire(&g, RewireMode::Both, 1);
        let h = apply_rewire(&g, &plan).unwrap();
        assert!(apply_rewire(&h, &plan).is_err());
    }

    #[test]
    fn zero_rows_never_added_and_budget_truncates() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [1.0, 0.1]];
        let g = Graph::new(x, vec![0, 1, 1], 2, []).unwrap();
        let plan = plan_rewire(&g, RewireMode::Add, 5);
        assert_eq!(plan.additions.len(), 1);
        assert_eq!((plan.additions[0].u, plan.additions[0].v), (1, 2));
        assert!(plan.truncated);
    }

    #[test]
    fn ties_break_lexicographically() {
        let x = array![[1.0], [1.0], [1.0], [1.0]];
        let g = Graph::new(x, vec![0, 0, 1, 1], 2, [(0, 1)]).unwrap();
        let plan = plan_rewire(&g, RewireMode::Add, 3);
        let pairs: Vec<_> = plan.additions.iter().map(|p| (p.u, p.v)).collect();
        assert_eq!(pairs, vec![(0, 2), (0, 3), (1, 2)]);
    }

    #[test]
    fn selection_prefers_fewest_changes() {
        let row = |added, acc, hom, mr| RewireRow {
            mode: RewireMode::Add,
            budget: added,
            added,
            deleted: 0,
            truncated: false,
            homophily_before: 0.1,
            homophily_after: hom,
            test_acc_before: 0.2,
            test_acc_after: acc,
            mr_before: 80.0,
            mr_after: mr,
            selected: false,
        };
        let mut rows = vec![
            row(100, 0.19, 0.2, 70.0),
            row(500, 0.3, 0.2, 75.0),
            row(1000, 0.4, 0.3, 60.0),
        ];
        select_row(&mut rows);
        assert_eq!(rows.iter().map(|r| r.selected).collect::<Vec<_>>(), [false, true, false]);
    }

    proptest! {
        #[test]
        fn plans_keep_graph_simple_and_similarity_non_decreasing(
            feats in prop::collection::vec(-2i32..3, 24),
            raw_edges in prop::collection::vec((0usize..8, 0usize..8), 0..14),
            budget in 0usize..10,
            mode in prop::sample::select(RewireMode::ALL.to_vec()),
        ) {
            let x = Array2::from_shape_fn((8, 3), |(i, j)| feats[i * 3 + j] as f64);
            let mut edges: Vec<(usize, usize)> = raw_edges
                .into_iter()
                .filter(|(u, v)| u != v)
                .map(|(u, v)| (u.min(v), u.max(v)))
                .collect();
            edges.sort_unstable();
            edges.dedup();
            let g = Graph::new(x, vec![0, 1, 0, 1, 0, 1, 0, 1], 2, edges).unwrap();
            let plan = plan_rewire(&g, mode, budget);
            prop_assert!(plan.additions.len() <= budget && plan.deletions.len() <= budget);
            prop_assert_eq!(&plan, &plan_rewire(&g, mode, budget));
            let h = apply_rewire(&g, &plan).unwrap();
            prop_assert_eq!(
                h.num_edges(),
                g.num_edges() + plan.additions.len() - plan.deletions.len()
            );
            if let (Some(a), Some(b)) = (mean_edge_similarity(&g), mean_edge_similarity(&h)) {
                prop_assert!(b >= a - 1e-12);
            }
            prop_assert_eq!(h.features(), g.features());
            prop_assert_eq!(h.labels(), g.labels());
        }
    }
}
