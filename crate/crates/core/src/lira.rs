//! Likelihood-ratio membership inference against the f models, with
//! transductive membership: a node is a member iff it was in the labeled
//! training mask.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use crate::memo::{build_fg_masks, MemOutcome};
use crate::nn::{predict_proba, train, GraphTensors, Hyper, ModelConfig, ModelState, Real};
use crate::seed;

pub const PROB_CLAMP: f64 = 1e-6;
pub const SIGMA_FLOOR: f64 = 1e-3;
/// Coverage resampling attempts before giving up.
pub const MAX_RESAMPLES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// One in-σ and one out-σ pooled over all nodes.
    #[default]
    Global,
    PerNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiaConfig {
    #[serde(default = "default_num_shadow")]
    pub num_shadow: usize,
    #[serde(default)]
    pub variance_mode: VarianceMode,
    #[serde(default = "default_fprs")]
    pub target_fprs: Vec<f64>,
    /// Subsample members down to the number of non-members.
    #[serde(default = "default_true")]
    pub balance_members: bool,
}

fn default_num_shadow() -> usize {
    16
}
fn default_fprs() -> Vec<f64> {
    vec![0.01]
}
fn default_true() -> bool {
    true
}

impl Default for MiaConfig {
    fn default() -> Self {
        MiaConfig {
            num_shadow: default_num_shadow(),
            variance_mode: VarianceMode::Global,
            target_fprs: default_fprs(),
            balance_members: true,
        }
    }
}

impl MiaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_shadow < 4 {
            // IN >= 2 and OUT >= 2 per node needs at least four shadows
            return Err(Error::invalid(format!(
                "num_shadow must be at least 4, got {}",
                self.num_shadow
            )));
        }
        if let Some(f) = self.target_fprs.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(Error::invalid(format!("target fpr {f} outside (0, 1)")));
        }
        Ok(())
    }
}

/// `ln(p / (1 - p))` with `p` clamped away from 0 and 1.
pub fn logit_confidence(p: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    (p / (1.0 - p)).ln()
}

/// Per-node φ of the true-label probability.
pub fn phi_values<T: Real>(state: &ModelState<T>, ctx: &GraphTensors<T>, labels: &[usize], nodes: &[usize]) -> Result<Vec<f64>> {
    let probs = predict_proba(state, ctx)?;
    Ok(nodes
        .iter()
        .map(|&v| logit_confidence(probs[[v, labels[v]]].f64()))
        .collect())
}

/// Random half-subsets of `pool_len` items, one row per shadow, redrawn
/// until every item is IN at least twice and OUT at least twice.
pub fn sample_membership(pool_len: usize, num_shadow: usize, global: u64) -> Result<Vec<Vec<bool>>> {
    if pool_len < 2 || num_shadow < 4 {
        return Err(Error::invalid("coverage needs a pool of 2+ nodes and 4+ shadows"));
    }
    let half = pool_len / 2;
    for attempt in 0..MAX_RESAMPLES {
        let mut rng = seed::rng(seed::derive(global, "shadow_membership", attempt));
        let mut idx: Vec<usize> = (0..pool_len).collect();
        let rows: Vec<Vec<bool>> = (0..num_shadow)
            .map(|_| {
                idx.shuffle(&mut rng);
                let mut row = vec![false; pool_len];
                for &i in &idx[..half] {
                    row[i] = true;
                }
                row
            })
            .collect();
        let covered = (0..pool_len).all(|i| {
            let ins = rows.iter().filter(|r| r[i]).count();
            ins >= 2 && num_shadow - ins >= 2
        });
        if covered {
            return Ok(rows);
        }
    }
    Err(Error::Degenerate(format!(
        "no membership draw covered every node IN and OUT twice within {MAX_RESAMPLES} attempts"
    )))
}

pub struct ShadowEnsemble<T: Real> {
    pub pool: Vec<usize>,
    /// `membership[s][i]`: pool node `i` was in shadow `s`'s training mask.
    pub membership: Vec<Vec<bool>>,
    pub states: Vec<ModelState<T>>,
}

impl<T: Real> ShadowEnsemble<T> {
    pub fn training_mask(&self, s: usize) -> Vec<usize> {
        self.pool
            .iter()
            .zip(&self.membership[s])
            .filter(|p| *p.1)
            .map(|p| *p.0)
            .collect()
    }
}

/// Trains `cfg.num_shadow` models, each on its own half of `pool`, with the
/// graph and validation mask unchanged. Final states are kept.
pub fn train_shadows<T: Real>(
    g: &Graph,
    pool: &[usize],
    val: &[usize],
    model_cfg: &ModelConfig,
    hyper: &Hyper,
    cfg: &MiaConfig,
    global: u64,
) -> Result<ShadowEnsemble<T>> {
    cfg.validate()?;
    let mut pool = pool.to_vec();
    pool.sort_unstable();
    pool.dedup();
    if pool.iter().any(|v| val.contains(v)) {
        return Err(Error::invalid("shadow pool overlaps the validation mask"));
    }
    let membership = sample_membership(pool.len(), cfg.num_shadow, global)?;
    let ctx = GraphTensors::<T>::new(g);
    let mut ens = ShadowEnsemble {
        pool,
        membership,
        states: Vec::new(),
    };
    ens.states = (0..cfg.num_shadow)
        .into_par_iter()
        .map(|s| {
            let mask = ens.training_mask(s);
            let run = train(&ctx, &mask, val, model_cfg, hyper, seed::derive(global, "shadow", s as u64))?;
            Ok(run.final_state)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ens)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiraScores {
    pub scores: Vec<f64>,
    /// Some σ was below the floor and was raised to it.
    pub sigma_floored: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn log_normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// Likelihood-ratio scores from φ values. `target_phi[t][j]` is target
/// model `t` on node `j`; `shadow_phi[s][j]` and `membership[s][j]` likewise
/// for shadows. Scores are averaged over target models.
pub fn lira_from_phi(
    target_phi: &[Vec<f64>],
    shadow_phi: &[Vec<f64>],
    membership: &[Vec<bool>],
    mode: VarianceMode,
) -> Result<LiraScores> {
    if target_phi.is_empty() || shadow_phi.is_empty() || shadow_phi.len() != membership.len() {
        return Err(Error::invalid("need target models and one membership row per shadow"));
    }
    let n = target_phi[0].len();
    if target_phi.iter().chain(shadow_phi).any(|r| r.len() != n) || membership.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("φ and membership rows differ in length".into()));
    }
    // per node: (mean, sum of squared deviations, count) for in and out
    let mut fits = Vec::with_capacity(n);
    for j in 0..n {
        let side = |want: bool| -> Result<(f64, f64, usize)> {
            let xs: Vec<f64> = shadow_phi
                .iter()
                .zip(membership)
                .filter(|(_, m)| m[j] == want)
                .map(|(p, _)| p[j])
                .collect();
            if xs.len() < 2 {
                return Err(Error::Degenerate(format!(
                    "node index {j} has {} {} shadows, need 2",
                    xs.len(),
                    if want { "IN" } else { "OUT" }
                )));
            }
            let mu = mean(&xs);
            let ss = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
            Ok((mu, ss, xs.len()))
        };
        fits.push((side(true)?, side(false)?));
    }
    let mut floored = false;
    let mut floor = |s: f64| {
        if s < SIGMA_FLOOR {
            floored = true;
            SIGMA_FLOOR
        } else {
            s
        }
    };
    let pooled = |pick: fn(&((f64, f64, usize), (f64, f64, usize))) -> (f64, f64, usize)| {
        let (ss, dof) = fits
            .iter()
            .map(pick)
            .fold((0.0, 0usize), |(a, d), (_, ss, k)| (a + ss, d + k - 1));
        (ss / dof as f64).sqrt()
    };
    let sigmas: Vec<(f64, f64)> = match mode {
        VarianceMode::Global => {
            let s_in = floor(pooled(|f| f.0));
            let s_out = floor(pooled(|f| f.1));
            vec![(s_in, s_out); n]
        }
        VarianceMode::PerNode => fits
            .iter()
            .map(|(i, o)| {
                (
                    floor((i.1 / (i.2 - 1) as f64).sqrt()),
                    floor((o.1 / (o.2 - 1) as f64).sqrt()),
                )
            })
            .collect(),
    };
    let scores = (0..n)
        .map(|j| {
            let ((mu_in, _, _), (mu_out, _, _)) = fits[j];
            let (s_in, s_out) = sigmas[j];
            let per_target: Vec<f64> = target_phi
                .iter()
                .map(|t| log_normal_pdf(t[j], mu_in, s_in) - log_normal_pdf(t[j], mu_out, s_out))
                .collect();
            mean(&per_target)
        })
        .collect();
    Ok(LiraScores {
        scores,
        sigma_floored: floored,
    })
}

/// Scores `nodes` (all of which must be in the shadow pool) against the
/// target models.
pub fn lira_scores<T: Real>(
    targets: &[&ModelState<T>],
    shadows: &ShadowEnsemble<T>,
    g: &Graph,
    nodes: &[usize],
    mode: VarianceMode,
) -> Result<LiraScores> {
    let index: HashMap<usize, usize> = shadows.pool.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let cols = nodes
        .iter()
        .map(|v| {
            index
                .get(v)
                .copied()
                .ok_or_else(|| Error::invalid(format!("node {v} is outside the shadow pool")))
        })
        .collect::<Result<Vec<usize>>>()?;
    let ctx = GraphTensors::<T>::new(g);
    let phi = |s: &ModelState<T>| phi_values(s, &ctx, g.labels(), nodes);
    let target_phi = targets.iter().map(|s| phi(s)).collect::<Result<Vec<_>>>()?;
    let shadow_phi = shadows.states.iter().map(phi).collect::<Result<Vec<_>>>()?;
    let membership: Vec<Vec<bool>> = shadows
        .membership
        .iter()
        .map(|row| cols.iter().map(|&c| row[c]).collect())
        .collect();
    lira_from_phi(&target_phi, &shadow_phi, &membership, mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TprAtFpr {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeScore {
    pub node: usize,
    pub member: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiaReport {
    pub auc: f64,
    pub tpr_at_fpr: Vec<TprAtFpr>,
    pub roc: Vec<RocPoint>,
    pub per_node_scores: Vec<NodeScore>,
    pub sigma_floored: bool,
    pub num_shadow: usize,
}

/// ROC over every distinct score as a "member if score ≥ t" threshold,
/// from (0, 0) to (1, 1); AUC by trapezoid; TPR at each target FPR from
/// the best point whose FPR does not exceed it.
pub fn roc_metrics(scores: &[f64], members: &[bool], target_fprs: &[f64]) -> Result<(f64, Vec<RocPoint>, Vec<TprAtFpr>)> {
    if scores.len() != members.len() {
        return Err(Error::Dimension("scores and member flags differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("NaN membership score"));
    }
    let pos = members.iter().filter(|&&m| m).count();
    let neg = members.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("ROC needs both members and non-members"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut roc = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if members[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        roc.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    let auc = roc
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum();
    let tprs = target_fprs
        .iter()
        .map(|&f| TprAtFpr {
            fpr: f,
            tpr: roc
                .iter()
                .filter(|p| p.fpr <= f)
                .map(|p| p.tpr)
                .fold(0.0, f64::max),
        })
        .collect();
    Ok((auc, roc, tprs))
}

/// Evaluated populations: members from the f training mask, non-members
/// from the test split, members subsampled to the test size if asked.
pub fn mia_populations(p: &Partition, cfg: &MiaConfig, global: u64) -> (Vec<usize>, Vec<usize>) {
    let (mut members, _) = build_fg_masks(p);
    let nonmembers = p.test.clone();
    if cfg.balance_members && members.len() > nonmembers.len() {
        let mut rng = seed::rng(seed::derive(global, "mia_members", 0));
        members.shuffle(&mut rng);
        members.truncate(nonmembers.len());
        members.sort_unstable();
    }
    (members, nonmembers)
}

/// Full attack against a paired run's f models (final states).
pub fn run_mia<T: Real>(
    g: &Graph,
    p: &Partition,
    outcome: &MemOutcome<T>,
    model_cfg: &ModelConfig,
    hyper: &Hyper,
    cfg: &MiaConfig,
    global: u64,
) -> Result<MiaReport> {
    cfg.validate()?;
    let (mask_f, _) = build_fg_masks(p);
    let pool: Vec<usize> = mask_f.iter().chain(&p.test).copied().collect();
    let shadows = train_shadows::<T>(g, &pool, &p.val, model_cfg, hyper, cfg, global)?;
    let (members, nonmembers) = mia_populations(p, cfg, global);
    let nodes: Vec<usize> = members.iter().chain(&nonmembers).copied().collect();
    let flags: Vec<bool> = members
        .iter()
        .map(|_| true)
        .chain(nonmembers.iter().map(|_| false))
        .collect();
    let targets: Vec<&ModelState<T>> = outcome.runs_f.iter().map(|r| &r.final_state).collect();
    let lira = lira_scores(&targets, &shadows, g, &nodes, cfg.variance_mode)?;
    let (auc, roc, tpr_at_fpr) = roc_metrics(&lira.scores, &flags, &cfg.target_fprs)?;
    Ok(MiaReport {
        auc,
        tpr_at_fpr,
        roc,
        per_node_scores: nodes
            .iter()
            .zip(&flags)
            .zip(&lira.scores)
            .map(|((&node, &member), &score)| NodeScore { node, member, score })
            .collect(),
        sigma_floored: lira.sigma_floored,
        num_shadow: cfg.num_shadow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    /// Mann-Whitney estimate: share of (member, non-member) pairs ranked
    /// correctly, ties counting half.
    fn pair_auc(scores: &[f64], members: &[bool]) -> f64 {
        let (mut wins, mut pairs) = (0.0, 0.0);
        for (i, &a) in scores.iter().enumerate() {
            for (j, &b) in scores.iter().enumerate() {
                if members[i] && !members[j] {
                    pairs += 1.0;
                    wins += if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 };
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn hand_roc_cases() {
        let s = [3.0, 2.0, 1.0, 0.0];
        let (auc, _, tpr) = roc_metrics(&s, &[true, true, false, false], &[0.01]).unwrap();
        assert_eq!(auc, 1.0);
        assert_eq!(tpr[0].tpr, 1.0);
        // 3 of the 4 member/non-member pairs are ordered correctly
        let m = [true, false, true, false];
        let (auc, roc, _) = roc_metrics(&s, &m, &[0.01]).unwrap();
        assert_abs_diff_eq!(auc, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(auc, pair_auc(&s, &m), epsilon = 1e-12);
        assert_eq!(roc.len(), 5);
        let m = [true, false, false, true];
        assert_abs_diff_eq!(roc_metrics(&s, &m, &[]).unwrap().0, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn constant_scores_give_diagonal() {
        let (auc, roc, tpr) = roc_metrics(&[0.3; 6], &[true, false, true, false, false, true], &[0.01, 0.5]).unwrap();
        assert_eq!(auc, 0.5);
        assert_eq!(roc, vec![RocPoint { fpr: 0.0, tpr: 0.0 }, RocPoint { fpr: 1.0, tpr: 1.0 }]);
        assert_eq!(tpr[0].tpr, 0.0);
        assert_eq!(tpr[1].tpr, 0.0);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(roc_metrics(&[1.0, 2.0], &[true, true], &[0.01]).is_err());
    }

    #[test]
    fn likelihood_ratio_hand_case() {
        // shadows: in {0, 2} (mean 1, sd sqrt2), out {-1, 1} (mean 0, sd sqrt2)
        let shadow = vec![vec![0.0], vec![2.0], vec![-1.0], vec![1.0]];
        let member = vec![vec![true], vec![true], vec![false], vec![false]];
        let r = lira_from_phi(&[vec![1.0]], &shadow, &member, VarianceMode::PerNode).unwrap();
        // equal σ: score = ((φ-μ_out)^2 - (φ-μ_in)^2) / (2σ^2) = 1 / 4
        assert_abs_diff_eq!(r.scores[0], 0.25, epsilon = 1e-12);
        // with unit σ the same arithmetic gives 1/2
        let z = |x: f64, mu: f64| -0.5 * (x - mu) * (x - mu);
        assert_abs_diff_eq!(z(1.0, 1.0) - z(1.0, 0.0), 0.5);
        assert!(!r.sigma_floored);
    }

    #[test]
    fn zero_spread_is_floored() {
        let shadow = vec![vec![1.0], vec![1.0], vec![0.0], vec![0.0]];
        let member = vec![vec![true], vec![true], vec![false], vec![false]];
        let r = lira_from_phi(&[vec![1.0]], &shadow, &member, VarianceMode::Global).unwrap();
        assert!(r.sigma_floored);
        assert_abs_diff_eq!(r.scores[0], 0.5 / (SIGMA_FLOOR * SIGMA_FLOOR), epsilon = 1e-6);
    }

    #[test]
    fn separated_gaussians_are_nearly_perfect() {
        let mut rng = seed::rng(11);
        let (inn, out) = (Normal::new(5.0, 1.0).unwrap(), Normal::new(-5.0, 1.0).unwrap());
        let n = 200;
        let members: Vec<bool> = (0..n).map(|j| j % 2 == 0).collect();
        let membership = sample_membership(n, 16, 3).unwrap();
        let shadow: Vec<Vec<f64>> = membership
            .iter()
            .map(|row| row.iter().map(|&m| if m { inn.sample(&mut rng) } else { out.sample(&mut rng) }).collect())
            .collect();
        let target: Vec<Vec<f64>> = (0..3)
            .map(|_| members.iter().map(|&m| if m { inn.sample(&mut rng) } else { out.sample(&mut rng) }).collect())
            .collect();
        for mode in [VarianceMode::Global, VarianceMode::PerNode] {
            let r = lira_from_phi(&target, &shadow, &membership, mode).unwrap();
            let (auc, _, _) = roc_metrics(&r.scores, &members, &[0.01]).unwrap();
            assert!(auc >= 0.99, "{mode:?}: {auc}");
        }
    }

    #[test]
    fn identical_in_out_distributions_are_chance() {
        let mut rng = seed::rng(5);
        let d = Normal::new(0.0, 1.0).unwrap();
        let n = 400;
        let members: Vec<bool> = (0..n).map(|j| j % 2 == 0).collect();
        let membership = sample_membership(n, 16, 9).unwrap();
        let shadow: Vec<Vec<f64>> = (0..16).map(|_| (0..n).map(|_| d.sample(&mut rng)).collect()).collect();
        let target: Vec<Vec<f64>> = vec![(0..n).map(|_| d.sample(&mut rng)).collect()];
        let r = lira_from_phi(&target, &shadow, &membership, VarianceMode::Global).unwrap();
        let mean_score = r.scores.iter().sum::<f64>() / n as f64;
        assert!(mean_score.abs() < 0.1, "{mean_score}");
        let (auc, _, _) = roc_metrics(&r.scores, &members, &[]).unwrap();
        assert!((auc - 0.5).abs() <= 0.05, "{auc}");
    }

    #[test]
    fn shuffled_labels_give_null_auc() {
        let mut rng = seed::rng(21);
        let n = 240;
        let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut members: Vec<bool> = (0..n).map(|j| j < n / 2).collect();
        let trials = 200;
        let inside = (0..trials)
            .filter(|_| {
                members.shuffle(&mut rng);
                let auc = roc_metrics(&scores, &members, &[]).unwrap().0;
                (0.4..=0.6).contains(&auc)
            })
            .count();
        assert!(inside as f64 >= 0.95 * trials as f64, "{inside}/{trials}");
    }

    #[test]
    fn membership_coverage_and_balance() {
        let rows = sample_membership(300, 16, 4).unwrap();
        assert_eq!(rows, sample_membership(300, 16, 4).unwrap());
        for row in &rows {
            assert_eq!(row.iter().filter(|&&m| m).count(), 150);
        }
        for j in 0..300 {
            let ins = rows.iter().filter(|r| r[j]).count();
            assert!((2..=14).contains(&ins));
        }
        // P(6 <= Binomial(16, 1/2) <= 10) = 51766 / 65536 ~ 0.79
        let near = (0..300)
            .filter(|&j| {
                let ins = rows.iter().filter(|r| r[j]).count() as f64;
                (ins - 8.0).abs() <= 0.3 * 8.0
            })
            .count();
        assert!(near >= 210, "{near}");
    }

    #[test]
    fn logit_is_clamped() {
        assert_abs_diff_eq!(logit_confidence(0.5), 0.0);
        assert_abs_diff_eq!(logit_confidence(1.0), logit_confidence(1.0 - PROB_CLAMP));
        assert!(logit_confidence(0.0).is_finite());
    }

    proptest! {
        #[test]
        fn auc_is_rank_invariant_and_matches_pair_count(
            raw in prop::collection::vec((-5i32..5, any::<bool>()), 4..40),
        ) {
            let scores: Vec<f64> = raw.iter().map(|r| r.0 as f64).collect();
            let members: Vec<bool> = raw.iter().map(|r| r.1).collect();
            prop_assume!(members.iter().any(|&m| m) && members.iter().any(|&m| !m));
            let (auc, roc, _) = roc_metrics(&scores, &members, &[0.1]).unwrap();
            prop_assert!((auc - pair_auc(&scores, &members)).abs() < 1e-9);
            let warped: Vec<f64> = scores.iter().map(|s| (s * 0.7).exp() + 3.0).collect();
            prop_assert!((roc_metrics(&warped, &members, &[]).unwrap().0 - auc).abs() < 1e-12);
            for w in roc.windows(2) {
                prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
            }
            prop_assert_eq!(*roc.last().unwrap(), RocPoint { fpr: 1.0, tpr: 1.0 });
        }
    }
}
