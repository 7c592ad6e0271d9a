//! Paired-model label memorization.
//!
//! Model `f` trains on shared + candidate nodes, model `g` on shared +
//! independent nodes. A node's score is the mean confidence of the `f`
//! models on its true label minus that of the `g` models, so it lies in
//! `[-1, 1]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use crate::nn::{
    accuracy, forward, predict_proba, train, GraphTensors, Hyper, ModelConfig, ModelState, Real,
    TrainRun,
};
use crate::stats::{cohens_d, welch_ttest_one_sided, EffectSize, Summary, WelchResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceMode {
    /// Softmax mass on the true label.
    #[default]
    TrueClassProbability,
    /// 1 if the argmax equals the true label, else 0.
    ZeroOneCorrectness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Average over the final models of every seed.
    #[default]
    ExpectationOverSeeds,
    /// Per side, only the validation-selected model of the seed with the
    /// highest validation accuracy.
    BestByVal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemConfig {
    #[serde(default = "default_num_seeds")]
    pub num_seeds: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub confidence_mode: ConfidenceMode,
    #[serde(default)]
    pub selection: Selection,
    /// f-seed `i` and g-seed `i` share the same initialisation seed.
    #[serde(default = "default_paired")]
    pub paired: bool,
}

fn default_num_seeds() -> usize {
    3
}
fn default_tau() -> f64 {
    0.5
}
fn default_paired() -> bool {
    true
}

impl Default for MemConfig {
    fn default() -> Self {
        MemConfig {
            num_seeds: default_num_seeds(),
            tau: default_tau(),
            confidence_mode: ConfidenceMode::default(),
            selection: Selection::default(),
            paired: default_paired(),
        }
    }
}

impl MemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_seeds == 0 {
            return Err(Error::invalid("num_seeds must be at least 1"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid(format!("tau {} outside (0, 1)", self.tau)));
        }
        Ok(())
    }
}

/// `(S_S ∪ S_C, S_S ∪ S_I)`, both sorted.
pub fn build_fg_masks(p: &Partition) -> (Vec<usize>, Vec<usize>) {
    let join = |other: &[usize]| {
        let mut m: Vec<usize> = p.shared.iter().chain(other).copied().collect();
        m.sort_unstable();
        m
    };
    (join(&p.candidate), join(&p.independent))
}

/// Per-node confidence of one model on the true labels of `nodes`.
pub fn confidences<T: Real>(
    state: &ModelState<T>,
    ctx: &GraphTensors<T>,
    nodes: &[usize],
    mode: ConfidenceMode,
) -> Result<Vec<f64>> {
    Ok(match mode {
        ConfidenceMode::TrueClassProbability => {
            let p = predict_proba(state, ctx)?;
            nodes.iter().map(|&v| p[[v, ctx.labels[v]]].f64()).collect()
        }
        ConfidenceMode::ZeroOneCorrectness => {
            let z = forward(state, ctx)?;
            nodes
                .iter()
                .map(|&v| accuracy(&z, &ctx.labels, &[v]))
                .collect()
        }
    })
}

/// Mean of the `f` rows minus mean of the `g` rows, per column.
pub fn scores_from_confidences(conf_f: &[Vec<f64>], conf_g: &[Vec<f64>]) -> Result<Vec<f64>> {
    if conf_f.is_empty() || conf_g.is_empty() {
        return Err(Error::invalid("memorization scores need at least one model per side"));
    }
    let n = conf_f[0].len();
    if conf_f.iter().chain(conf_g).any(|c| c.len() != n) {
        return Err(Error::Dimension("confidence vectors differ in length".into()));
    }
    let side_mean = |rows: &[Vec<f64>], i: usize| {
        rows.iter().map(|r| r[i]).sum::<f64>() / rows.len() as f64
    };
    Ok((0..n)
        .map(|i| side_mean(conf_f, i) - side_mean(conf_g, i))
        .collect())
}

pub fn memorization_scores<T: Real>(
    models_f: &[&ModelState<T>],
    models_g: &[&ModelState<T>],
    ctx: &GraphTensors<T>,
    nodes: &[usize],
    mode: ConfidenceMode,
) -> Result<Vec<f64>> {
    let conf = |models: &[&ModelState<T>]| {
        models
            .par_iter()
            .map(|m| confidences(m, ctx, nodes, mode))
            .collect::<Result<Vec<_>>>()
    };
    scores_from_confidences(&conf(models_f)?, &conf(models_g)?)
}

/// Percentage of scores strictly above `tau`.
pub fn memorization_rate(scores: &[f64], tau: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::invalid("memorization rate of an empty score set"));
    }
    let above = scores.iter().filter(|&&s| s > tau).count();
    Ok(100.0 * above as f64 / scores.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Shared,
    Candidate,
    Independent,
    /// Nodes seen by neither model (the test split).
    Extra,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Shared,
        Category::Candidate,
        Category::Independent,
        Category::Extra,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Shared => "shared",
            Category::Candidate => "candidate",
            Category::Independent => "independent",
            Category::Extra => "extra",
        }
    }

    pub fn nodes(self, p: &Partition) -> &[usize] {
        match self {
            Category::Shared => &p.shared,
            Category::Candidate => &p.candidate,
            Category::Independent => &p.independent,
            Category::Extra => &p.extra,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScores {
    pub category: Category,
    pub nodes: Vec<usize>,
    pub scores: Vec<f64>,
    pub summary: Option<Summary>,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRate {
    pub epoch: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemMeta {
    pub model: ModelConfig,
    pub hyper: Hyper,
    pub mem: MemConfig,
    pub seeds_f: Vec<u64>,
    pub seeds_g: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemReport {
    pub tau: f64,
    /// Rate on the candidate nodes.
    pub rate: f64,
    pub categories: Vec<CategoryScores>,
    pub per_epoch: Vec<EpochRate>,
    /// Test accuracy of the validation-selected f models, averaged over seeds.
    pub test_accuracy: Option<f64>,
    pub meta: MemMeta,
}

impl MemReport {
    pub fn category(&self, c: Category) -> &CategoryScores {
        self.categories
            .iter()
            .find(|s| s.category == c)
            .expect("report holds every category")
    }
}

/// Everything produced by one paired run; the trained models are kept for
/// downstream alignment and membership-inference analyses.
pub struct MemOutcome<T: Real> {
    pub report: MemReport,
    pub runs_f: Vec<TrainRun<T>>,
    pub runs_g: Vec<TrainRun<T>>,
    /// Seed `i`'s own score (f-seed `i` minus g-seed `i`) per candidate node.
    pub per_seed_candidate_scores: Vec<Vec<f64>>,
}

pub fn seeds_for(global: u64, cfg: &MemConfig) -> (Vec<u64>, Vec<u64>) {
    let f: Vec<u64> = (0..cfg.num_seeds as u64)
        .map(|i| crate::seed::derive(global, "train", i))
        .collect();
    let g = if cfg.paired {
        f.clone()
    } else {
        (0..cfg.num_seeds as u64)
            .map(|i| crate::seed::derive(global, "train_g", i))
            .collect()
    };
    (f, g)
}

fn best_by_val<T: Real>(runs: &[TrainRun<T>]) -> &ModelState<T> {
    let val = |r: &TrainRun<T>| {
        let e = r.best_state.epoch;
        if e == 0 {
            f64::NEG_INFINITY
        } else {
            r.history[e - 1].val_acc
        }
    };
    let mut best = &runs[0];
    for r in &runs[1..] {
        if val(r) > val(best) {
            best = r;
        }
    }
    &best.best_state
}

/// Trains the paired f/g ensembles and scores every partition category.
pub fn run_ncmemo<T: Real>(
    g: &Graph,
    p: &Partition,
    model_cfg: &ModelConfig,
    hyper: &Hyper,
    mem_cfg: &MemConfig,
    global_seed: u64,
) -> Result<MemOutcome<T>> {
    mem_cfg.validate()?;
    let ctx = GraphTensors::<T>::new(g);
    let (mask_f, mask_g) = build_fg_masks(p);
    let (seeds_f, seeds_g) = seeds_for(global_seed, mem_cfg);
    let jobs: Vec<(&[usize], u64)> = seeds_f
        .iter()
        .map(|&s| (mask_f.as_slice(), s))
        .chain(seeds_g.iter().map(|&s| (mask_g.as_slice(), s)))
        .collect();
    let mut runs = jobs
        .par_iter()
        .map(|&(mask, seed)| train(&ctx, mask, &p.val, model_cfg, hyper, seed))
        .collect::<Result<Vec<_>>>()?;
    let runs_g = runs.split_off(mem_cfg.num_seeds);
    let runs_f = runs;

    let (side_f, side_g): (Vec<&ModelState<T>>, Vec<&ModelState<T>>) = match mem_cfg.selection {
        Selection::ExpectationOverSeeds => (
            runs_f.iter().map(|r| &r.final_state).collect(),
            runs_g.iter().map(|r| &r.final_state).collect(),
        ),
        Selection::BestByVal => (vec![best_by_val(&runs_f)], vec![best_by_val(&runs_g)]),
    };
    let mode = mem_cfg.confidence_mode;
    let mut categories = Vec::with_capacity(4);
    for c in Category::ALL {
        let nodes = c.nodes(p).to_vec();
        let scores = if nodes.is_empty() {
            Vec::new()
        } else {
            memorization_scores(&side_f, &side_g, &ctx, &nodes, mode)?
        };
        categories.push(CategoryScores {
            category: c,
            summary: Summary::of(&scores),
            rate: memorization_rate(&scores, mem_cfg.tau).ok(),
            nodes,
            scores,
        });
    }
    let rate = categories[1]
        .rate
        .ok_or_else(|| Error::invalid("partition has no candidate nodes"))?;

    let per_seed_candidate_scores = runs_f
        .iter()
        .zip(&runs_g)
        .map(|(f, gr)| {
            memorization_scores(&[&f.final_state], &[&gr.final_state], &ctx, &p.candidate, mode)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_epoch = Vec::new();
    let epochs: Vec<usize> = runs_f[0].snapshots.iter().map(|s| s.epoch).collect();
    for t in epochs {
        let sf: Option<Vec<_>> = runs_f.iter().map(|r| r.snapshot_at(t)).collect();
        let sg: Option<Vec<_>> = runs_g.iter().map(|r| r.snapshot_at(t)).collect();
        let (Some(sf), Some(sg)) = (sf, sg) else {
            continue;
        };
        let scores = memorization_scores(&sf, &sg, &ctx, &p.candidate, mode)?;
        per_epoch.push(EpochRate {
            epoch: t,
            rate: memorization_rate(&scores, mem_cfg.tau)?,
        });
    }

    let test_accuracy = if p.test.is_empty() {
        None
    } else {
        let accs = runs_f
            .iter()
            .map(|r| Ok(accuracy(&forward(&r.best_state, &ctx)?, g.labels(), &p.test)))
            .collect::<Result<Vec<f64>>>()?;
        Some(crate::stats::mean(&accs))
    };

    let report = MemReport {
        tau: mem_cfg.tau,
        rate,
        categories,
        per_epoch,
        test_accuracy,
        meta: MemMeta {
            model: model_cfg.clone(),
            hyper: *hyper,
            mem: mem_cfg.clone(),
            seeds_f,
            seeds_g,
        },
    };
    Ok(MemOutcome {
        report,
        runs_f,
        runs_g,
        per_seed_candidate_scores,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryTest {
    /// Alternative hypothesis: mean score of `greater` exceeds that of `lesser`.
    pub greater: Category,
    pub lesser: Category,
    pub welch: WelchResult,
    pub effect_size: EffectSize,
}

/// The four one-sided comparisons C>S, C>E, S>I and E>I.
pub const CATEGORY_HYPOTHESES: [(Category, Category); 4] = [
    (Category::Candidate, Category::Shared),
    (Category::Candidate, Category::Extra),
    (Category::Shared, Category::Independent),
    (Category::Extra, Category::Independent),
];

pub fn category_ttests(report: &MemReport) -> Result<Vec<CategoryTest>> {
    CATEGORY_HYPOTHESES
        .iter()
        .map(|&(greater, lesser)| {
            let a = &report.category(greater).scores;
            let b = &report.category(lesser).scores;
            Ok(CategoryTest {
                greater,
                lesser,
                welch: welch_ttest_one_sided(a, b)?,
                effect_size: cohens_d(a, b)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_partition, SplitFractions};
    use crate::nn::Backbone;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn partition(shared: &[usize], cand: &[usize], ind: &[usize]) -> Partition {
        Partition {
            shared: shared.to_vec(),
            candidate: cand.to_vec(),
            independent: ind.to_vec(),
            extra: vec![],
            val: vec![],
            test: vec![],
            split: SplitFractions::TRAIN_VAL_TEST,
            sub: SplitFractions::SHARED_CANDIDATE_INDEPENDENT,
            seed: 0,
        }
    }

    #[test]
    fn fg_masks() {
        let (f, g) = build_fg_masks(&partition(&[0, 1], &[2], &[3]));
        assert_eq!(f, vec![0, 1, 2]);
        assert_eq!(g, vec![0, 1, 3]);
        let (f, g) = build_fg_masks(&partition(&[0, 1], &[], &[]));
        assert_eq!(f, g);
    }

    #[test]
    fn hand_scores() {
        let s = scores_from_confidences(&vec![vec![1.0]; 3], &vec![vec![0.0]; 3]).unwrap();
        assert_eq!(s, vec![1.0]);
        let s = scores_from_confidences(
            &[vec![0.9], vec![0.8], vec![0.7]],
            &[vec![0.2], vec![0.3], vec![0.1]],
        )
        .unwrap();
        assert_abs_diff_eq!(s[0], 0.6, epsilon = 1e-12);
        assert!(scores_from_confidences(&[], &[vec![0.0]]).is_err());
    }

    #[test]
    fn hand_rate() {
        assert_eq!(memorization_rate(&[0.6, 0.4, 0.7, 0.1], 0.5).unwrap(), 50.0);
        assert_eq!(memorization_rate(&[0.0; 4], 0.5).unwrap(), 0.0);
        assert_eq!(memorization_rate(&[0.5], 0.5).unwrap(), 0.0);
        assert!(memorization_rate(&[], 0.5).is_err());
    }

    fn small_graph() -> Graph {
        let n = 40;
        let mut rng = crate::seed::rng(3);
        let x = Array2::from_shape_fn((n, 4), |(i, j)| {
            use rand::Rng;
            let centre = if j == i % 2 { 1.0 } else { 0.0 };
            centre + 0.8 * rng.random_range(-1.0..1.0)
        });
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let edges: Vec<_> = (0..n).flat_map(|i| [(i, (i + 2) % n), (i, (i + 5) % n)]).collect();
        Graph::new(x, labels, 2, edges).unwrap()
    }

    #[test]
    fn identical_sides_score_zero() {
        let g = small_graph();
        let ctx = GraphTensors::<f32>::new(&g);
        let cfg = ModelConfig::new(Backbone::Gcn, 4, 8, 2);
        let run = train(&ctx, &[0, 1, 2, 3], &[4, 5], &cfg, &Hyper::default(), 1).unwrap();
        let nodes: Vec<usize> = (0..40).collect();
        let s = &run.final_state;
        let scores =
            memorization_scores(&[s], &[s], &ctx, &nodes, ConfidenceMode::TrueClassProbability)
                .unwrap();
        assert!(scores.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn degenerate_partition_gives_zero_shared_scores() {
        let g = small_graph();
        let p = partition(&(0..20).collect::<Vec<_>>(), &[], &[]);
        let mut p = p;
        p.val = (20..30).collect();
        p.test = (30..40).collect();
        p.extra = p.test.clone();
        let cfg = ModelConfig::new(Backbone::Gcn, 4, 8, 2);
        let mem = MemConfig {
            num_seeds: 1,
            ..MemConfig::default()
        };
        // no candidate nodes, so the overall rate is undefined
        assert!(run_ncmemo::<f32>(&g, &p, &cfg, &Hyper::default(), &mem, 5).is_err());
        let mut p2 = p.clone();
        p2.candidate = vec![20];
        p2.independent = vec![20];
        p2.val = (21..30).collect();
        let out = run_ncmemo::<f32>(&g, &p2, &cfg, &Hyper::default(), &mem, 5).unwrap();
        assert!(out.report.category(Category::Shared).scores.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn paired_run_reports_every_category() {
        let g = small_graph();
        let p = make_partition(
            40,
            SplitFractions::TRAIN_VAL_TEST,
            SplitFractions::SHARED_CANDIDATE_INDEPENDENT,
            7,
        )
        .unwrap();
        let cfg = ModelConfig::new(Backbone::Sage, 4, 8, 2);
        let hyper = Hyper {
            epochs: 20,
            snapshot_interval: 5,
            ..Hyper::default()
        };
        let mem = MemConfig {
            num_seeds: 2,
            ..MemConfig::default()
        };
        let out = run_ncmemo::<f32>(&g, &p, &cfg, &hyper, &mem, 11).unwrap();
        let r = &out.report;
        assert_eq!(r.categories.len(), 4);
        for c in &r.categories {
            assert!(c.scores.iter().all(|s| (-1.0..=1.0).contains(s)));
            assert_eq!(c.scores.len(), c.nodes.len());
        }
        let epochs: Vec<_> = r.per_epoch.iter().map(|e| e.epoch).collect();
        assert_eq!(epochs, vec![0, 5, 10, 15, 20]);
        assert_eq!(r.per_epoch.last().unwrap().rate, r.rate);
        assert_eq!(r.per_epoch[0].rate, 0.0);
        assert_eq!(out.per_seed_candidate_scores.len(), 2);
        assert_eq!(r.meta.seeds_f, r.meta.seeds_g);
        let tests = category_ttests(r).unwrap();
        assert_eq!(tests.len(), 4);
        let again = run_ncmemo::<f32>(&g, &p, &cfg, &hyper, &mem, 11).unwrap();
        assert_eq!(again.report, out.report);
    }

    #[test]
    fn identical_distributions_test_at_half() {
        let scores = vec![0.1, 0.2, 0.3, 0.4];
        let cat = |c| CategoryScores {
            category: c,
            nodes: vec![0, 1, 2, 3],
            scores: scores.clone(),
            summary: Summary::of(&scores),
            rate: Some(0.0),
        };
        let report = MemReport {
            tau: 0.5,
            rate: 0.0,
            categories: Category::ALL.iter().map(|&c| cat(c)).collect(),
            per_epoch: vec![],
            test_accuracy: Some(1.0),
            meta: MemMeta {
                model: ModelConfig::new(Backbone::Gcn, 1, 1, 2),
                hyper: Hyper::default(),
                mem: MemConfig::default(),
                seeds_f: vec![],
                seeds_g: vec![],
            },
        };
        for t in category_ttests(&report).unwrap() {
            assert_abs_diff_eq!(t.welch.p_value, 0.5, epsilon = 1e-12);
            assert_eq!(t.effect_size.value, 0.0);
        }
    }

    proptest! {
        #[test]
        fn scores_bounded_and_antisymmetric(
            f in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 5), 1..4),
            g in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 5), 1..4),
        ) {
            let fg = scores_from_confidences(&f, &g).unwrap();
            let gf = scores_from_confidences(&g, &f).unwrap();
            for (a, b) in fg.iter().zip(&gf) {
                prop_assert!((-1.0..=1.0).contains(a));
                prop_assert_eq!(*a, -*b);
            }
        }

        #[test]
        fn rate_non_increasing_in_tau(
            s in prop::collection::vec(-1.0f64..=1.0, 1..30),
            t1 in 0.01f64..0.99,
            t2 in 0.01f64..0.99,
        ) {
            let (lo, hi) = (t1.min(t2), t1.max(t2));
            prop_assert!(memorization_rate(&s, lo).unwrap() >= memorization_rate(&s, hi).unwrap());
        }
    }
}
