//! Config-driven experiment commands. Every command writes its files
//! atomically under one output directory, plus a `manifest.json` listing
//! them; CSV output is a pure function of the config and seed.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ncmemo::graph::{edge_homophily, generate_syn_graph, load_graph, make_partition, save_graph, Graph, Partition};
use ncmemo::lds::{lds_comparison, lds_comparison_by_seed, lds_scores, LdsReport};
use ncmemo::lira::{run_mia, MiaReport};
use ncmemo::memo::{build_fg_masks, category_ttests, run_ncmemo, Category, MemOutcome};
use ncmemo::nn::{Hyper, Real};
use ncmemo::ntk::{mr_alignment_correlation, track_alignments, AlignmentSeries, NtkMode};
use ncmemo::rewire::{plan_rewire, rewire_row, select_row, RewireBaseline, RewireRow};
use ncmemo::seed;
use serde::Serialize;

pub use config::{ExperimentConfig, GraphSource, Module, NtkSubset};
use output::{num, OutDir, Table};

pub const SEED_ENV: &str = "NCMEMO_SEED";

/// Values every command needs beyond the config.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: u64,
    pub float64: bool,
}

impl RunOptions {
    /// Precedence: flag, then config, then `NCMEMO_SEED`, then 0. The output
    /// directory comes from the flag or the config.
    pub fn resolve(
        cfg: &ExperimentConfig,
        out: Option<PathBuf>,
        seed_flag: Option<u64>,
        float64_flag: bool,
        env_seed: Option<String>,
    ) -> Result<Self> {
        let env = match env_seed {
            Some(s) => Some(
                s.trim()
                    .parse::<u64>()
                    .with_context(|| format!("{SEED_ENV}={s} is not an unsigned integer"))?,
            ),
            None => None,
        };
        let out = out
            .or_else(|| cfg.output_dir.clone())
            .context("no output directory: pass --out or set output_dir")?;
        Ok(RunOptions {
            out,
            seed: seed_flag.or(cfg.seed).or(env).unwrap_or(0),
            float64: float64_flag || cfg.float64,
        })
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    precision: &'static str,
    config: &'a ExperimentConfig,
    files: &'a [String],
}

fn write_manifest(out: &mut OutDir, command: &str, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<()> {
    let files = out.written().to_vec();
    out.json(
        "manifest.json",
        &Manifest {
            tool: "ncmemo",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: opts.seed,
            precision: if opts.float64 { "f64" } else { "f32" },
            config: cfg,
            files: &files,
        },
    )
}

pub fn load_source(cfg: &ExperimentConfig) -> Result<Graph> {
    match &cfg.graph {
        GraphSource::Bundle(path) => {
            load_graph(path).with_context(|| format!("loading graph bundle {}", path.display()))
        }
        GraphSource::Syn(spec) => Ok(generate_syn_graph(spec)?),
    }
}

pub fn partition_for(cfg: &ExperimentConfig, g: &Graph, global: u64) -> Result<Partition> {
    let s = cfg
        .partition
        .seed
        .unwrap_or_else(|| seed::derive(global, "partition", 0));
    Ok(make_partition(g.num_nodes(), cfg.partition.split, cfg.partition.sub, s)?)
}

/// Writes the graph bundle to `<out>/graph`.
pub fn cmd_generate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<PathBuf> {
    let mut out = OutDir::create(&opts.out)?;
    let g = load_source(cfg)?;
    let dir = out.path("graph");
    save_graph(&g, &dir)?;
    out.note("graph");
    write_manifest(&mut out, "generate", cfg, opts)?;
    Ok(dir)
}

pub fn cmd_partition(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Partition> {
    let mut out = OutDir::create(&opts.out)?;
    let g = load_source(cfg)?;
    let p = partition_for(cfg, &g, opts.seed)?;
    out.json("partition.json", &p)?;
    write_manifest(&mut out, "partition", cfg, opts)?;
    Ok(p)
}

/// Headline numbers of one graph's run, as used by the sweep.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub edge_homophily: Option<f64>,
    pub memorization_rate: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub final_kernel_target: Option<f64>,
    pub final_kernel_graph: Option<f64>,
    pub lds_mem_mean: Option<f64>,
    pub lds_nonmem_mean: Option<f64>,
    pub lds_p_value: Option<f64>,
    pub mia_auc: Option<f64>,
    pub selected_rewire: Option<RewireRow>,
}

fn hyper_for(cfg: &ExperimentConfig) -> Hyper {
    let mut h = cfg.hyper;
    if h.snapshot_interval == 0 && (cfg.wants(Module::Ntk) || cfg.wants(Module::Memscore)) {
        h.snapshot_interval = cfg.ntk.snapshot_interval;
    }
    h
}

fn mem_outputs<T: Real>(out: &mut OutDir, prefix: &str, outcome: &MemOutcome<T>) -> Result<()> {
    let r = &outcome.report;
    out.json(&format!("{prefix}mem_report.json"), r)?;
    let mut scores = Table::new(&["node", "category", "score", "memorized"]);
    for c in Category::ALL {
        let cs = r.category(c);
        for (&v, &s) in cs.nodes.iter().zip(&cs.scores) {
            scores.row(vec![v.to_string(), c.name().into(), num(s), (s > r.tau).to_string()]);
        }
    }
    out.csv(&format!("{prefix}mem_scores.csv"), &scores)?;
    let mut epochs = Table::new(&["epoch", "rate"]);
    for e in &r.per_epoch {
        epochs.row(vec![e.epoch.to_string(), num(e.rate)]);
    }
    out.csv(&format!("{prefix}mr_per_epoch.csv"), &epochs)?;
    match category_ttests(r) {
        Ok(tests) => out.json(&format!("{prefix}category_ttests.json"), &tests)?,
        Err(e) => log::warn!("category t-tests skipped: {e}"),
    }
    Ok(())
}

fn ntk_outputs<T: Real>(
    out: &mut OutDir,
    prefix: &str,
    cfg: &ExperimentConfig,
    g: &Graph,
    p: &Partition,
    outcome: &MemOutcome<T>,
    global: u64,
) -> Result<AlignmentSeries> {
    let subset: Vec<usize> = match cfg.ntk.subset {
        NtkSubset::FTrain => build_fg_masks(p).0,
        NtkSubset::All => (0..g.num_nodes()).collect(),
    };
    let mode = match NtkMode::for_subset(subset.len()) {
        NtkMode::Sketch { dim, .. } => NtkMode::Sketch {
            dim,
            seed: seed::derive(global, "ntk_sketch", 0),
        },
        m => m,
    };
    let series = track_alignments(
        &outcome.runs_f[cfg.ntk.track_seed],
        g,
        &subset,
        cfg.ntk.adjacency_mode,
        mode,
    )?;
    let mut t = Table::new(&["epoch", "kernel_graph", "kernel_target"]);
    for i in 0..series.epochs.len() {
        t.row(vec![
            series.epochs[i].to_string(),
            num(series.kernel_graph[i]),
            num(series.kernel_target[i]),
        ]);
    }
    out.csv(&format!("{prefix}alignments.csv"), &t)?;
    #[derive(Serialize)]
    struct Light<'a> {
        epochs: &'a [usize],
        kernel_graph: &'a [f64],
        kernel_target: &'a [f64],
        graph_target: f64,
        adjacency_mode: ncmemo::graph::AdjacencyMode,
        ntk_mode: NtkMode,
        subset_size: usize,
    }
    out.json(
        &format!("{prefix}alignment.json"),
        &Light {
            epochs: &series.epochs,
            kernel_graph: &series.kernel_graph,
            kernel_target: &series.kernel_target,
            graph_target: series.graph_target,
            adjacency_mode: series.adjacency_mode,
            ntk_mode: series.ntk_mode,
            subset_size: series.subset.len(),
        },
    )?;
    Ok(series)
}

#[derive(Serialize)]
pub struct LdsReports {
    pub node_level: LdsReport,
    pub seed_level: LdsReport,
}

fn lds_outputs<T: Real>(
    out: &mut OutDir,
    prefix: &str,
    cfg: &ExperimentConfig,
    g: &Graph,
    p: &Partition,
    outcome: &MemOutcome<T>,
) -> Result<LdsReports> {
    let k = cfg.lds.k;
    let tau = outcome.report.tau;
    let lds = lds_scores(g, &p.train(), &p.candidate, k)?;
    let cand = outcome.report.category(Category::Candidate);
    let flags: Vec<bool> = cand.scores.iter().map(|&s| s > tau).collect();
    let per_seed: Vec<Vec<bool>> = outcome
        .per_seed_candidate_scores
        .iter()
        .map(|s| s.iter().map(|&x| x > tau).collect())
        .collect();
    let reports = LdsReports {
        node_level: lds_comparison(&p.candidate, &lds, &flags, k)?,
        seed_level: lds_comparison_by_seed(&p.candidate, &lds, &per_seed, &flags, k)?,
    };
    let mut t = Table::new(&["node", "lds", "mem_score", "memorized"]);
    for ((&v, &l), &s) in p.candidate.iter().zip(&lds).zip(&cand.scores) {
        t.row(vec![v.to_string(), num(l), num(s), (s > tau).to_string()]);
    }
    out.csv(&format!("{prefix}lds_scores.csv"), &t)?;
    out.json(&format!("{prefix}lds_report.json"), &reports)?;
    Ok(reports)
}

fn mia_outputs(out: &mut OutDir, prefix: &str, r: &MiaReport) -> Result<()> {
    out.json(&format!("{prefix}mia_report.json"), r)?;
    let mut roc = Table::new(&["fpr", "tpr"]);
    for pt in &r.roc {
        roc.row(vec![num(pt.fpr), num(pt.tpr)]);
    }
    out.csv(&format!("{prefix}roc.csv"), &roc)?;
    let mut s = Table::new(&["node", "member", "lira_score"]);
    for n in &r.per_node_scores {
        s.row(vec![n.node.to_string(), n.member.to_string(), num(n.score)]);
    }
    out.csv(&format!("{prefix}lira_scores.csv"), &s)
}

fn mia_seed(global: u64) -> u64 {
    seed::derive(global, "mia", 0)
}

#[allow(clippy::too_many_arguments)]
fn rewire_outputs<T: Real>(
    out: &mut OutDir,
    prefix: &str,
    cfg: &ExperimentConfig,
    g: &Graph,
    p: &Partition,
    outcome: &MemOutcome<T>,
    baseline_auc: Option<f64>,
    global: u64,
) -> Result<Vec<RewireRow>> {
    let model = cfg.model.resolve(g.feature_dim(), g.num_categories());
    let hyper = hyper_for(cfg);
    let baseline = RewireBaseline::of(g, outcome)?;
    let with_mia = cfg.rewire.with_mia;
    let auc_before = match (with_mia, baseline_auc) {
        (false, _) => None,
        (true, Some(a)) => Some(a),
        (true, None) => Some(run_mia(g, p, outcome, &model, &hyper, &cfg.mia, mia_seed(global))?.auc),
    };
    let mut rows = Vec::new();
    let mut aucs = Vec::new();
    for &mode in &cfg.rewire.modes {
        for &budget in &cfg.rewire.budgets {
            let plan = plan_rewire(g, mode, budget);
            let (row, rewired, after) =
                rewire_row::<T>(g, p, &plan, &baseline, &model, &hyper, &cfg.mem, global)?;
            log::info!(
                "rewire {} {budget}: mr {:.2} -> {:.2}",
                mode.name(),
                row.mr_before,
                row.mr_after
            );
            if cfg.rewire.save_graphs {
                let name = format!("{prefix}graph_rw_{}{budget}", mode.name());
                save_graph(&rewired, out.path(&name))?;
                out.note(&name);
            }
            let auc_after = match (&after, auc_before) {
                (Some(o), Some(_)) => Some(run_mia(&rewired, p, o, &model, &hyper, &cfg.mia, mia_seed(global))?.auc),
                (None, before) => before,
                (Some(_), None) => None,
            };
            aucs.push(auc_after);
            rows.push(row);
        }
    }
    select_row(&mut rows);
    let mut header = vec![
        "mode",
        "budget",
        "added",
        "deleted",
        "truncated",
        "homophily_before",
        "homophily_after",
        "test_acc_before",
        "test_acc_after",
        "mr_before",
        "mr_after",
    ];
    if with_mia {
        header.extend(["auc_before", "auc_after"]);
    }
    header.push("selected");
    let mut t = Table::new(&header);
    for (r, auc) in rows.iter().zip(&aucs) {
        let mut cells = vec![
            r.mode.name().to_string(),
            r.budget.to_string(),
            r.added.to_string(),
            r.deleted.to_string(),
            r.truncated.to_string(),
            num(r.homophily_before),
            num(r.homophily_after),
            num(r.test_acc_before),
            num(r.test_acc_after),
            num(r.mr_before),
            num(r.mr_after),
        ];
        if with_mia {
            cells.push(auc_before.map(num).unwrap_or_default());
            cells.push(auc.map(num).unwrap_or_default());
        }
        cells.push(r.selected.to_string());
        t.row(cells);
    }
    out.csv(&format!("{prefix}rewire_sweep.csv"), &t)?;
    Ok(rows)
}

/// Runs the configured modules on one graph, writing files under `prefix`.
fn run_modules<T: Real>(
    out: &mut OutDir,
    prefix: &str,
    cfg: &ExperimentConfig,
    g: &Graph,
    global: u64,
    force_memscore: bool,
) -> Result<RunSummary> {
    let mut summary = RunSummary {
        edge_homophily: edge_homophily(g).ok(),
        ..RunSummary::default()
    };
    if cfg.modules.is_empty() && !force_memscore {
        return Ok(summary);
    }
    let p = partition_for(cfg, g, global)?;
    out.json(&format!("{prefix}partition.json"), &p)?;
    let model = cfg.model.resolve(g.feature_dim(), g.num_categories());
    let hyper = hyper_for(cfg);
    let outcome = run_ncmemo::<T>(g, &p, &model, &hyper, &cfg.mem, global)?;
    summary.memorization_rate = Some(outcome.report.rate);
    summary.test_accuracy = outcome.report.test_accuracy;
    if cfg.wants(Module::Memscore) || force_memscore {
        mem_outputs(out, prefix, &outcome)?;
    }
    if cfg.wants(Module::Ntk) {
        let s = ntk_outputs(out, prefix, cfg, g, &p, &outcome, global)?;
        summary.final_kernel_target = Some(s.final_kernel_target());
        summary.final_kernel_graph = Some(s.final_kernel_graph());
    }
    if cfg.wants(Module::Lds) {
        let r = lds_outputs(out, prefix, cfg, g, &p, &outcome)?;
        summary.lds_mem_mean = r.seed_level.mem_mean;
        summary.lds_nonmem_mean = r.seed_level.nonmem_mean;
        summary.lds_p_value = r.seed_level.welch.map(|w| w.p_value);
    }
    if cfg.wants(Module::Mia) {
        let r = run_mia(g, &p, &outcome, &model, &hyper, &cfg.mia, mia_seed(global))?;
        mia_outputs(out, prefix, &r)?;
        summary.mia_auc = Some(r.auc);
    }
    if cfg.wants(Module::Rewire) {
        let rows = rewire_outputs(out, prefix, cfg, g, &p, &outcome, summary.mia_auc, global)?;
        summary.selected_rewire = rows.into_iter().find(|r| r.selected);
    }
    out.json(&format!("{prefix}run_summary.json"), &summary)?;
    Ok(summary)
}

fn dispatch(
    out: &mut OutDir,
    prefix: &str,
    cfg: &ExperimentConfig,
    g: &Graph,
    opts: &RunOptions,
    force_memscore: bool,
) -> Result<RunSummary> {
    if opts.float64 {
        run_modules::<f64>(out, prefix, cfg, g, opts.seed, force_memscore)
    } else {
        run_modules::<f32>(out, prefix, cfg, g, opts.seed, force_memscore)
    }
}

pub fn cmd_run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    let mut out = OutDir::create(&opts.out)?;
    let g = load_source(cfg)?;
    let s = dispatch(&mut out, "", cfg, &g, opts, false)?;
    write_manifest(&mut out, "run", cfg, opts)?;
    Ok(s)
}

/// `cmd_run` restricted to one module.
fn single_module(cfg: &ExperimentConfig, opts: &RunOptions, m: Module, name: &str) -> Result<RunSummary> {
    let mut cfg = cfg.clone();
    cfg.modules = vec![m];
    let mut out = OutDir::create(&opts.out)?;
    let g = load_source(&cfg)?;
    let s = dispatch(&mut out, "", &cfg, &g, opts, false)?;
    write_manifest(&mut out, name, &cfg, opts)?;
    Ok(s)
}

pub fn cmd_rewire_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    single_module(cfg, opts, Module::Rewire, "rewire-sweep")
}

pub fn cmd_mia(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    single_module(cfg, opts, Module::Mia, "mia")
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub h: f64,
    pub dir: String,
    #[serde(flatten)]
    pub summary: RunSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub points: Vec<SweepPoint>,
    pub r_target: Option<f64>,
    pub r_graph: Option<f64>,
}

fn h_label(h: f64) -> String {
    format!("h_{}", num(h))
}

/// Regenerates the synthetic graph at every homophily level and runs the
/// configured modules (memorization always) on each.
pub fn cmd_sweep_homophily(cfg: &ExperimentConfig, h_list: &[f64], opts: &RunOptions) -> Result<SweepSummary> {
    let GraphSource::Syn(base) = &cfg.graph else {
        bail!("sweep-homophily needs a synthetic graph source");
    };
    if base.compatibility.is_some() {
        bail!("sweep-homophily derives compatibility from h; remove graph.syn.compatibility");
    }
    if h_list.is_empty() {
        bail!("empty homophily list");
    }
    let mut out = OutDir::create(&opts.out)?;
    let mut points = Vec::new();
    for &h in h_list {
        let mut spec = base.clone();
        spec.target_homophily = h;
        let g = generate_syn_graph(&spec)?;
        let dir = h_label(h);
        log::info!("sweep point {dir}");
        let summary = dispatch(&mut out, &format!("{dir}/"), cfg, &g, opts, true)?;
        points.push(SweepPoint { h, dir, summary });
    }
    let mut t = Table::new(&[
        "h",
        "edge_homophily",
        "memorization_rate",
        "test_accuracy",
        "final_kernel_target",
        "final_kernel_graph",
    ]);
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    for pt in &points {
        let s = &pt.summary;
        t.row(vec![
            num(pt.h),
            opt(s.edge_homophily),
            opt(s.memorization_rate),
            opt(s.test_accuracy),
            opt(s.final_kernel_target),
            opt(s.final_kernel_graph),
        ]);
    }
    out.csv("mr_vs_h.csv", &t)?;
    let triples: Option<Vec<(f64, f64, f64)>> = points
        .iter()
        .map(|pt| {
            let s = &pt.summary;
            Some((s.memorization_rate?, s.final_kernel_target?, s.final_kernel_graph?))
        })
        .collect();
    let corr = triples.and_then(|t| mr_alignment_correlation(&t).ok());
    let summary = SweepSummary {
        points,
        r_target: corr.map(|c| c.r_target),
        r_graph: corr.map(|c| c.r_graph),
    };
    out.json("sweep_summary.json", &summary)?;
    write_manifest(&mut out, "sweep-homophily", cfg, opts)?;
    Ok(summary)
}

const PLOT_FILES: [&str; 6] = [
    "mr_per_epoch.csv",
    "alignments.csv",
    "roc.csv",
    "mr_vs_h.csv",
    "rewire_sweep.csv",
    "lds_scores.csv",
];

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn collect(root: &Path, dir: &Path, runs: &mut BTreeMap<String, serde_json::Value>, plots: &mut Vec<String>) -> Result<()> {
    // graph bundles are data, not results
    if dir.join("meta.json").exists() && dir.join("edges.csv").exists() {
        return Ok(());
    }
    let rel = dir.strip_prefix(root).unwrap_or(dir).to_string_lossy().replace('\\', "/");
    let key = if rel.is_empty() { ".".to_string() } else { rel.clone() };
    let mut entry = serde_json::Map::new();
    let pick = |v: &serde_json::Value, ptr: &str| v.pointer(ptr).cloned().unwrap_or(serde_json::Value::Null);
    if dir.join("mem_report.json").exists() {
        let v = read_json(&dir.join("mem_report.json"))?;
        entry.insert("memorization_rate".into(), pick(&v, "/rate"));
        entry.insert("test_accuracy".into(), pick(&v, "/test_accuracy"));
    }
    if dir.join("alignment.json").exists() {
        let v = read_json(&dir.join("alignment.json"))?;
        for (k, ptr) in [("kernel_graph", "/kernel_graph"), ("kernel_target", "/kernel_target")] {
            let series = pick(&v, ptr);
            let arr = series.as_array().cloned().unwrap_or_default();
            entry.insert(format!("{k}_initial"), arr.first().cloned().unwrap_or_default());
            entry.insert(format!("{k}_final"), arr.last().cloned().unwrap_or_default());
        }
    }
    if dir.join("lds_report.json").exists() {
        let v = read_json(&dir.join("lds_report.json"))?;
        entry.insert("lds_mem_mean".into(), pick(&v, "/seed_level/mem_mean"));
        entry.insert("lds_nonmem_mean".into(), pick(&v, "/seed_level/nonmem_mean"));
        entry.insert("lds_p_value".into(), pick(&v, "/seed_level/welch/p_value"));
    }
    if dir.join("mia_report.json").exists() {
        let v = read_json(&dir.join("mia_report.json"))?;
        entry.insert("mia_auc".into(), pick(&v, "/auc"));
        entry.insert("mia_tpr_at_fpr".into(), pick(&v, "/tpr_at_fpr"));
    }
    if dir.join("sweep_summary.json").exists() {
        let v = read_json(&dir.join("sweep_summary.json"))?;
        entry.insert("r_target".into(), pick(&v, "/r_target"));
        entry.insert("r_graph".into(), pick(&v, "/r_graph"));
    }
    for f in PLOT_FILES {
        if dir.join(f).exists() {
            plots.push(if rel.is_empty() { f.to_string() } else { format!("{rel}/{f}") });
        }
    }
    if !entry.is_empty() {
        runs.insert(key, serde_json::Value::Object(entry));
    }
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    for d in subdirs {
        collect(root, &d, runs, plots)?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct Report {
    pub runs: BTreeMap<String, serde_json::Value>,
    pub plot_data: Vec<String>,
}

/// Consolidates the results found under `dir` into `summary.json`.
pub fn cmd_report(dir: &Path) -> Result<Report> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    let mut runs = BTreeMap::new();
    let mut plot_data = Vec::new();
    collect(dir, dir, &mut runs, &mut plot_data)?;
    let report = Report { runs, plot_data };
    let mut out = OutDir::create(dir)?;
    out.json("summary.json", &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"graph": {"syn": {"num_nodes": 80, "num_categories": 3,
            "edges_per_new_node": 2, "target_homophily": 0.2,
            "features": {"kind": "gaussian", "dim": 6, "mean_separation": 1.0, "std": 1.0},
            "seed": 4}}, "hyper": {"epochs": 4}, "mem": {"num_seeds": 2}}"#,
        )
        .unwrap()
    }

    #[test]
    fn seed_precedence() {
        let mut c = cfg();
        let o = |c: &ExperimentConfig, flag, env: Option<&str>| {
            RunOptions::resolve(c, Some("x".into()), flag, false, env.map(String::from)).unwrap().seed
        };
        assert_eq!(o(&c, None, None), 0);
        assert_eq!(o(&c, None, Some("9")), 9);
        c.seed = Some(5);
        assert_eq!(o(&c, None, Some("9")), 5);
        assert_eq!(o(&c, Some(2), Some("9")), 2);
        assert!(RunOptions::resolve(&c, Some("x".into()), None, false, Some("abc".into())).is_err());
        assert!(RunOptions::resolve(&c, None, None, false, None).is_err());
    }

    #[test]
    fn h_labels_are_stable() {
        assert_eq!(h_label(0.0), "h_0");
        assert_eq!(h_label(0.3), "h_0.3");
        assert_eq!(h_label(1.0), "h_1");
    }

    #[test]
    fn empty_modules_write_only_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            out: dir.path().to_path_buf(),
            seed: 1,
            float64: false,
        };
        cmd_run(&cfg(), &opts).unwrap();
        let names: Vec<String> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["manifest.json"]);
    }
}
