use ncmemo::graph::{
    edge_homophily, generate_syn_graph, load_graph, make_partition, save_graph, FeatureSource, SplitFractions,
    SynSpec,
};
use ncmemo::lds::{lds_comparison, lds_scores, DEFAULT_K};
use ncmemo::memo::{memorization_rate, run_ncmemo, Category, MemConfig};
use ncmemo::nn::{Backbone, Hyper, ModelConfig};
use ncmemo::rewire::{apply_rewire, plan_rewire, RewireMode};
use ncmemo::{Graph, Partition};

fn small(h: f64) -> (Graph, Partition) {
    let spec = SynSpec {
        num_nodes: 120,
        num_categories: 3,
        edges_per_new_node: 2,
        target_homophily: h,
        compatibility: None,
        features: FeatureSource::Gaussian {
            dim: 12,
            mean_separation: 2.0,
            std: 1.0,
        },
        seed: 9,
    };
    let g = generate_syn_graph(&spec).unwrap();
    let p = make_partition(
        g.num_nodes(),
        SplitFractions::TRAIN_VAL_TEST,
        SplitFractions::SHARED_CANDIDATE_INDEPENDENT,
        4,
    )
    .unwrap();
    (g, p)
}

fn setup(g: &Graph) -> (ModelConfig, Hyper, MemConfig) {
    let model = ModelConfig::new(Backbone::Gcn, g.feature_dim(), 16, g.num_categories());
    let hyper = Hyper {
        epochs: 20,
        ..Hyper::default()
    };
    let mem = MemConfig {
        num_seeds: 2,
        ..MemConfig::default()
    };
    (model, hyper, mem)
}

#[test]
fn bundle_round_trip_reproduces_the_run() {
    let (g, p) = small(0.2);
    let dir = tempfile::tempdir().unwrap();
    save_graph(&g, dir.path()).unwrap();
    let loaded = load_graph(dir.path()).unwrap();
    assert_eq!(loaded.labels(), g.labels());
    assert_eq!(loaded.edges(), g.edges());

    let (model, hyper, mem) = setup(&g);
    let a = run_ncmemo::<f64>(&g, &p, &model, &hyper, &mem, 1).unwrap();
    let b = run_ncmemo::<f64>(&loaded, &p, &model, &hyper, &mem, 1).unwrap();
    assert_eq!(a.report, b.report);
}

#[test]
fn candidate_rate_matches_candidate_scores() {
    let (g, p) = small(0.0);
    let (model, hyper, mem) = setup(&g);
    let out = run_ncmemo::<f32>(&g, &p, &model, &hyper, &mem, 2).unwrap();
    let cand = out.report.category(Category::Candidate);
    assert_eq!(cand.nodes, p.candidate);
    let rate = memorization_rate(&cand.scores, out.report.tau).unwrap();
    assert_eq!(rate, out.report.rate);
    assert!((0.0..=100.0).contains(&rate));
    for s in out.report.categories.iter().flat_map(|c| &c.scores) {
        assert!((-1.0..=1.0).contains(s));
    }
    assert_eq!(out.runs_f.len(), 2);
    assert_eq!(out.per_seed_candidate_scores.len(), 2);
}

#[test]
fn lds_groups_partition_the_candidates() {
    let (g, p) = small(0.0);
    let (model, hyper, mem) = setup(&g);
    let out = run_ncmemo::<f32>(&g, &p, &model, &hyper, &mem, 3).unwrap();
    let cand = out.report.category(Category::Candidate);
    let lds = lds_scores(&g, &p.train(), &cand.nodes, DEFAULT_K).unwrap();
    let flags: Vec<bool> = cand.scores.iter().map(|&s| s > mem.tau).collect();
    let report = lds_comparison(&cand.nodes, &lds, &flags, DEFAULT_K).unwrap();
    assert_eq!(report.per_node.len(), cand.nodes.len());
    for v in &lds {
        let scaled = v * DEFAULT_K as f64;
        assert!((scaled - scaled.round()).abs() < 1e-12);
    }
}

#[test]
fn rewiring_by_feature_similarity_raises_homophily() {
    let (g, _) = small(0.0);
    let before = edge_homophily(&g).unwrap();
    let plan = plan_rewire(&g, RewireMode::Add, 60);
    let rewired = apply_rewire(&g, &plan).unwrap();
    assert_eq!(rewired.num_edges(), g.num_edges() + plan.additions.len());
    assert!(edge_homophily(&rewired).unwrap() > before);
    let plan = plan_rewire(&g, RewireMode::Delete, 10);
    let pruned = apply_rewire(&g, &plan).unwrap();
    assert_eq!(pruned.num_edges(), g.num_edges() - plan.deletions.len());
}
