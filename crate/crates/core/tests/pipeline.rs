use std::path::Path;
use std::process::Command;

use gbo_core::bo::{run_strategy, BitEncoding, SearchProblem, Strategy, StrategyOptions};
use gbo_core::experiment::report::{report, RunDir};
use gbo_core::experiment::{run_experiment, ExperimentConfig};
use gbo_core::features::FeatureGroups;
use gbo_core::graph::{synth_dataset, write_graphs, CandidateSet, SynthSpec};
use proptest::prelude::*;

fn small_spec() -> SynthSpec {
    SynthSpec { nodes: vec![12, 18, 24], edge_probs: vec![0.15, 0.3], ba_edges: vec![1, 2], count_per_family: 16, seed: 3 }
}

/// Candidate file whose graphs carry a `y` attribute peaking at one graph.
fn custom_candidates(dir: &Path) -> (CandidateSet, usize) {
    let base = synth_dataset(&small_spec()).unwrap();
    let best = 17;
    let graphs = base
        .graphs()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let y = -((g.edge_count() as f64 - base.graph(best).edge_count() as f64) / 10.0).powi(2) - 0.01 * (i as f64 - best as f64).abs();
            g.clone().with_attr("y", y)
        })
        .collect();
    let set = CandidateSet::new(base.ids().to_vec(), graphs).unwrap();
    write_graphs(&set, dir.join("graphs.txt")).unwrap();
    (set, best)
}

const CONFIG: &str = r#"{
    "name": "custom",
    "benchmark": {"kind": "custom"},
    "candidate_spec": {"file": "graphs.txt"},
    "feature_groups": [
        {"name": "size", "features": ["node_count", "edge_count"]},
        {"name": "shape", "features": ["avg_clustering"]}
    ],
    "strategies": ["gbo", "bo_g", "random", "ga"],
    "budget": 16,
    "n_init": 5,
    "refit_every": 5,
    "kernel": {"samples": 80, "grid": [[2, 5], [5, 2]]},
    "hyperopt": {"restarts": 2, "max_evals": 120},
    "seeds": [4, 9]
}"#;

#[test]
fn custom_benchmark_writes_consistent_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (set, best) = custom_candidates(dir.path());
    std::fs::write(dir.path().join("exp.json"), CONFIG).unwrap();
    let config = ExperimentConfig::read(&dir.path().join("exp.json")).unwrap();
    let out = dir.path().join("out");
    let result = run_experiment(&config, dir.path(), Some(&out), Some(1), 0).unwrap();

    assert_eq!(result.prepared.candidates.len(), set.len());
    assert_eq!(result.summary.optimum_ids, vec![set.id(best).to_string()]);
    assert_eq!(result.runs.len(), 8);

    let run = std::fs::read_to_string(out.join("gbo-s9.csv")).unwrap();
    let mut lines = run.lines();
    assert_eq!(lines.next().unwrap(), "iteration,candidate_id,y,best_so_far,w,d,alpha,beta_size,beta_shape,sigma,gamma");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 16);
    // initial design rows carry no model snapshot
    assert!(rows[..5].iter().all(|r| r[4..].iter().all(|c| c.is_empty())));
    assert!(rows[5..].iter().all(|r| r[4..].iter().all(|c| !c.is_empty())));
    let fits = std::fs::read_to_string(out.join("gbo-s9-fits.csv")).unwrap();
    assert!(fits.starts_with("observations,w,d,alpha,beta_size,beta_shape,sigma,lml,l_size_node_count,l_size_edge_count,l_shape_avg_clustering\n"));
    assert!(!out.join("random-s4-fits.csv").exists());

    // summary agrees with the per-run files
    for s in &result.summary.strategies {
        for (seed, hits) in s.seeds.iter().zip(&s.evaluations_to_optimum) {
            let text = std::fs::read_to_string(out.join(format!("{}-s{seed}.csv", s.strategy))).unwrap();
            let first = text.lines().skip(1).position(|l| l.split(',').nth(1) == Some(set.id(best)));
            assert_eq!(first.map_or(17, |i| i + 1), *hits);
        }
    }

    let loaded = RunDir::load(&out).unwrap();
    assert_eq!(loaded.runs["ga"].len(), 2);
    assert_eq!(loaded.curve("random").len(), 16);
    let text = report(&[loaded]);
    assert!(text.contains("# custom"));
    assert!(text.contains("1/l_size_edge_count"));
}

#[test]
fn missing_objective_attribute_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    custom_candidates(dir.path());
    let config = ExperimentConfig::from_json(&CONFIG.replace(r#""kind": "custom""#, r#""kind": "custom", "objective_attr": "z""#)).unwrap();
    let err = run_experiment(&config, dir.path(), None, Some(1), 0).unwrap_err();
    assert!(err.to_string().contains("attribute `z`"), "{err}");
}

#[test]
fn cli_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    custom_candidates(dir.path());
    let config = CONFIG.replace(r#""strategies": ["gbo", "bo_g", "random", "ga"]"#, r#""strategies": ["random", "sa"]"#);
    std::fs::write(dir.path().join("exp.json"), config).unwrap();
    let exe = env!("CARGO_BIN_EXE_gbo");
    let out = dir.path().join("res");
    let run = Command::new(exe)
        .args(["run", dir.path().join("exp.json").to_str().unwrap(), "--jobs", "2", "--seed-base", "100", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("median evals to optimum"));
    assert!(out.join("sa-s109.csv").exists());

    let rep = Command::new(exe).arg("report").arg(&out).output().unwrap();
    assert!(rep.status.success());
    assert!(String::from_utf8_lossy(&rep.stdout).contains("random"));

    let bad = Command::new(exe).args(["run", "/nonexistent.json"]).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error: reading /nonexistent.json"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Ending at the optimum never changes when the optimum was found.
    #[test]
    fn early_stop_preserves_hits(values in prop::collection::vec(-5.0f64..5.0, 32), seed in 0u64..1000, which in 0usize..3) {
        let ids: Vec<String> = (0..32).map(|i| format!("c{i}")).collect();
        let f = |i: usize| Ok(values[i]);
        let features = FeatureGroups::from_values(vec![("x".into(), (0..32).map(|i| vec![i as f64 / 31.0]).collect())]).unwrap();
        let encoding = BitEncoding::identity(32).unwrap();
        let problem = SearchProblem {
            ids: &ids,
            objective: &f,
            features: features.into(),
            bank: None,
            base_bank: None,
            encoding: Some(&encoding),
        };
        let strategy = [Strategy::Random, Strategy::Ga, Strategy::Sa][which];
        let optimum = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let full = run_strategy(strategy, &problem, 20, &StrategyOptions::default(), seed).unwrap();
        let options = StrategyOptions { target: Some(optimum), ..Default::default() };
        let short = run_strategy(strategy, &problem, 20, &options, seed).unwrap();
        let hits = full.evaluations_to_optimum(optimum, 20);
        prop_assert_eq!(short.evaluations_to_optimum(optimum, 20), hits);
        prop_assert_eq!(short.len(), hits.min(full.len()));
        prop_assert_eq!(&short.steps[..], &full.steps[..short.len()]);
    }
}
