use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bo::{GaConfig, SaConfig, Strategy};
use crate::error::{GboError, Result};
use crate::features::FeatureGroupSpec;
use crate::graph::SynthSpec;
use crate::hyperopt::HyperoptOptions;
use crate::kernels::graph_kernel::default_grid;
use crate::kernels::KernelVariant;
use crate::objectives::Removal;
use crate::traffic::FrankWolfeOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Benchmark {
    /// Negated Hartmann-4 of normalized node count, edge count, average
    /// degree centrality and average betweenness.
    Hartmann,
    Robustness {
        removal: Removal,
        p: f64,
        #[serde(default = "default_trials")]
        trials: usize,
    },
    /// Road network design on a TNTP network; candidates come from the
    /// projects, not from `candidate_spec`.
    Utndp {
        net: PathBuf,
        trips: PathBuf,
        projects: ProjectSpec,
        #[serde(default)]
        assignment: FrankWolfeOptions,
    },
    /// Objective read from a graph attribute of a candidate file.
    Custom {
        #[serde(default = "default_attr")]
        objective_attr: String,
    },
}

fn default_trials() -> usize {
    100
}
fn default_attr() -> String {
    "y".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProjectSpec {
    Random { count: usize, seed: u64 },
    File { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateSpec {
    Synthetic(SynthSpec),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    #[default]
    None,
    /// Sample graphlets per project area (network design only).
    Projects,
}

fn default_k() -> usize {
    4
}
fn default_samples() -> usize {
    500
}
fn default_per_node() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_per_node")]
    pub samples_per_node: usize,
    #[serde(default = "default_grid")]
    pub grid: Vec<(usize, usize)>,
    #[serde(default)]
    pub partition: Partition,
    #[serde(default)]
    pub seed: u64,
    /// Normalized deep-kernel values are read from here when the file
    /// exists and written to it otherwise.
    #[serde(default)]
    pub cache_path: Option<PathBuf>,
}

impl Default for KernelSection {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(usize),
    List(Vec<u64>),
}

impl Seeds {
    /// Concrete seeds, offset by `base`.
    pub fn resolve(&self, base: u64) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n as u64).map(|i| base + i).collect(),
            Seeds::List(list) => list.iter().map(|s| base + s).collect(),
        }
    }
}

fn default_n_init() -> usize {
    10
}
fn default_refit() -> usize {
    10
}
fn default_seeds() -> Seeds {
    Seeds::Count(10)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub benchmark: Benchmark,
    #[serde(default)]
    pub candidate_spec: Option<CandidateSpec>,
    pub feature_groups: Vec<FeatureGroupSpec>,
    /// Seed of the `random_unrelated` feature.
    #[serde(default)]
    pub feature_seed: u64,
    pub strategies: Vec<Strategy>,
    pub budget: usize,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    #[serde(default = "default_refit")]
    pub refit_every: usize,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub hyperopt: HyperoptOptions,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default)]
    pub sa: SaConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Seeds,
    /// End each run once it evaluates a best candidate. Evaluations to the
    /// optimum are unchanged; later steps are skipped.
    #[serde(default)]
    pub stop_at_optimum: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(GboError::Config(m));
        if self.strategies.is_empty() {
            return fail("no strategies".into());
        }
        if self.n_init < 2 {
            return fail(format!("n_init {} must be at least 2", self.n_init));
        }
        if self.budget < self.n_init {
            return fail(format!("budget {} is below n_init {}", self.budget, self.n_init));
        }
        if self.refit_every == 0 {
            return fail("refit_every must be at least 1".into());
        }
        let uses_model = self.strategies.iter().any(|s| s.needs_deep_kernel() || s.needs_base_kernel());
        if uses_model && self.feature_groups.is_empty() {
            return fail("model-based strategies need at least one feature group".into());
        }
        match (&self.benchmark, &self.candidate_spec) {
            (Benchmark::Utndp { .. }, Some(_)) => {
                return fail("utndp builds its own candidates; drop candidate_spec".into());
            }
            (Benchmark::Utndp { .. }, None) => {}
            (Benchmark::Custom { .. }, Some(CandidateSpec::Synthetic(_))) => {
                return fail("custom benchmark reads objectives from a candidate file".into());
            }
            (_, None) => return fail("candidate_spec is required".into()),
            _ => {}
        }
        if self.kernel.partition == Partition::Projects && !matches!(self.benchmark, Benchmark::Utndp { .. }) {
            return fail("project partitions exist only for utndp".into());
        }
        if let Benchmark::Robustness { p, trials, .. } = self.benchmark {
            if !(p > 0.0 && p < 1.0) || trials == 0 {
                return fail("robustness needs 0 < p < 1 and trials >= 1".into());
            }
        }
        if self.seeds.resolve(0).is_empty() {
            return fail("no seeds".into());
        }
        Ok(())
    }

    /// Kernel variant needed by each model-based strategy present.
    pub fn variants(&self) -> Vec<KernelVariant> {
        let mut v = Vec::new();
        if self.strategies.iter().any(|s| s.needs_deep_kernel()) {
            v.push(KernelVariant::Deep);
        }
        if self.strategies.iter().any(|s| s.needs_base_kernel()) {
            v.push(KernelVariant::Base);
        }
        v
    }
}

/// Resolves `path` against the directory holding the config file.
pub fn resolve(base_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HARTMANN: &str = r#"{
        "name": "h",
        "benchmark": {"kind": "hartmann"},
        "candidate_spec": {"synthetic": {"nodes": [20], "edge_probs": [0.1], "ba_edges": [1], "count_per_family": 5}},
        "feature_groups": [{"name": "topo", "features": ["node_count", "edge_count"]}],
        "strategies": ["gbo", "random"],
        "budget": 20,
        "kernel": {"samples": 100, "grid": [[2, 5]]},
        "seeds": 3
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(HARTMANN).unwrap();
        assert_eq!(c.n_init, 10);
        assert_eq!(c.refit_every, 10);
        assert_eq!(c.kernel.k, 4);
        assert_eq!(c.kernel.grid, vec![(2, 5)]);
        assert_eq!(c.hyperopt.restarts, 5);
        assert_eq!(c.seeds.resolve(100), vec![100, 101, 102]);
        assert_eq!(c.variants(), vec![KernelVariant::Deep]);
        assert_eq!(KernelSection::default().grid.len(), 25);
    }

    #[test]
    fn parses_other_benchmarks() {
        let r = HARTMANN.replace(r#"{"kind": "hartmann"}"#, r#"{"kind": "robustness", "removal": "targeted", "p": 0.8}"#);
        let c = ExperimentConfig::from_json(&r).unwrap();
        assert_eq!(c.benchmark, Benchmark::Robustness { removal: Removal::Targeted, p: 0.8, trials: 100 });

        let u = r#"{
            "benchmark": {"kind": "utndp", "net": "n.tntp", "trips": "t.tntp", "projects": {"count": 10, "seed": 4}},
            "feature_groups": [{"name": "topo", "features": ["edge_count"]}],
            "strategies": ["gbo", "ga"],
            "budget": 50,
            "kernel": {"partition": "projects"},
            "seeds": [1, 5]
        }"#;
        let c = ExperimentConfig::from_json(u).unwrap();
        match &c.benchmark {
            Benchmark::Utndp { projects, assignment, .. } => {
                assert_eq!(projects, &ProjectSpec::Random { count: 10, seed: 4 });
                assert_eq!(assignment.max_iter, 500);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.seeds.resolve(0), vec![1, 5]);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        for (from, to) in [
            (r#""budget": 20"#, r#""budget": 5"#),
            (r#""strategies": ["gbo", "random"]"#, r#""strategies": []"#),
            (r#""strategies": ["gbo", "random"]"#, r#""strategies": ["gpo"]"#),
            (r#""seeds": 3"#, r#""seeds": 0"#),
            (r#""seeds": 3"#, r#""seeds": 3, "bogus": 1"#),
            (r#""kernel": {"samples": 100"#, r#""kernel": {"partition": "projects", "samples": 100"#),
        ] {
            let text = HARTMANN.replace(from, to);
            assert!(ExperimentConfig::from_json(&text).is_err(), "{to}");
        }
    }
}
