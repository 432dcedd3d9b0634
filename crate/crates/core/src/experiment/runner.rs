use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{resolve, Benchmark, CandidateSpec, ExperimentConfig, Partition, ProjectSpec};
use crate::bo::{run_strategy, BitEncoding, GboConfig, RunRecord, SearchProblem, Strategy, StrategyOptions};
use crate::error::{GboError, Result};
use crate::features::{FeatureExtractor, FeatureGroups};
use crate::graph::{read_graphs, synth_dataset, CandidateSet};
use crate::hyperopt::{nelder_mead_max, NelderMeadOptions};
use crate::kernels::{cache, GraphKernelBank, GraphKernelConfig, KernelVariant};
use crate::objectives::{hartmann4, hartmann_values, robustness, HARTMANN_A, HARTMANN_ALPHA, HARTMANN_FEATURES, HARTMANN_P};
use crate::rng;
use crate::traffic::design::{parse_projects, DesignInstance};
use crate::traffic::read_tntp;

/// Candidate set, objective table, features and kernels of one experiment.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub candidates: CandidateSet,
    pub objective: Vec<f64>,
    pub optimum: f64,
    pub features: Arc<FeatureGroups>,
    pub bank: Option<Arc<GraphKernelBank>>,
    pub base_bank: Option<Arc<GraphKernelBank>>,
    pub encoding: Option<BitEncoding>,
    /// Candidates dropped before the search, with the reason.
    pub excluded: Vec<(String, String)>,
    pub metadata: Value,
}

impl Prepared {
    pub fn ids(&self) -> &[String] {
        self.candidates.ids()
    }

    pub fn optimum_ids(&self) -> Vec<String> {
        let tol = 1e-12 * self.optimum.abs().max(1.0);
        self.objective
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= self.optimum - tol)
            .map(|(i, _)| self.candidates.id(i).to_string())
            .collect()
    }
}

/// Builds candidates, evaluates the objective on all of them (the
/// benchmarks are cheap enough to tabulate, which also yields the true
/// optimum), extracts features and trains the kernels the strategies need.
pub fn prepare(config: &ExperimentConfig, base_dir: &Path) -> Result<Prepared> {
    config.validate()?;
    let mut metadata = serde_json::Map::new();
    let mut excluded = Vec::new();
    let mut encoding = None;
    let mut partition = None;

    let (candidates, objective) = match &config.benchmark {
        Benchmark::Utndp { net, trips, projects, assignment } => {
            let network = read_tntp(&resolve(base_dir, net), Some(&resolve(base_dir, trips)))?;
            let instance = match projects {
                ProjectSpec::Random { count, seed } => DesignInstance::random(network, *count, *seed)?,
                ProjectSpec::File { file } => {
                    let path = resolve(base_dir, file);
                    let roads = parse_projects(&std::fs::read_to_string(&path)?, &path)?;
                    DesignInstance::new(network, &roads)?
                }
            };
            metadata.insert(
                "projects".into(),
                json!(instance.projects.iter().map(|p| [p.road.0 + 1, p.road.1 + 1]).collect::<Vec<_>>()),
            );
            let (all, enc) = instance.candidates()?;
            let table = instance.objective_table(assignment);
            let mut keep = Vec::new();
            let mut values = Vec::new();
            for (i, v) in table.into_iter().enumerate() {
                match v {
                    Ok(v) => {
                        keep.push(i);
                        values.push(v);
                    }
                    Err(e @ GboError::Infeasible { .. }) => excluded.push((all.id(i).to_string(), e.to_string())),
                    Err(e) => return Err(e),
                }
            }
            let codes = keep.iter().map(|&i| enc.code(i)).collect();
            encoding = Some(BitEncoding::new(enc.bits(), codes)?);
            if config.kernel.partition == Partition::Projects {
                partition = Some(instance.project_areas());
            }
            (all.select(&keep)?, values)
        }
        other => {
            let candidates = match config.candidate_spec.as_ref().unwrap() {
                CandidateSpec::Synthetic(spec) => synth_dataset(spec)?,
                CandidateSpec::File(path) => read_graphs(resolve(base_dir, path))?,
            };
            let values = match other {
                Benchmark::Hartmann => {
                    metadata.insert("hartmann".into(), hartmann_metadata(&candidates)?);
                    hartmann_values(&candidates)?
                }
                Benchmark::Robustness { removal, p, trials } => {
                    let trials = if *removal == crate::objectives::Removal::Targeted { 1 } else { *trials };
                    candidates
                        .graphs()
                        .par_iter()
                        .enumerate()
                        .map(|(i, g)| robustness(g, *removal, *p, trials, rng::derive_seed(config.feature_seed, i as u64)))
                        .collect::<Result<Vec<_>>>()?
                }
                Benchmark::Custom { objective_attr } => candidates
                    .iter()
                    .map(|(id, g)| {
                        g.attr(objective_attr)
                            .ok_or_else(|| GboError::Objective(format!("{id} has no attribute `{objective_attr}`")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                Benchmark::Utndp { .. } => unreachable!(),
            };
            if encoding.is_none() {
                encoding = BitEncoding::identity(candidates.len()).ok();
            }
            (candidates, values)
        }
    };
    if candidates.is_empty() {
        return Err(GboError::Config("no feasible candidates".into()));
    }
    if config.budget > candidates.len() {
        return Err(GboError::Config(format!("budget {} exceeds {} candidates", config.budget, candidates.len())));
    }
    if let Some(v) = objective.iter().find(|v| !v.is_finite()) {
        return Err(GboError::Objective(format!("non-finite objective value {v}")));
    }
    let optimum = objective.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let features = Arc::new(FeatureGroups::extract(&candidates, &config.feature_groups, config.feature_seed)?);
    let mut bank = None;
    let mut base_bank = None;
    for variant in config.variants() {
        let kc = GraphKernelConfig {
            k: config.kernel.k,
            samples: config.kernel.samples,
            samples_per_node: config.kernel.samples_per_node,
            grid: config.kernel.grid.clone(),
            variant,
            seed: config.kernel.seed,
        };
        let cache_path = config.kernel.cache_path.as_ref().map(|p| resolve(base_dir, p));
        let built = match (&cache_path, variant) {
            (Some(path), KernelVariant::Deep) if path.exists() => cache::read_kernel_cache(path, candidates.ids())?,
            _ => {
                let b = GraphKernelBank::build(&candidates, &kc, partition.as_deref())?;
                if let (Some(path), KernelVariant::Deep) = (&cache_path, variant) {
                    cache::write_kernel_cache(path, &b, candidates.ids())?;
                }
                b
            }
        };
        match variant {
            KernelVariant::Deep => bank = Some(Arc::new(built)),
            KernelVariant::Base => base_bank = Some(Arc::new(built)),
        }
    }

    Ok(Prepared {
        candidates,
        objective,
        optimum,
        features,
        bank,
        base_bank,
        encoding,
        excluded,
        metadata: Value::Object(metadata),
    })
}

/// Constants, the oracle maximum over the unit cube, and the raw feature
/// ranges used for normalization.
fn hartmann_metadata(candidates: &CandidateSet) -> Result<Value> {
    let (x, value) = hartmann_global_max();
    let extractor = FeatureExtractor::new(&HARTMANN_FEATURES, 0)?;
    let raw = candidates
        .graphs()
        .iter()
        .enumerate()
        .map(|(i, g)| extractor.extract(g, i))
        .collect::<Result<Vec<_>>>()?;
    let ranges: serde_json::Map<String, Value> = HARTMANN_FEATURES
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let lo = raw.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
            let hi = raw.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
            (name.to_string(), json!([lo, hi]))
        })
        .collect();
    Ok(json!({
        "alpha": HARTMANN_ALPHA,
        "a": HARTMANN_A,
        "p": HARTMANN_P,
        "features": HARTMANN_FEATURES,
        "feature_ranges": ranges,
        "global_max": value,
        "global_argmax": x,
    }))
}

/// Maximum of the 4-D Hartmann function on the unit cube by multi-start
/// simplex search.
pub fn hartmann_global_max() -> (Vec<f64>, f64) {
    let f = |x: &[f64]| {
        if x.iter().all(|v| (0.0..=1.0).contains(v)) {
            hartmann4(x).unwrap()
        } else {
            f64::NEG_INFINITY
        }
    };
    let opts = NelderMeadOptions { max_evals: 2000, initial_step: 0.1, xatol: 1e-10, fatol: 1e-14 };
    let mut best = (vec![0.0; 4], f64::NEG_INFINITY);
    for s in 0..81usize {
        let start: Vec<f64> = (0..4).map(|j| [0.2, 0.5, 0.8][(s / 3usize.pow(j as u32)) % 3]).collect();
        let r = nelder_mead_max(f, &start, &opts);
        if r.value > best.1 {
            best = (r.x, r.value);
        }
    }
    best
}

pub fn strategy_options(config: &ExperimentConfig, prepared: &Prepared) -> StrategyOptions {
    StrategyOptions {
        target: config.stop_at_optimum.then_some(prepared.optimum),
        gbo: GboConfig { n_init: config.n_init, refit_every: config.refit_every, hyperopt: config.hyperopt.clone() },
        ga: config.ga.clone(),
        sa: config.sa.clone(),
    }
}

/// Every `(strategy, seed)` run, strategy-major, in config order.
pub fn run_prepared(config: &ExperimentConfig, prepared: &Prepared, seeds: &[u64], jobs: Option<usize>) -> Result<Vec<RunRecord>> {
    let options = strategy_options(config, prepared);
    let table = &prepared.objective;
    let objective = |i: usize| -> Result<f64> { Ok(table[i]) };
    let problem = SearchProblem {
        ids: prepared.ids(),
        objective: &objective,
        features: prepared.features.clone(),
        bank: prepared.bank.clone(),
        base_bank: prepared.base_bank.clone(),
        encoding: prepared.encoding.as_ref(),
    };
    let tasks: Vec<(Strategy, u64)> =
        config.strategies.iter().flat_map(|&s| seeds.iter().map(move |&seed| (s, seed))).collect();
    let work = || {
        tasks
            .par_iter()
            .map(|&(s, seed)| {
                let t = Instant::now();
                let r = run_strategy(s, &problem, config.budget, &options, seed);
                log::info!("{s} seed {seed}: {:.1}s", t.elapsed().as_secs_f64());
                r
            })
            .collect::<Result<Vec<_>>>()
    };
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| GboError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub seeds: Vec<u64>,
    /// Censored at `budget + 1` when the optimum was not found.
    pub evaluations_to_optimum: Vec<usize>,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub found: usize,
    pub gamma: Vec<Option<f64>>,
    pub gamma_median: Option<f64>,
    pub aborted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub benchmark: Value,
    pub budget: usize,
    pub n_init: usize,
    pub candidates: usize,
    pub optimum: f64,
    pub optimum_ids: Vec<String>,
    pub strategies: Vec<StrategySummary>,
    pub excluded: Vec<(String, String)>,
    pub metadata: Value,
    pub wall_time_seconds: f64,
}

impl Summary {
    pub fn strategy(&self, name: &str) -> Option<&StrategySummary> {
        self.strategies.iter().find(|s| s.strategy == name)
    }
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

pub fn summarize(config: &ExperimentConfig, prepared: &Prepared, runs: &[RunRecord], wall: f64) -> Summary {
    let strategies = config
        .strategies
        .iter()
        .map(|s| {
            let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.strategy == s.name()).collect();
            let hits: Vec<usize> =
                mine.iter().map(|r| r.evaluations_to_optimum(prepared.optimum, config.budget)).collect();
            let hf: Vec<f64> = hits.iter().map(|&h| h as f64).collect();
            let gamma: Vec<Option<f64>> = mine.iter().map(|r| r.gamma()).collect();
            let g: Vec<f64> = gamma.iter().flatten().copied().filter(|v| v.is_finite()).collect();
            StrategySummary {
                strategy: s.name().to_string(),
                seeds: mine.iter().map(|r| r.seed).collect(),
                found: hits.iter().filter(|&&h| h <= config.budget).count(),
                median: median(&hf),
                q1: quantile(&hf, 0.25),
                q3: quantile(&hf, 0.75),
                evaluations_to_optimum: hits,
                gamma_median: (!g.is_empty()).then(|| median(&g)),
                gamma,
                aborted: mine.iter().filter(|r| r.aborted.is_some()).count(),
            }
        })
        .collect();
    Summary {
        name: config.name.clone(),
        benchmark: serde_json::to_value(&config.benchmark).unwrap_or(Value::Null),
        budget: config.budget,
        n_init: config.n_init,
        candidates: prepared.candidates.len(),
        optimum: prepared.optimum,
        optimum_ids: prepared.optimum_ids(),
        strategies,
        excluded: prepared.excluded.clone(),
        metadata: prepared.metadata.clone(),
        wall_time_seconds: wall,
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn run_bank<'a>(record: &RunRecord, prepared: &'a Prepared) -> Option<&'a GraphKernelBank> {
    match record.strategy.as_str() {
        "gbo_base" => prepared.base_bank.as_deref(),
        _ => prepared.bank.as_deref(),
    }
}

/// Per-evaluation CSV of one run.
pub fn run_csv(record: &RunRecord, prepared: &Prepared) -> String {
    let bank = run_bank(record, prepared);
    let groups = &prepared.features.groups;
    let mut out = String::from("iteration,candidate_id,y,best_so_far,w,d,alpha");
    for g in groups {
        write!(out, ",beta_{}", g.name).unwrap();
    }
    out.push_str(",sigma,gamma\n");
    for (i, s) in record.steps.iter().enumerate() {
        write!(out, "{},{},{},{}", i + 1, s.candidate_id, num(s.y), num(s.best_so_far)).unwrap();
        match &s.params {
            Some(p) => {
                let (w, d) = bank.map_or((0, 0), |b| b.grid()[p.grid_index]);
                write!(out, ",{w},{d},{}", num(p.alpha)).unwrap();
                for b in &p.betas {
                    write!(out, ",{}", num(*b)).unwrap();
                }
                writeln!(out, ",{},{}", num(p.sigma), num(p.gamma())).unwrap();
            }
            None => {
                out.push_str(&",".repeat(5 + groups.len()));
                out.push('\n');
            }
        }
    }
    out
}

/// One row per hyperparameter refit.
pub fn fits_csv(record: &RunRecord, prepared: &Prepared) -> String {
    let bank = run_bank(record, prepared);
    let groups = &prepared.features.groups;
    let mut out = String::from("observations,w,d,alpha");
    for g in groups {
        write!(out, ",beta_{}", g.name).unwrap();
    }
    out.push_str(",sigma,lml");
    for g in groups {
        for f in &g.feature_names {
            write!(out, ",l_{}_{}", g.name, f.replace(':', "_")).unwrap();
        }
    }
    out.push('\n');
    for fit in &record.fits {
        let p = &fit.params;
        let (w, d) = bank.map_or((0, 0), |b| b.grid()[p.grid_index]);
        write!(out, "{},{w},{d},{}", fit.observations, num(p.alpha)).unwrap();
        for b in &p.betas {
            write!(out, ",{}", num(*b)).unwrap();
        }
        write!(out, ",{},{}", num(p.sigma), num(fit.lml)).unwrap();
        for l in p.lengthscales.iter().flatten() {
            write!(out, ",{}", num(*l)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn run_file_stem(record: &RunRecord) -> String {
    format!("{}-s{}", record.strategy, record.seed)
}

/// Writes run CSVs, fit CSVs for model-based runs, and `summary.json`.
pub fn write_outputs(out_dir: &Path, runs: &[RunRecord], prepared: &Prepared, summary: &Summary) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    for r in runs {
        let stem = run_file_stem(r);
        std::fs::write(out_dir.join(format!("{stem}.csv")), run_csv(r, prepared))?;
        if !r.fits.is_empty() {
            std::fs::write(out_dir.join(format!("{stem}-fits.csv")), fits_csv(r, prepared))?;
        }
    }
    std::fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(summary)?)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub prepared: Prepared,
    pub runs: Vec<RunRecord>,
    pub summary: Summary,
}

/// Prepares, runs every strategy and seed, and writes outputs when
/// `out_dir` is given.
pub fn run_experiment(
    config: &ExperimentConfig,
    base_dir: &Path,
    out_dir: Option<&Path>,
    jobs: Option<usize>,
    seed_base: u64,
) -> Result<ExperimentResult> {
    let start = Instant::now();
    let prepared = prepare(config, base_dir)?;
    let seeds = config.seeds.resolve(seed_base);
    let runs = run_prepared(config, &prepared, &seeds, jobs)?;
    let summary = summarize(config, &prepared, &runs, start.elapsed().as_secs_f64());
    if let Some(dir) = out_dir {
        write_outputs(dir, &runs, &prepared, &summary)?;
    }
    Ok(ExperimentResult { prepared, runs, summary })
}
