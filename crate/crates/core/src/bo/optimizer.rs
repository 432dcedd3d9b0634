use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::acquisition::select_next;
use super::record::{FitTrace, RunRecord, Stop};
use crate::error::{GboError, Result};
use crate::features::FeatureGroups;
use crate::gp::GpModel;
use crate::graph::sample_distinct;
use crate::hyperopt::{fit_params, HyperoptOptions, Pins};
use crate::kernels::{CombinedKernel, GraphKernelBank, KernelParams};
use crate::rng;

fn default_n_init() -> usize {
    10
}
fn default_refit_every() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GboConfig {
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    /// Refit hyperparameters once this many evaluations arrived since the
    /// previous fit.
    #[serde(default = "default_refit_every")]
    pub refit_every: usize,
    #[serde(default)]
    pub hyperopt: HyperoptOptions,
}

impl Default for GboConfig {
    fn default() -> Self {
        GboConfig { n_init: default_n_init(), refit_every: default_refit_every(), hyperopt: HyperoptOptions::default() }
    }
}

/// The seeded initial sample shared by every strategy under `seed`.
pub fn initial_design(n_candidates: usize, n_init: usize, seed: u64) -> Result<Vec<usize>> {
    if n_init > n_candidates {
        return Err(GboError::param(format!("n_init {n_init} exceeds {n_candidates} candidates")));
    }
    let mut r = rng::derive_rng(seed, rng::label("initial-design"));
    Ok(sample_distinct(&mut r, n_candidates, n_init))
}

/// A suggested candidate and the hyperparameters that chose it.
#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion {
    pub index: usize,
    pub params: Option<KernelParams>,
}

/// Ask/tell form of the GP optimizer over a fixed candidate set.
#[derive(Debug, Clone)]
pub struct GboOptimizer {
    bank: Arc<GraphKernelBank>,
    features: Arc<FeatureGroups>,
    config: GboConfig,
    pins: Pins,
    seed: u64,
    init: Vec<usize>,
    observed: Vec<usize>,
    y: Vec<f64>,
    evaluated: Vec<bool>,
    params: Option<KernelParams>,
    fitted_at: usize,
    fits: Vec<FitTrace>,
}

impl GboOptimizer {
    pub fn new(
        bank: Arc<GraphKernelBank>,
        features: Arc<FeatureGroups>,
        config: GboConfig,
        pins: Pins,
        seed: u64,
    ) -> Result<Self> {
        CombinedKernel::new(&bank, &features)?;
        if config.n_init < 2 {
            return Err(GboError::param("n_init must be at least 2"));
        }
        if config.refit_every == 0 {
            return Err(GboError::param("refit_every must be at least 1"));
        }
        let n = bank.len();
        let init = initial_design(n, config.n_init, seed)?;
        Ok(GboOptimizer {
            bank,
            features,
            config,
            pins,
            seed,
            init,
            observed: Vec::new(),
            y: Vec::new(),
            evaluated: vec![false; n],
            params: None,
            fitted_at: 0,
            fits: Vec::new(),
        })
    }

    pub fn candidate_count(&self) -> usize {
        self.evaluated.len()
    }

    pub fn observations(&self) -> (&[usize], &[f64]) {
        (&self.observed, &self.y)
    }

    pub fn fits(&self) -> &[FitTrace] {
        &self.fits
    }

    pub fn params(&self) -> Option<&KernelParams> {
        self.params.as_ref()
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.observed
            .iter()
            .zip(&self.y)
            .fold(None, |acc: Option<(usize, f64)>, (&i, &v)| match acc {
                Some((_, b)) if b >= v => acc,
                _ => Some((i, v)),
            })
    }

    /// Next candidate: the unevaluated part of the initial design first,
    /// then the EI maximizer, refitting hyperparameters when due.
    pub fn ask(&mut self) -> Result<Suggestion> {
        if self.observed.len() < self.config.n_init {
            if let Some(&index) = self.init.iter().find(|&&i| !self.evaluated[i]) {
                return Ok(Suggestion { index, params: None });
            }
        }
        if self.evaluated.iter().all(|&e| e) {
            return Err(GboError::Exhausted);
        }
        let kernel = CombinedKernel::new(&self.bank, &self.features)?;
        let due = self.params.is_none() || self.observed.len() - self.fitted_at >= self.config.refit_every;
        if due {
            let seed = rng::derive_seed(self.seed, self.observed.len() as u64);
            let fit = fit_params(&kernel, &self.observed, &self.y, self.pins, &self.config.hyperopt, seed)?;
            log::debug!("refit at {} observations: lml {:.4}", self.observed.len(), fit.lml);
            self.fits.push(FitTrace { observations: self.observed.len(), params: fit.params.clone(), lml: fit.lml });
            self.params = Some(fit.params);
            self.fitted_at = self.observed.len();
        }
        let params = self.params.clone().unwrap();
        let model = GpModel::fit(&kernel, &params, &self.observed, &self.y)?;
        let y_max = self.y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let index = select_next(&model, &kernel, &self.evaluated, y_max)?;
        Ok(Suggestion { index, params: Some(params) })
    }

    pub fn tell(&mut self, index: usize, y: f64) -> Result<()> {
        if index >= self.evaluated.len() {
            return Err(GboError::param(format!("candidate {index} out of range")));
        }
        if self.evaluated[index] {
            return Err(GboError::param(format!("candidate {index} already observed")));
        }
        if !y.is_finite() {
            return Err(GboError::Domain { value: y, reason: "observations must be finite".into() });
        }
        self.evaluated[index] = true;
        self.observed.push(index);
        self.y.push(y);
        Ok(())
    }
}

/// Runs the GP optimizer for `budget` evaluations of `objective`.
#[allow(clippy::too_many_arguments)]
pub fn run_gbo(
    name: &str,
    bank: Arc<GraphKernelBank>,
    features: Arc<FeatureGroups>,
    ids: &[String],
    objective: &(dyn Fn(usize) -> Result<f64> + Sync),
    stop: impl Into<Stop>,
    config: &GboConfig,
    pins: Pins,
    seed: u64,
) -> Result<RunRecord> {
    let stop = stop.into();
    let budget = stop.budget;
    if ids.len() != bank.len() {
        return Err(GboError::DimensionMismatch { expected: bank.len(), actual: ids.len() });
    }
    if budget > ids.len() {
        return Err(GboError::param(format!("budget {budget} exceeds {} candidates", ids.len())));
    }
    if budget < config.n_init {
        return Err(GboError::param(format!("budget {budget} is below n_init {}", config.n_init)));
    }
    let mut opt = GboOptimizer::new(bank, features, config.clone(), pins, seed)?;
    let mut record = RunRecord::new(name, seed);
    while !record.finished(&stop) {
        let s = opt.ask()?;
        match objective(s.index) {
            Ok(y) => {
                opt.tell(s.index, y)?;
                record.push(s.index, &ids[s.index], y, s.params);
            }
            Err(e) => {
                record.aborted = Some(e.to_string());
                break;
            }
        }
    }
    record.fits = opt.fits.clone();
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize) -> (Arc<GraphKernelBank>, Arc<FeatureGroups>, Vec<String>, Vec<f64>) {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = (-(xs[i] - xs[j]).powi(2) / 0.02).exp();
            }
        }
        let bank = Arc::new(GraphKernelBank::from_dense(n, vec![((2, 2), g)]).unwrap());
        let features = Arc::new(FeatureGroups::from_values(vec![("x".into(), xs.iter().map(|&x| vec![x]).collect())]).unwrap());
        let ids = (0..n).map(|i| format!("c{i}")).collect();
        let y = xs.iter().map(|x| -(x - 0.63f64).powi(2)).collect();
        (bank, features, ids, y)
    }

    fn quick() -> GboConfig {
        GboConfig { n_init: 3, refit_every: 5, hyperopt: HyperoptOptions { restarts: 2, max_evals: 100 } }
    }

    #[test]
    fn exhausts_and_finds_optimum() {
        let (bank, features, ids, y) = setup(15);
        let f = |i: usize| Ok(y[i]);
        let r = run_gbo("gbo", bank, features, &ids, &f, 15, &quick(), Pins::default(), 1).unwrap();
        let opt = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.best(), Some(opt));
        let mut seen: Vec<usize> = r.steps.iter().map(|s| s.candidate).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 15);
    }

    #[test]
    fn budget_equal_to_init() {
        let (bank, features, ids, y) = setup(15);
        let f = |i: usize| Ok(y[i]);
        let r = run_gbo("gbo", bank, features, &ids, &f, 3, &quick(), Pins::default(), 2).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.steps.iter().all(|s| s.params.is_none()));
        assert!(r.fits.is_empty());
        let init = initial_design(15, 3, 2).unwrap();
        assert_eq!(r.steps.iter().map(|s| s.candidate).collect::<Vec<_>>(), init);
    }

    #[test]
    fn refit_cadence() {
        let (bank, features, ids, y) = setup(30);
        let f = |i: usize| Ok(y[i]);
        let r = run_gbo("gbo", bank, features, &ids, &f, 20, &quick(), Pins::default(), 3).unwrap();
        let at: Vec<usize> = r.fits.iter().map(|t| t.observations).collect();
        assert_eq!(at, vec![3, 8, 13, 18]);
    }

    #[test]
    fn objective_failure_is_flagged() {
        let (bank, features, ids, y) = setup(15);
        let f = |i: usize| if i == 7 { Err(GboError::Objective("boom".into())) } else { Ok(y[i]) };
        let r = run_gbo("gbo", bank, features, &ids, &f, 15, &quick(), Pins::default(), 1).unwrap();
        assert!(r.aborted.is_some());
        assert!(r.len() < 15);
    }

    #[test]
    fn argument_checks() {
        let (bank, features, ids, y) = setup(15);
        let f = |i: usize| Ok(y[i]);
        assert!(run_gbo("gbo", bank.clone(), features.clone(), &ids, &f, 16, &quick(), Pins::default(), 1).is_err());
        assert!(run_gbo("gbo", bank.clone(), features.clone(), &ids, &f, 2, &quick(), Pins::default(), 1).is_err());
        let bad = GboConfig { n_init: 1, ..quick() };
        assert!(run_gbo("gbo", bank, features, &ids, &f, 5, &bad, Pins::default(), 1).is_err());
    }

    #[test]
    fn ask_tell_rejects_repeats() {
        let (bank, features, _, _) = setup(10);
        let mut opt = GboOptimizer::new(bank, features, quick(), Pins::default(), 0).unwrap();
        let s = opt.ask().unwrap();
        opt.tell(s.index, 1.0).unwrap();
        assert!(opt.tell(s.index, 1.0).is_err());
        assert!(opt.tell(99, 1.0).is_err());
        assert_eq!(opt.best(), Some((s.index, 1.0)));
    }
}
