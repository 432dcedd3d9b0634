use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::baselines::{run_ga, run_random, run_sa, BitEncoding, GaConfig, SaConfig};
use super::optimizer::{run_gbo, GboConfig};
use super::record::{RunRecord, Stop};
use crate::error::{GboError, Result};
use crate::features::FeatureGroups;
use crate::hyperopt::Pins;
use crate::kernels::GraphKernelBank;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Deep graph kernel plus explicit features.
    Gbo,
    /// Plain graphlet kernel plus explicit features.
    GboBase,
    Random,
    /// Explicit features only.
    BoF,
    /// Graph kernel only.
    BoG,
    Ga,
    Sa,
}

impl Strategy {
    pub const ALL: [Strategy; 7] =
        [Strategy::Gbo, Strategy::GboBase, Strategy::Random, Strategy::BoF, Strategy::BoG, Strategy::Ga, Strategy::Sa];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Gbo => "gbo",
            Strategy::GboBase => "gbo_base",
            Strategy::Random => "random",
            Strategy::BoF => "bo_f",
            Strategy::BoG => "bo_g",
            Strategy::Ga => "ga",
            Strategy::Sa => "sa",
        }
    }

    pub fn needs_base_kernel(self) -> bool {
        self == Strategy::GboBase
    }

    pub fn needs_deep_kernel(self) -> bool {
        matches!(self, Strategy::Gbo | Strategy::BoF | Strategy::BoG)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = GboError;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| GboError::Config(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StrategyOptions {
    /// End a run as soon as an evaluation reaches this value.
    pub target: Option<f64>,
    pub gbo: GboConfig,
    pub ga: GaConfig,
    pub sa: SaConfig,
}

/// Everything a strategy needs to search one candidate set.
#[derive(Clone)]
pub struct SearchProblem<'a> {
    pub ids: &'a [String],
    pub objective: &'a (dyn Fn(usize) -> Result<f64> + Sync),
    pub features: Arc<FeatureGroups>,
    /// Deep kernel bank (gbo, bo_f, bo_g).
    pub bank: Option<Arc<GraphKernelBank>>,
    /// Plain graphlet kernel bank (gbo_base).
    pub base_bank: Option<Arc<GraphKernelBank>>,
    /// Required by ga and sa.
    pub encoding: Option<&'a BitEncoding>,
}

pub fn run_strategy(
    strategy: Strategy,
    problem: &SearchProblem,
    budget: usize,
    options: &StrategyOptions,
    seed: u64,
) -> Result<RunRecord> {
    let n_init = options.gbo.n_init;
    let budget = Stop { budget, target: options.target };
    let bank = |b: &Option<Arc<GraphKernelBank>>| {
        b.clone().ok_or_else(|| GboError::Config(format!("strategy {strategy} needs a graph kernel bank")))
    };
    let encoding = || {
        problem
            .encoding
            .ok_or_else(|| GboError::Unsupported(format!("{strategy} needs bit-encodable candidates")))
    };
    let gbo = |b: Arc<GraphKernelBank>, pins: Pins| {
        run_gbo(strategy.name(), b, problem.features.clone(), problem.ids, problem.objective, budget, &options.gbo, pins, seed)
    };
    match strategy {
        Strategy::Gbo => gbo(bank(&problem.bank)?, Pins::default()),
        Strategy::GboBase => gbo(bank(&problem.base_bank)?, Pins::default()),
        Strategy::BoF => gbo(bank(&problem.bank)?, Pins { alpha_zero: true, betas_zero: false }),
        Strategy::BoG => gbo(bank(&problem.bank)?, Pins { alpha_zero: false, betas_zero: true }),
        Strategy::Random => run_random(problem.ids, problem.objective, budget, n_init, seed),
        Strategy::Ga => run_ga(problem.ids, encoding()?, problem.objective, budget, n_init, &options.ga, seed),
        Strategy::Sa => run_sa(problem.ids, encoding()?, problem.objective, budget, n_init, &options.sa, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperopt::HyperoptOptions;

    #[test]
    fn names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("gpo".parse::<Strategy>().is_err());
    }

    fn problem_parts(n: usize) -> (Vec<String>, Vec<f64>, Arc<FeatureGroups>, Arc<GraphKernelBank>) {
        let xs: Vec<f64> = (0..n).map(|i| ((i * 37) % n) as f64 / n as f64).collect();
        let ids = (0..n).map(|i| format!("c{i}")).collect();
        let y = xs.iter().map(|x| (6.0 * x).sin()).collect();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = (-(xs[i] - xs[j]).powi(2) / 0.1).exp();
            }
        }
        let bank = Arc::new(GraphKernelBank::from_dense(n, vec![((2, 2), g)]).unwrap());
        let features = Arc::new(FeatureGroups::from_values(vec![("x".into(), xs.iter().map(|&x| vec![x]).collect())]).unwrap());
        (ids, y, features, bank)
    }

    #[test]
    fn pins_reach_every_snapshot() {
        let (ids, y, features, bank) = problem_parts(32);
        let f = |i: usize| Ok(y[i]);
        let problem = SearchProblem {
            ids: &ids,
            objective: &f,
            features,
            bank: Some(bank.clone()),
            base_bank: None,
            encoding: None,
        };
        let options = StrategyOptions {
            gbo: GboConfig { n_init: 4, refit_every: 4, hyperopt: HyperoptOptions { restarts: 2, max_evals: 80 } },
            ..Default::default()
        };
        let bo_f = run_strategy(Strategy::BoF, &problem, 14, &options, 7).unwrap();
        assert!(bo_f.steps.iter().filter_map(|s| s.params.as_ref()).all(|p| p.alpha == 0.0));
        let bo_g = run_strategy(Strategy::BoG, &problem, 14, &options, 7).unwrap();
        assert!(bo_g.steps.iter().filter_map(|s| s.params.as_ref()).all(|p| p.betas.iter().all(|&b| b == 0.0)));
        assert!(matches!(run_strategy(Strategy::Ga, &problem, 14, &options, 7), Err(GboError::Unsupported(_))));
        assert!(run_strategy(Strategy::GboBase, &problem, 14, &options, 7).is_err());

        // same seed: identical initial evaluations across strategies
        let random = run_strategy(Strategy::Random, &problem, 14, &options, 7).unwrap();
        let head = |r: &RunRecord| r.steps[..4].iter().map(|s| s.candidate).collect::<Vec<_>>();
        assert_eq!(head(&random), head(&bo_f));
        assert_eq!(head(&random), head(&bo_g));
    }
}
