use serde::{Deserialize, Serialize};

use crate::kernels::KernelParams;

/// One evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub candidate: usize,
    pub candidate_id: String,
    pub y: f64,
    pub best_so_far: f64,
    /// Hyperparameters of the surrogate that chose this candidate; `None`
    /// for initial and model-free choices.
    pub params: Option<KernelParams>,
}

impl Step {
    pub fn gamma(&self) -> Option<f64> {
        self.params.as_ref().map(KernelParams::gamma)
    }
}

/// Result of one hyperparameter refit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    /// Number of observations the fit used.
    pub observations: usize,
    pub params: KernelParams,
    pub lml: f64,
}

/// When a run ends: after `budget` evaluations, or as soon as an
/// evaluation reaches `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stop {
    pub budget: usize,
    pub target: Option<f64>,
}

impl From<usize> for Stop {
    fn from(budget: usize) -> Self {
        Stop { budget, target: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunRecord {
    pub strategy: String,
    pub seed: u64,
    pub steps: Vec<Step>,
    pub fits: Vec<FitTrace>,
    /// Set when the run stopped early because an evaluation failed.
    pub aborted: Option<String>,
}

impl RunRecord {
    pub fn new(strategy: impl Into<String>, seed: u64) -> Self {
        RunRecord { strategy: strategy.into(), seed, ..Default::default() }
    }

    pub fn push(&mut self, candidate: usize, candidate_id: &str, y: f64, params: Option<KernelParams>) {
        let best_so_far = self.best().map_or(y, |b| b.max(y));
        self.steps.push(Step { candidate, candidate_id: candidate_id.to_string(), y, best_so_far, params });
    }

    pub fn finished(&self, stop: &Stop) -> bool {
        self.len() >= stop.budget
            || self.aborted.is_some()
            || stop.target.is_some_and(|t| self.best().is_some_and(|b| b >= t))
    }

    pub fn best(&self) -> Option<f64> {
        self.steps.last().map(|s| s.best_so_far)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of evaluations until the best-so-far first reaches `optimum`,
    /// or `budget + 1` when it never does.
    pub fn evaluations_to_optimum(&self, optimum: f64, budget: usize) -> usize {
        let tol = 1e-12 * optimum.abs().max(1.0);
        self.steps
            .iter()
            .position(|s| s.best_so_far >= optimum - tol)
            .map_or(budget + 1, |i| i + 1)
    }

    /// `mean(beta-bar) / mean(alpha)` over all refits.
    pub fn gamma(&self) -> Option<f64> {
        if self.fits.is_empty() {
            return None;
        }
        let n = self.fits.len() as f64;
        let alpha = self.fits.iter().map(|f| f.params.alpha).sum::<f64>() / n;
        let beta = self
            .fits
            .iter()
            .map(|f| f.params.betas.iter().sum::<f64>() / f.params.betas.len().max(1) as f64)
            .sum::<f64>()
            / n;
        Some(beta / alpha)
    }
}
