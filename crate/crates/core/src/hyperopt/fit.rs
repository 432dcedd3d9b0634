//! Maximum-marginal-likelihood fitting of the combined kernel: an outer
//! loop over the `(w, d)` grid and multi-restart simplex search over the
//! continuous parameters in log space.

use std::f64::consts::PI;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead_max, NelderMeadOptions};
use crate::error::{GboError, Result};
use crate::gp::{factor_with_jitter, SIGMA_MIN};
use crate::kernels::{CombinedKernel, KernelParams};
use crate::rng;

const LOG_CLAMP: f64 = 30.0;

fn default_restarts() -> usize {
    5
}
fn default_max_evals() -> usize {
    400
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperoptOptions {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Objective evaluations per simplex run.
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
}

impl Default for HyperoptOptions {
    fn default() -> Self {
        HyperoptOptions { restarts: default_restarts(), max_evals: default_max_evals() }
    }
}

/// Parameters held at zero instead of fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pins {
    pub alpha_zero: bool,
    pub betas_zero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: KernelParams,
    pub lml: f64,
    /// Best log marginal likelihood among the restart start points.
    pub best_start_lml: f64,
}

/// Precomputed pieces of the Gram matrix over the observed points; all
/// pairwise arrays hold the strict upper triangle, row by row.
struct Problem {
    n: usize,
    y: Vec<f64>,
    graph: Vec<Vec<f64>>,
    /// `sq[group][dim][pair]` squared feature differences.
    sq: Vec<Vec<Vec<f64>>>,
    pins: Pins,
    dims: Vec<usize>,
}

impl Problem {
    fn n_params(&self) -> usize {
        let feat = if self.pins.betas_zero { 0 } else { self.dims.len() + self.dims.iter().sum::<usize>() };
        usize::from(!self.pins.alpha_zero) + feat + 1
    }

    fn decode(&self, x: &[f64], grid_index: usize) -> KernelParams {
        let e = |v: f64| v.clamp(-LOG_CLAMP, LOG_CLAMP).exp();
        let mut it = x.iter().copied();
        let alpha = if self.pins.alpha_zero { 0.0 } else { e(it.next().unwrap()) };
        let (betas, lengthscales) = if self.pins.betas_zero {
            (vec![0.0; self.dims.len()], self.dims.iter().map(|&d| vec![1.0; d]).collect())
        } else {
            let betas: Vec<f64> = (0..self.dims.len()).map(|_| e(it.next().unwrap())).collect();
            let ls = self.dims.iter().map(|&d| (0..d).map(|_| e(it.next().unwrap())).collect()).collect();
            (betas, ls)
        };
        let sigma = e(it.next().unwrap()).max(SIGMA_MIN);
        KernelParams { grid_index, alpha, betas, lengthscales, sigma }
    }

    fn encode(&self, p: &KernelParams) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.n_params());
        if !self.pins.alpha_zero {
            x.push(p.alpha.ln());
        }
        if !self.pins.betas_zero {
            x.extend(p.betas.iter().map(|b| b.ln()));
            x.extend(p.lengthscales.iter().flatten().map(|l| l.ln()));
        }
        x.push(p.sigma.ln());
        x
    }

    fn lml(&self, p: &KernelParams) -> f64 {
        let n = self.n;
        let mut k = vec![0.0; n * n];
        let diag = p.alpha + p.betas.iter().sum::<f64>() + p.sigma * p.sigma;
        let graph = &self.graph[if self.pins.alpha_zero { 0 } else { p.grid_index }];
        let inv: Vec<Vec<f64>> = p
            .lengthscales
            .iter()
            .map(|ls| ls.iter().map(|l| 0.5 / (l * l)).collect())
            .collect();
        let mut pair = 0;
        for i in 0..n {
            k[i * n + i] = diag;
            for j in i + 1..n {
                let mut v = if p.alpha != 0.0 { p.alpha * graph[pair] } else { 0.0 };
                for (g, beta) in p.betas.iter().enumerate() {
                    if *beta != 0.0 {
                        let mut s = 0.0;
                        for (d, w) in inv[g].iter().enumerate() {
                            s += w * self.sq[g][d][pair];
                        }
                        v += beta * (-s).exp();
                    }
                }
                k[i * n + j] = v;
                k[j * n + i] = v;
                pair += 1;
            }
        }
        let Ok((chol, _)) = factor_with_jitter(&mut k, n) else {
            return f64::NEG_INFINITY;
        };
        let alpha = chol.solve(&self.y);
        let fit: f64 = self.y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
        let v = -0.5 * fit - 0.5 * chol.log_det() - 0.5 * n as f64 * (2.0 * PI).ln();
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    }
}

fn log_uniform(r: &mut rng::Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo.ln()..hi.ln())
}

/// Maximizes the log marginal likelihood of `y` observed at `indices`.
/// Every grid point gets the same `restarts` log-uniform starting points.
pub fn fit_params(
    kernel: &CombinedKernel,
    indices: &[usize],
    y: &[f64],
    pins: Pins,
    options: &HyperoptOptions,
    seed: u64,
) -> Result<FitResult> {
    if indices.len() != y.len() {
        return Err(GboError::DimensionMismatch { expected: indices.len(), actual: y.len() });
    }
    if indices.len() < 2 {
        return Err(GboError::Fitting("need at least two observations".into()));
    }
    if options.restarts == 0 {
        return Err(GboError::Config("hyperopt restarts must be at least 1".into()));
    }
    if pins.alpha_zero && (pins.betas_zero || kernel.features.is_empty()) {
        return Err(GboError::Fitting("every kernel component is pinned to zero".into()));
    }
    let n = indices.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (indices[i], indices[j]))).collect();

    let grid_count = if pins.alpha_zero { 1 } else { kernel.bank.grid().len() };
    let graph = (0..grid_count)
        .map(|g| {
            if pins.alpha_zero {
                Vec::new()
            } else {
                pairs.iter().map(|&(a, b)| kernel.bank.value(g, a, b)).collect()
            }
        })
        .collect();
    let sq = kernel
        .features
        .groups
        .iter()
        .map(|group| {
            (0..group.dim())
                .map(|d| pairs.iter().map(|&(a, b)| (group.values[a][d] - group.values[b][d]).powi(2)).collect())
                .collect()
        })
        .collect();
    let problem = Problem { n, y: yc, graph, sq, pins, dims: kernel.features.dims() };

    let mut r = rng::derive_rng(seed, rng::label("hyperopt-starts"));
    let starts: Vec<KernelParams> = (0..options.restarts)
        .map(|_| {
            let alpha = if pins.alpha_zero { 0.0 } else { log_uniform(&mut r, 0.01, 10.0).exp() };
            let betas = problem
                .dims
                .iter()
                .map(|_| if pins.betas_zero { 0.0 } else { log_uniform(&mut r, 0.01, 10.0).exp() })
                .collect();
            let lengthscales = problem
                .dims
                .iter()
                .map(|&d| (0..d).map(|_| if pins.betas_zero { 1.0 } else { log_uniform(&mut r, 0.05, 5.0).exp() }).collect())
                .collect();
            let sigma = log_uniform(&mut r, 1e-4, 0.5).exp();
            KernelParams { grid_index: 0, alpha, betas, lengthscales, sigma }
        })
        .collect();

    let nm = NelderMeadOptions { max_evals: options.max_evals, ..Default::default() };
    let per_grid: Vec<(KernelParams, f64, f64)> = (0..grid_count)
        .into_par_iter()
        .map(|g| {
            let mut best: Option<(KernelParams, f64)> = None;
            let mut best_start = f64::NEG_INFINITY;
            for start in &starts {
                let mut s = start.clone();
                s.grid_index = g;
                best_start = best_start.max(problem.lml(&s));
                let res = nelder_mead_max(|x| problem.lml(&problem.decode(x, g)), &problem.encode(&s), &nm);
                let p = problem.decode(&res.x, g);
                if best.as_ref().is_none_or(|(_, v)| res.value > *v) {
                    best = Some((p, res.value));
                }
            }
            let (p, v) = best.unwrap();
            (p, v, best_start)
        })
        .collect();

    let best_start_lml = per_grid.iter().map(|t| t.2).fold(f64::NEG_INFINITY, f64::max);
    let (params, lml, _) = per_grid
        .into_iter()
        .reduce(|a, b| if b.1 > a.1 { b } else { a })
        .unwrap();
    if !lml.is_finite() {
        return Err(GboError::Fitting("no grid point produced a finite marginal likelihood".into()));
    }
    Ok(FitResult { params, lml, best_start_lml })
}
