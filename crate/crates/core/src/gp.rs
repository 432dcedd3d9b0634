//! Gaussian-process regression on candidate indices with a combined kernel.

use std::f64::consts::PI;

use crate::error::{GboError, Result};
use crate::kernels::{CombinedKernel, KernelParams};

/// Jitter factors (relative to the mean diagonal) tried in order when the
/// Cholesky factorization fails.
/// Smallest noise standard deviation accepted by the GP.
pub const SIGMA_MIN: f64 = 1e-6;

const JITTER_STEPS: [f64; 8] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];

/// Lower-triangular Cholesky factor, row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes a symmetric row-major matrix; `None` if not positive
    /// definite.
    pub fn new(a: &[f64], n: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Some(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The factor `L`, row-major with zeros above the diagonal.
    pub fn lower(&self) -> &[f64] {
        &self.l
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.l[i * n + i];
        }
        x
    }

    /// Solves `L^T x = b`.
    pub fn solve_upper(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `log det A`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.l[i * self.n + i].ln()).sum::<f64>()
    }
}

/// Factorizes `k` (row-major, modified in place by added jitter) and
/// returns the factor and the absolute jitter that was needed.
pub fn factor_with_jitter(k: &mut [f64], n: usize) -> Result<(Cholesky, f64)> {
    let mean_diag = if n == 0 { 1.0 } else { (0..n).map(|i| k[i * n + i]).sum::<f64>() / n as f64 };
    let scale = if mean_diag > 0.0 && mean_diag.is_finite() { mean_diag } else { 1.0 };
    let mut added = 0.0;
    for step in JITTER_STEPS {
        let target = step * scale;
        for i in 0..n {
            k[i * n + i] += target - added;
        }
        added = target;
        if let Some(c) = Cholesky::new(k, n) {
            return Ok((c, added));
        }
    }
    Err(GboError::IllConditioned { max_jitter: added })
}

/// Log marginal likelihood of centered targets under covariance `k`
/// (noise already on the diagonal).
pub fn lml_from_covariance(mut k: Vec<f64>, y_centered: &[f64]) -> Result<f64> {
    let n = y_centered.len();
    let (c, _) = factor_with_jitter(&mut k, n)?;
    let alpha = c.solve(y_centered);
    let fit: f64 = y_centered.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    Ok(-0.5 * fit - 0.5 * c.log_det() - 0.5 * n as f64 * (2.0 * PI).ln())
}

/// A GP conditioned on observations at candidate indices.
#[derive(Debug, Clone)]
pub struct GpModel {
    indices: Vec<usize>,
    y_mean: f64,
    chol: Cholesky,
    alpha: Vec<f64>,
    lml: f64,
    jitter: f64,
    params: KernelParams,
}

impl GpModel {
    /// Conditions on `y` observed at `indices`. Targets are centered by their
    /// mean; the noise variance is `sigma^2`.
    pub fn fit(kernel: &CombinedKernel, params: &KernelParams, indices: &[usize], y: &[f64]) -> Result<Self> {
        if indices.len() != y.len() {
            return Err(GboError::DimensionMismatch { expected: indices.len(), actual: y.len() });
        }
        if indices.is_empty() {
            return Err(GboError::param("no observations"));
        }
        if let Some(v) = y.iter().find(|v| !v.is_finite()) {
            return Err(GboError::Domain { value: *v, reason: "observations must be finite".into() });
        }
        kernel.check(params)?;
        if !(params.sigma >= SIGMA_MIN) {
            return Err(GboError::param(format!("noise {} below minimum {SIGMA_MIN}", params.sigma)));
        }
        let n = indices.len();
        let mut k = kernel.gram(params, indices);
        let noise = params.sigma * params.sigma;
        for i in 0..n {
            k[i * n + i] += noise;
        }
        let (chol, jitter) = factor_with_jitter(&mut k, n)?;
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
        let alpha = chol.solve(&yc);
        let fit: f64 = yc.iter().zip(&alpha).map(|(a, b)| a * b).sum();
        let lml = -0.5 * fit - 0.5 * chol.log_det() - 0.5 * n as f64 * (2.0 * PI).ln();
        Ok(GpModel {
            indices: indices.to_vec(),
            y_mean,
            chol,
            alpha,
            lml,
            jitter,
            params: params.clone(),
        })
    }

    /// Posterior mean and latent variance at candidate `j`.
    pub fn predict(&self, kernel: &CombinedKernel, j: usize) -> (f64, f64) {
        let ks = kernel.cross(&self.params, &self.indices, j);
        let mu = self.y_mean + ks.iter().zip(&self.alpha).map(|(a, b)| a * b).sum::<f64>();
        let v = self.chol.solve_lower(&ks);
        let var = kernel.value(&self.params, j, j) - v.iter().map(|x| x * x).sum::<f64>();
        (mu, var.max(0.0))
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.lml
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}
