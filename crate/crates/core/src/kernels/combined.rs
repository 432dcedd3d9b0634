use serde::{Deserialize, Serialize};

use super::graph_kernel::GraphKernelBank;
use super::vector::seard_unchecked;
use crate::error::{GboError, Result};
use crate::features::FeatureGroups;

/// Hyperparameters of the combined kernel plus the GP noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Index into the bank's `(w, d)` grid.
    pub grid_index: usize,
    pub alpha: f64,
    pub betas: Vec<f64>,
    /// One vector of length scales per feature group.
    pub lengthscales: Vec<Vec<f64>>,
    pub sigma: f64,
}

impl KernelParams {
    /// Unit weights and length scales, small noise.
    pub fn initial(groups: &FeatureGroups) -> Self {
        KernelParams {
            grid_index: 0,
            alpha: 1.0,
            betas: vec![1.0; groups.len()],
            lengthscales: groups.dims().into_iter().map(|d| vec![1.0; d]).collect(),
            sigma: 1e-3,
        }
    }

    /// `mean(beta) / alpha`; infinite when alpha is zero.
    pub fn gamma(&self) -> f64 {
        if self.betas.is_empty() {
            return 0.0;
        }
        let mean = self.betas.iter().sum::<f64>() / self.betas.len() as f64;
        mean / self.alpha
    }
}

/// `alpha * k_graph + sum_j beta_j * SEARD_j` over candidate indices.
#[derive(Debug, Clone, Copy)]
pub struct CombinedKernel<'a> {
    pub bank: &'a GraphKernelBank,
    pub features: &'a FeatureGroups,
}

impl<'a> CombinedKernel<'a> {
    pub fn new(bank: &'a GraphKernelBank, features: &'a FeatureGroups) -> Result<Self> {
        for g in &features.groups {
            if g.values.len() != bank.len() {
                return Err(GboError::DimensionMismatch { expected: bank.len(), actual: g.values.len() });
            }
        }
        Ok(CombinedKernel { bank, features })
    }

    pub fn check(&self, p: &KernelParams) -> Result<()> {
        if p.grid_index >= self.bank.grid().len() {
            return Err(GboError::param(format!("grid index {} out of range", p.grid_index)));
        }
        if p.betas.len() != self.features.len() {
            return Err(GboError::DimensionMismatch { expected: self.features.len(), actual: p.betas.len() });
        }
        if p.lengthscales.len() != self.features.len() {
            return Err(GboError::DimensionMismatch { expected: self.features.len(), actual: p.lengthscales.len() });
        }
        for (ls, g) in p.lengthscales.iter().zip(&self.features.groups) {
            if ls.len() != g.dim() {
                return Err(GboError::DimensionMismatch { expected: g.dim(), actual: ls.len() });
            }
            if ls.iter().any(|&l| !(l > 0.0)) {
                return Err(GboError::param("length scales must be positive"));
            }
        }
        if !(p.alpha >= 0.0) || p.betas.iter().any(|&b| !(b >= 0.0)) {
            return Err(GboError::param("kernel weights must be non-negative"));
        }
        Ok(())
    }

    #[inline]
    pub fn value(&self, p: &KernelParams, i: usize, j: usize) -> f64 {
        let mut v = if p.alpha != 0.0 { p.alpha * self.bank.value(p.grid_index, i, j) } else { 0.0 };
        for ((g, beta), ls) in self.features.groups.iter().zip(&p.betas).zip(&p.lengthscales) {
            if *beta != 0.0 {
                v += beta * seard_unchecked(&g.values[i], &g.values[j], ls);
            }
        }
        v
    }

    /// Row-major Gram matrix over `indices`.
    pub fn gram(&self, p: &KernelParams, indices: &[usize]) -> Vec<f64> {
        let n = indices.len();
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let v = self.value(p, indices[a], indices[b]);
                out[a * n + b] = v;
                out[b * n + a] = v;
            }
        }
        out
    }

    /// `k(x_i, x_j)` for every `i` in `indices`.
    pub fn cross(&self, p: &KernelParams, indices: &[usize], j: usize) -> Vec<f64> {
        indices.iter().map(|&i| self.value(p, i, j)).collect()
    }
}
