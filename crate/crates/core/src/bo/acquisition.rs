use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{GboError, Result};
use crate::gp::GpModel;
use crate::kernels::CombinedKernel;

/// Expected improvement over `y_max` of a Gaussian with the given mean and
/// variance. Zero variance gives `max(0, mean - y_max)`.
pub fn expected_improvement(mean: f64, variance: f64, y_max: f64) -> f64 {
    let sd = variance.max(0.0).sqrt();
    let gain = mean - y_max;
    if sd == 0.0 {
        return gain.max(0.0);
    }
    let z = gain / sd;
    let std = Normal::standard();
    (gain * std.cdf(z) + sd * std.pdf(z)).max(0.0)
}

/// The unevaluated candidate with the largest EI; ties go to the lowest
/// index.
pub fn select_next(model: &GpModel, kernel: &CombinedKernel, evaluated: &[bool], y_max: f64) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, _) in evaluated.iter().enumerate().filter(|(_, &e)| !e) {
        let (mu, var) = model.predict(kernel, j);
        let ei = expected_improvement(mu, var, y_max);
        if best.is_none_or(|(_, b)| ei > b) {
            best = Some((j, ei));
        }
    }
    best.map(|(j, _)| j).ok_or(GboError::Exhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureGroups;
    use crate::kernels::{GraphKernelBank, KernelParams};

    #[test]
    fn analytic_points() {
        let v = expected_improvement(0.0, 1.0, 0.0);
        assert!((v - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert_eq!(expected_improvement(-1.0, 0.0, 0.0), 0.0);
        assert_eq!(expected_improvement(2.0, 0.0, 0.5), 1.5);
        assert!(expected_improvement(-50.0, 1.0, 0.0) >= 0.0);
    }

    #[test]
    fn monotone_in_mean_and_sd() {
        let mut last = 0.0;
        for i in 0..20 {
            let v = expected_improvement(i as f64 * 0.1 - 1.0, 0.3, 0.0);
            assert!(v >= last);
            last = v;
        }
        let mut last = 0.0;
        for i in 1..20 {
            let v = expected_improvement(0.2, (i as f64 * 0.1).powi(2), 0.5);
            assert!(v >= last);
            last = v;
        }
    }

    fn setup() -> (GraphKernelBank, FeatureGroups) {
        let n = 4;
        let bank = GraphKernelBank::from_dense(n, vec![((2, 2), {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                m[i * n + i] = 1.0;
            }
            m
        })])
        .unwrap();
        let f = FeatureGroups::from_values(vec![("x".into(), vec![vec![0.0], vec![0.3], vec![0.3], vec![0.9]])]).unwrap();
        (bank, f)
    }

    #[test]
    fn selection_rules() {
        let (bank, f) = setup();
        let kernel = CombinedKernel::new(&bank, &f).unwrap();
        let p = KernelParams { grid_index: 0, alpha: 0.5, betas: vec![1.0], lengthscales: vec![vec![0.5]], sigma: 0.01 };
        let gp = GpModel::fit(&kernel, &p, &[0], &[1.0]).unwrap();
        // candidates 1 and 2 are identical and equally far from 0
        assert_eq!(select_next(&gp, &kernel, &[true, false, false, true], 1.0).unwrap(), 1);
        assert_eq!(select_next(&gp, &kernel, &[true, true, false, true], 1.0).unwrap(), 2);
        assert!(matches!(select_next(&gp, &kernel, &[true; 4], 1.0), Err(GboError::Exhausted)));
    }
}
