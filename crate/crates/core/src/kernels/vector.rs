use crate::error::{GboError, Result};

/// Squared-exponential kernel with one length scale per dimension:
/// `exp(-sum_i (a_i - b_i)^2 / (2 l_i^2))`.
pub fn seard(a: &[f64], b: &[f64], lengthscales: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(GboError::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    if lengthscales.len() != a.len() {
        return Err(GboError::DimensionMismatch { expected: a.len(), actual: lengthscales.len() });
    }
    if let Some(&l) = lengthscales.iter().find(|&&l| !(l > 0.0)) {
        return Err(GboError::param(format!("length scale {l} must be positive")));
    }
    Ok(seard_unchecked(a, b, lengthscales))
}

#[inline]
pub(crate) fn seard_unchecked(a: &[f64], b: &[f64], lengthscales: &[f64]) -> f64 {
    let mut s = 0.0;
    for ((x, y), l) in a.iter().zip(b).zip(lengthscales) {
        let d = (x - y) / l;
        s += d * d;
    }
    (-0.5 * s).exp()
}
