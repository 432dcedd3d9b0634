//! Derivative-free simplex search.

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Edge length of the initial simplex along each axis.
    pub initial_step: f64,
    /// Stop once the simplex spans less than this in every coordinate...
    pub xatol: f64,
    /// ...and its function values differ by less than this.
    pub fatol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_evals: 400, initial_step: 0.5, xatol: 1e-6, fatol: 1e-8 }
    }
}

/// Result of a simplex search.
#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimizes `f` from `start` using reflection 1, expansion 2, contraction
/// 0.5 and shrink 0.5. Non-finite values are treated as `+inf`.
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, start: &[f64], options: &NelderMeadOptions) -> NelderMeadResult {
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let value = eval(start, &mut evals);
        return NelderMeadResult { x: Vec::new(), value, evaluations: evals };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += options.initial_step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();

    while evals < options.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread_x = simplex[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let spread_f = values[1..].iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
        if spread_x <= options.xatol && spread_f <= options.fatol {
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
        let towards = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect() };

        let xr = towards(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = towards(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        // outside contraction when the reflection beat the worst point
        let xc = if fr < values[n] { towards(-0.5) } else { towards(0.5) };
        let fc = eval(&xc, &mut evals);
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            for k in 0..n {
                simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    NelderMeadResult { x: simplex[best].clone(), value: values[best], evaluations: evals }
}

/// Maximizes `f` by minimizing `-f`; the returned value is `f` itself.
pub fn nelder_mead_max(mut f: impl FnMut(&[f64]) -> f64, start: &[f64], options: &NelderMeadOptions) -> NelderMeadResult {
    let mut r = nelder_mead(|x| -f(x), start, options);
    r.value = -r.value;
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let r = nelder_mead_max(|x| -(x[0] - 3.0).powi(2), &[0.0], &NelderMeadOptions::default());
        assert!((r.x[0] - 3.0).abs() < 1e-4);
    }

    #[test]
    fn two_dimensional_quadratic() {
        let r = nelder_mead_max(
            |x| -((x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2)),
            &[0.0, 0.0],
            &NelderMeadOptions::default(),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn respects_budget_and_handles_nan() {
        let opts = NelderMeadOptions { max_evals: 30, ..Default::default() };
        let mut count = 0;
        let r = nelder_mead(
            |x| {
                count += 1;
                if x[0] > 1.0 {
                    f64::NAN
                } else {
                    (x[0] - 0.5).powi(2)
                }
            },
            &[0.0],
            &opts,
        );
        assert!(r.evaluations <= 30 + 1);
        assert_eq!(count, r.evaluations);
        assert!(r.value.is_finite());
    }

    #[test]
    fn restarts_never_hurt_on_rosenbrock() {
        let rosen = |x: &[f64]| -((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let opts = NelderMeadOptions { max_evals: 150, ..Default::default() };
        let single = nelder_mead_max(rosen, &[-1.5, 2.0], &opts);
        let starts = [[-1.5, 2.0], [0.0, 0.0], [2.0, -1.0], [1.2, 1.2], [-0.5, 0.5]];
        let multi = starts
            .iter()
            .map(|s| nelder_mead_max(rosen, s, &opts).value)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(multi >= single.value);
    }
}
