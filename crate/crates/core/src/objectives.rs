//! Benchmark objectives over graphs. All are maximized.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{GboError, Result};
use crate::features::{FeatureExtractor, normalize};
use crate::graph::{CandidateSet, Graph};
use crate::rng;

/// Weights of the four Hartmann terms.
pub const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
/// First four columns of the 6-D Hartmann `A` matrix.
pub const HARTMANN_A: [[f64; 4]; 4] = [
    [10.0, 3.0, 17.0, 3.5],
    [0.05, 10.0, 17.0, 0.1],
    [3.0, 3.5, 1.7, 10.0],
    [17.0, 8.0, 0.05, 10.0],
];
/// First four columns of the 6-D Hartmann `P` matrix.
pub const HARTMANN_P: [[f64; 4]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124],
    [0.2329, 0.4135, 0.8307, 0.3736],
    [0.2348, 0.1451, 0.3522, 0.2883],
    [0.4047, 0.8828, 0.8732, 0.5743],
];

/// Features the Hartmann benchmark reads, in argument order.
pub const HARTMANN_FEATURES: [&str; 4] = ["node_count", "edge_count", "avg_degree_centrality", "avg_betweenness"];

/// Negated 4-D Hartmann function, `sum_i alpha_i exp(-sum_j A_ij (x_j - P_ij)^2)`,
/// defined on the unit cube.
pub fn hartmann4(x: &[f64]) -> Result<f64> {
    if x.len() != 4 {
        return Err(GboError::DimensionMismatch { expected: 4, actual: x.len() });
    }
    if let Some(&v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(GboError::Domain { value: v, reason: "Hartmann inputs must lie in [0, 1]".into() });
    }
    Ok((0..4)
        .map(|i| {
            let s: f64 = (0..4).map(|j| HARTMANN_A[i][j] * (x[j] - HARTMANN_P[i][j]).powi(2)).sum();
            HARTMANN_ALPHA[i] * (-s).exp()
        })
        .sum())
}

/// Hartmann objective of every candidate, on features min-max normalized
/// over the set.
pub fn hartmann_values(candidates: &CandidateSet) -> Result<Vec<f64>> {
    let extractor = FeatureExtractor::new(&HARTMANN_FEATURES, 0)?;
    let raw = candidates
        .graphs()
        .iter()
        .enumerate()
        .map(|(i, g)| extractor.extract(g, i))
        .collect::<Result<Vec<_>>>()?;
    normalize(&raw).iter().map(|x| hartmann4(x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Removal {
    Random,
    /// Highest degree first, ties by lower node index.
    Targeted,
}

impl fmt::Display for Removal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Removal::Random => "random",
            Removal::Targeted => "targeted",
        })
    }
}

impl FromStr for Removal {
    type Err = GboError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Removal::Random),
            "targeted" => Ok(Removal::Targeted),
            other => Err(GboError::Config(format!("unknown removal mode `{other}`"))),
        }
    }
}

/// Largest residual component over surviving nodes, `C / (N - N_r)`, after
/// removing `N_r = round(p N)` nodes. Random removal averages `trials`
/// seeded draws; targeted removal is deterministic.
pub fn robustness(graph: &Graph, removal: Removal, p: f64, trials: usize, seed: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(GboError::param(format!("removal ratio {p} must lie in (0, 1)")));
    }
    let n = graph.node_count();
    let removed = (p * n as f64).round() as usize;
    if removed >= n {
        return Err(GboError::param(format!("removing {removed} of {n} nodes leaves nothing")));
    }
    let left = (n - removed) as f64;
    match removal {
        Removal::Targeted => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
            let rest = graph.remove_nodes(&order[..removed])?;
            Ok(rest.largest_component_size() as f64 / left)
        }
        Removal::Random => {
            if trials == 0 {
                return Err(GboError::param("random removal needs at least one trial"));
            }
            let mut r = rng::derive_rng(seed, rng::label("robustness"));
            let mut total = 0.0;
            for _ in 0..trials {
                let nodes = sample(&mut r, n, removed).into_vec();
                total += graph.remove_nodes(&nodes)?.largest_component_size() as f64 / left;
            }
            Ok(total / trials as f64)
        }
    }
}

/// `ln(d_t2 - d_t) - 1`: log degree growth between two snapshots.
pub fn activity(d_t: f64, d_t2: f64) -> Result<f64> {
    let growth = d_t2 - d_t;
    if !(growth > 0.0) {
        return Err(GboError::Domain { value: growth, reason: "degree growth must be positive".into() });
    }
    Ok(growth.ln() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_er, synth_dataset, SynthSpec};

    // textbook form: -sum alpha_i exp(-sum A (x-P)^2), written out term by term
    fn hart_reference(x: [f64; 4]) -> f64 {
        let a = [[10.0, 3.0, 17.0, 3.5], [0.05, 10.0, 17.0, 0.1], [3.0, 3.5, 1.7, 10.0], [17.0, 8.0, 0.05, 10.0]];
        let p = [[1312.0, 1696.0, 5569.0, 124.0], [2329.0, 4135.0, 8307.0, 3736.0], [2348.0, 1451.0, 3522.0, 2883.0], [
            4047.0, 8828.0, 8732.0, 5743.0,
        ]];
        let alpha = [1.0, 1.2, 3.0, 3.2];
        let mut outer = 0.0;
        for i in 0..4 {
            let mut inner = 0.0;
            for j in 0..4 {
                inner += a[i][j] * (x[j] - p[i][j] * 1e-4) * (x[j] - p[i][j] * 1e-4);
            }
            outer += alpha[i] * f64::exp(-inner);
        }
        -outer
    }

    #[test]
    fn hartmann_matches_reference() {
        assert!((hartmann4(&[0.0; 4]).unwrap() + hart_reference([0.0; 4])).abs() < 1e-15);
        let mut r = rng::rng(1);
        for _ in 0..100 {
            use rand::Rng as _;
            let x: [f64; 4] = std::array::from_fn(|_| r.random());
            assert!((hartmann4(&x).unwrap() + hart_reference(x)).abs() < 1e-13);
        }
        assert!(matches!(hartmann4(&[1.2, 0.0, 0.0, 0.0]), Err(GboError::Domain { .. })));
        assert!(hartmann4(&[0.0; 3]).is_err());
    }

    #[test]
    fn hartmann_values_follow_graphs_not_order() {
        let set = synth_dataset(&SynthSpec {
            nodes: vec![8, 12],
            edge_probs: vec![0.3],
            ba_edges: vec![2],
            count_per_family: 5,
            seed: 3,
        })
        .unwrap();
        let v = hartmann_values(&set).unwrap();
        let order: Vec<usize> = (0..set.len()).rev().collect();
        let w = hartmann_values(&set.select(&order).unwrap()).unwrap();
        for (k, &i) in order.iter().enumerate() {
            assert!((w[k] - v[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn robustness_cases() {
        let k10 = Graph::complete(10).unwrap();
        assert_eq!(robustness(&k10, Removal::Targeted, 0.8, 1, 0).unwrap(), 1.0);
        assert_eq!(robustness(&k10, Removal::Random, 0.8, 5, 0).unwrap(), 1.0);
        let star = Graph::star(4).unwrap();
        assert_eq!(robustness(&star, Removal::Targeted, 0.2, 1, 0).unwrap(), 0.25);
        assert!(robustness(&star, Removal::Targeted, 0.0, 1, 0).is_err());
        assert!(robustness(&Graph::empty(2).unwrap(), Removal::Targeted, 0.9, 1, 0).is_err());
        assert!(robustness(&star, Removal::Random, 0.5, 0, 0).is_err());
    }

    #[test]
    fn targeted_ties_break_by_index() {
        // path 0-1-2-3: nodes 1 and 2 tie on degree; removing one node takes 1
        let p = Graph::path(4).unwrap();
        assert_eq!(robustness(&p, Removal::Targeted, 0.25, 1, 0).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn random_removal_is_seeded_and_bounded() {
        let g = generate_er(30, 0.2, 4).unwrap();
        let a = robustness(&g, Removal::Random, 0.8, 50, 9).unwrap();
        assert_eq!(a, robustness(&g, Removal::Random, 0.8, 50, 9).unwrap());
        assert!((1.0 / 6.0..=1.0).contains(&a));
    }

    #[test]
    fn activity_values() {
        assert!(activity(1.0, 1.0 + std::f64::consts::E).unwrap().abs() < 1e-15);
        assert_eq!(activity(3.0, 4.0).unwrap(), -1.0);
        assert!((activity(0.0, 100.0).unwrap() - 3.605170185988091).abs() < 1e-12);
        assert!(activity(4.0, 4.0).is_err());
    }
}
