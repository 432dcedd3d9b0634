use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{CandidateSet, Graph};
use crate::error::{GboError, Result};
use crate::rng;

/// Erdős–Rényi G(n, p): each unordered pair is an edge independently with
/// probability `p`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(GboError::param("ER graph needs n >= 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GboError::param(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = rng::rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges)
}

/// Barabási–Albert preferential attachment. Growth starts from `m`
/// isolated nodes; the first added node links to all of them, every later
/// node links to `m` distinct targets drawn proportionally to degree.
pub fn generate_ba(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m == 0 || m >= n {
        return Err(GboError::param(format!("BA graph needs 1 <= m < n (m={m}, n={n})")));
    }
    let mut rng = rng::rng(seed);
    let mut edges = Vec::with_capacity((n - m) * m);
    // each node appears once per incident edge
    let mut repeated: Vec<usize> = Vec::with_capacity(2 * (n - m) * m);
    let mut targets: Vec<usize> = (0..m).collect();
    for source in m..n {
        for &t in &targets {
            edges.push((source, t));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat_n(source, m));
        let mut chosen = Vec::with_capacity(m);
        while chosen.len() < m {
            let candidate = repeated[rng.random_range(0..repeated.len())];
            if !chosen.contains(&candidate) {
                chosen.push(candidate);
            }
        }
        targets = chosen;
    }
    Graph::new(n, edges)
}

/// Parameter lists for a mixed ER/BA synthetic candidate set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub nodes: Vec<usize>,
    pub edge_probs: Vec<f64>,
    pub ba_edges: Vec<usize>,
    pub count_per_family: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    /// 250 ER + 250 BA graphs over the standard parameter lists.
    pub fn standard(seed: u64) -> Self {
        SynthSpec {
            nodes: vec![20, 30, 40, 50, 60],
            edge_probs: vec![0.1, 0.15, 0.2, 0.25, 0.3],
            ba_edges: vec![1, 2, 3, 4, 5],
            count_per_family: 250,
            seed,
        }
    }
}

/// Half ER, half BA. Graph `i` of a family takes node count
/// `nodes[i % N]` and its second parameter from `list[(i / N) % L]`, so the
/// full cross product is cycled.
pub fn synth_dataset(spec: &SynthSpec) -> Result<CandidateSet> {
    if spec.nodes.is_empty() || spec.edge_probs.is_empty() || spec.ba_edges.is_empty() {
        return Err(GboError::param("synthetic spec needs non-empty parameter lists"));
    }
    let count = spec.count_per_family;
    let n_len = spec.nodes.len();
    let mut ids = Vec::with_capacity(2 * count);
    let mut graphs = Vec::with_capacity(2 * count);
    let er_seed = rng::derive_seed(spec.seed, rng::label("er"));
    let ba_seed = rng::derive_seed(spec.seed, rng::label("ba"));
    for i in 0..count {
        let n = spec.nodes[i % n_len];
        let p = spec.edge_probs[(i / n_len) % spec.edge_probs.len()];
        graphs.push(generate_er(n, p, rng::derive_seed(er_seed, i as u64))?);
        ids.push(format!("er-{i}"));
    }
    for i in 0..count {
        let n = spec.nodes[i % n_len];
        let m = spec.ba_edges[(i / n_len) % spec.ba_edges.len()];
        graphs.push(generate_ba(n, m, rng::derive_seed(ba_seed, i as u64))?);
        ids.push(format!("ba-{i}"));
    }
    CandidateSet::new(ids, graphs)
}

/// `k` distinct indices out of `0..n`, in sampled order.
pub(crate) fn sample_distinct(rng: &mut rng::Rng, n: usize, k: usize) -> Vec<usize> {
    index::sample(rng, n, k).into_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_extremes() {
        assert_eq!(generate_er(5, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(generate_er(5, 1.0, 1).unwrap().edge_count(), 10);
        assert!(generate_er(5, 1.5, 1).is_err());
        assert!(generate_er(5, -0.1, 1).is_err());
    }

    #[test]
    fn er_edge_count_within_three_sigma() {
        // Binomial(C(40,2), 0.2): mean 156, sd sqrt(780 * 0.2 * 0.8)
        let g = generate_er(40, 0.2, 7).unwrap();
        let mean = 780.0 * 0.2;
        let sd = (780.0 * 0.2 * 0.8f64).sqrt();
        assert!((g.edge_count() as f64 - mean).abs() <= 3.0 * sd, "{}", g.edge_count());
    }

    #[test]
    fn ba_structure() {
        let tree = generate_ba(20, 1, 3).unwrap();
        assert_eq!(tree.edge_count(), 19);
        assert_eq!(tree.largest_component_size(), 20);
        assert_eq!(generate_ba(50, 5, 3).unwrap().edge_count(), 225);
        assert!(generate_ba(5, 5, 3).is_err());
        assert!(generate_ba(5, 0, 3).is_err());
    }

    #[test]
    fn ba_is_heavy_tailed() {
        let g = generate_ba(60, 3, 9).unwrap();
        let degrees: Vec<usize> = (0..60).map(|v| g.degree(v)).collect();
        let mean = degrees.iter().sum::<usize>() as f64 / 60.0;
        let max = *degrees.iter().max().unwrap() as f64;
        assert!(max >= 3.0 * mean, "max {max} mean {mean}");
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(generate_er(30, 0.2, 11).unwrap(), generate_er(30, 0.2, 11).unwrap());
        assert_eq!(generate_ba(30, 2, 11).unwrap(), generate_ba(30, 2, 11).unwrap());
        assert_ne!(generate_er(30, 0.2, 11).unwrap(), generate_er(30, 0.2, 12).unwrap());
    }

    #[test]
    fn synth_counts() {
        let spec = SynthSpec {
            nodes: vec![10],
            edge_probs: vec![0.2],
            ba_edges: vec![2],
            count_per_family: 2,
            seed: 0,
        };
        let set = synth_dataset(&spec).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.ids(), &["er-0", "er-1", "ba-0", "ba-1"]);
    }

    #[test]
    fn standard_dataset_matches_reported_size() {
        let set = synth_dataset(&SynthSpec::standard(0)).unwrap();
        assert_eq!(set.len(), 500);
        let nodes = set.graphs().iter().map(|g| g.node_count()).sum::<usize>() as f64 / 500.0;
        let edges = set.graphs().iter().map(|g| g.edge_count()).sum::<usize>() as f64 / 500.0;
        assert!((nodes - 39.8).abs() <= 0.5, "mean nodes {nodes}");
        assert!((edges - 141.5).abs() <= 0.1 * 141.5, "mean edges {edges}");
    }
}
