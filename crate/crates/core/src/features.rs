//! Explicit per-graph features, min-max normalization and feature groups.
//!
//! Centralities use the normalized definitions, so every topological feature
//! other than the raw node and edge counts lies in `[0, 1]` before scaling.
//! On disconnected graphs betweenness counts only connected pairs and
//! closeness uses the reachable-set variant scaled by the reachable fraction
//! (unreachable pairs contribute nothing).

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GboError, Result};
use crate::graph::{CandidateSet, Graph};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Feature {
    NodeCount,
    EdgeCount,
    AvgDegreeCentrality,
    AvgBetweenness,
    AvgCloseness,
    AvgClustering,
    /// Graph attribute `<name>`, or the fraction of nodes carrying integer
    /// tag `<name>` when no such attribute exists.
    Tag(String),
    /// Seeded uniform noise, independent of the graph.
    RandomUnrelated,
}

impl FromStr for Feature {
    type Err = GboError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "node_count" => Feature::NodeCount,
            "edge_count" => Feature::EdgeCount,
            "avg_degree_centrality" => Feature::AvgDegreeCentrality,
            "avg_betweenness" => Feature::AvgBetweenness,
            "avg_closeness" => Feature::AvgCloseness,
            "avg_clustering" => Feature::AvgClustering,
            "random_unrelated" => Feature::RandomUnrelated,
            other => match other.strip_prefix("tag:") {
                Some(name) if !name.is_empty() => Feature::Tag(name.to_string()),
                _ => return Err(GboError::UnknownFeature(other.to_string())),
            },
        })
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::NodeCount => f.write_str("node_count"),
            Feature::EdgeCount => f.write_str("edge_count"),
            Feature::AvgDegreeCentrality => f.write_str("avg_degree_centrality"),
            Feature::AvgBetweenness => f.write_str("avg_betweenness"),
            Feature::AvgCloseness => f.write_str("avg_closeness"),
            Feature::AvgClustering => f.write_str("avg_clustering"),
            Feature::Tag(name) => write!(f, "tag:{name}"),
            Feature::RandomUnrelated => f.write_str("random_unrelated"),
        }
    }
}

/// Evaluates a fixed list of features. `seed` drives `random_unrelated`.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    features: Vec<Feature>,
    seed: u64,
}

impl FeatureExtractor {
    pub fn new(names: &[impl AsRef<str>], seed: u64) -> Result<Self> {
        let features = names
            .iter()
            .map(|n| n.as_ref().parse())
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureExtractor { features, seed })
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    /// Feature vector of `graph`, which sits at position `index` of its
    /// candidate set (only `random_unrelated` depends on the index).
    pub fn extract(&self, graph: &Graph, index: usize) -> Result<Vec<f64>> {
        let mut betweenness = None;
        self.features
            .iter()
            .map(|f| {
                Ok(match f {
                    Feature::NodeCount => graph.node_count() as f64,
                    Feature::EdgeCount => graph.edge_count() as f64,
                    Feature::AvgDegreeCentrality => mean(&degree_centrality(graph)),
                    Feature::AvgBetweenness => {
                        *betweenness.get_or_insert_with(|| mean(&betweenness_centrality(graph)))
                    }
                    Feature::AvgCloseness => mean(&closeness_centrality(graph)),
                    Feature::AvgClustering => mean(&clustering(graph)),
                    Feature::Tag(name) => tag_value(graph, name)?,
                    Feature::RandomUnrelated => {
                        rng::derive_rng(self.seed, index as u64).random::<f64>()
                    }
                })
            })
            .collect()
    }
}

fn tag_value(graph: &Graph, name: &str) -> Result<f64> {
    if let Some(v) = graph.attr(name) {
        return Ok(v);
    }
    let tag: i64 = name
        .parse()
        .map_err(|_| GboError::UnknownFeature(format!("tag:{name} (no such graph attribute)")))?;
    let hits = graph.node_tags().values().filter(|&&t| t == tag).count();
    Ok(hits as f64 / graph.node_count() as f64)
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

pub fn degree_centrality(graph: &Graph) -> Vec<f64> {
    let n = graph.node_count();
    if n <= 1 {
        return vec![1.0; n];
    }
    (0..n).map(|v| graph.degree(v) as f64 / (n - 1) as f64).collect()
}

/// Brandes' algorithm, normalized by `(n-1)(n-2)/2` (pairs not containing
/// the node).
pub fn betweenness_centrality(graph: &Graph) -> Vec<f64> {
    let n = graph.node_count();
    let mut bc = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for s in 0..n {
        sigma.fill(0.0);
        dist.fill(usize::MAX);
        delta.fill(0.0);
        preds.iter_mut().for_each(Vec::clear);
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in graph.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    // every unordered pair was accumulated from both endpoints
    let scale = if n > 2 { 1.0 / ((n - 1) * (n - 2)) as f64 } else { 0.0 };
    bc.iter_mut().for_each(|b| *b *= scale);
    bc
}

fn bfs_distances(graph: &Graph, source: usize, dist: &mut [usize], queue: &mut VecDeque<usize>) {
    dist.fill(usize::MAX);
    dist[source] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        for &w in graph.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
}

/// `(r-1)/Σd · (r-1)/(n-1)` where `r` counts nodes reachable from the node
/// (itself included).
pub fn closeness_centrality(graph: &Graph) -> Vec<f64> {
    let n = graph.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    (0..n)
        .map(|s| {
            bfs_distances(graph, s, &mut dist, &mut queue);
            let (reach, total) = dist
                .iter()
                .filter(|&&d| d != usize::MAX)
                .fold((0usize, 0usize), |(r, t), &d| (r + 1, t + d));
            if total == 0 || n <= 1 {
                0.0
            } else {
                let r = (reach - 1) as f64;
                (r / total as f64) * (r / (n - 1) as f64)
            }
        })
        .collect()
}

/// Local clustering coefficients; nodes of degree < 2 score 0.
pub fn clustering(graph: &Graph) -> Vec<f64> {
    (0..graph.node_count())
        .map(|v| {
            let nb = graph.neighbors(v);
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if graph.has_edge(a, b) {
                        links += 1;
                    }
                }
            }
            2.0 * links as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

/// Column-wise min-max scaling to `[0, 1]`; constant columns map to 0.
pub fn normalize(raw: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(first) = raw.first() else {
        return Vec::new();
    };
    let dims = first.len();
    let mut lo = vec![f64::INFINITY; dims];
    let mut hi = vec![f64::NEG_INFINITY; dims];
    for row in raw {
        for (j, &x) in row.iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    raw.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &x)| {
                    let span = hi[j] - lo[j];
                    if span > 0.0 {
                        ((x - lo[j]) / span).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// One named group of features as it appears in an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroupSpec {
    pub name: String,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGroup {
    pub name: String,
    pub feature_names: Vec<String>,
    /// Normalized vectors, one per candidate.
    pub values: Vec<Vec<f64>>,
}

impl FeatureGroup {
    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }
}

/// Normalized explicit features, grouped. Each group gets its own SEARD
/// kernel and weight.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureGroups {
    pub groups: Vec<FeatureGroup>,
}

impl FeatureGroups {
    /// Extracts and normalizes every group over the whole candidate set.
    pub fn extract(candidates: &CandidateSet, specs: &[FeatureGroupSpec], seed: u64) -> Result<Self> {
        let groups = specs
            .iter()
            .map(|spec| {
                if spec.features.is_empty() {
                    return Err(GboError::Config(format!("feature group `{}` is empty", spec.name)));
                }
                let extractor = FeatureExtractor::new(&spec.features, seed)?;
                let raw = candidates
                    .graphs()
                    .par_iter()
                    .enumerate()
                    .map(|(i, g)| extractor.extract(g, i))
                    .collect::<Result<Vec<_>>>()?;
                Ok(FeatureGroup {
                    name: spec.name.clone(),
                    feature_names: extractor.features().iter().map(ToString::to_string).collect(),
                    values: normalize(&raw),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureGroups { groups })
    }

    /// Wraps already-normalized data.
    pub fn from_values(groups: Vec<(String, Vec<Vec<f64>>)>) -> Result<Self> {
        let groups = groups
            .into_iter()
            .map(|(name, values)| {
                let dim = values.first().map_or(0, Vec::len);
                if let Some(bad) = values.iter().find(|v| v.len() != dim) {
                    return Err(GboError::DimensionMismatch { expected: dim, actual: bad.len() });
                }
                Ok(FeatureGroup {
                    feature_names: (0..dim).map(|i| format!("{name}_{i}")).collect(),
                    name,
                    values,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureGroups { groups })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.groups.iter().map(FeatureGroup::dim).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_ba, generate_er};
    use proptest::prelude::*;

    fn extract(g: &Graph, name: &str) -> f64 {
        FeatureExtractor::new(&[name], 0).unwrap().extract(g, 0).unwrap()[0]
    }

    #[test]
    fn complete_graph_degree_centrality() {
        assert_eq!(extract(&Graph::complete(4).unwrap(), "avg_degree_centrality"), 1.0);
    }

    /// Brute-force betweenness: enumerate every shortest path between every
    /// pair through BFS-layered path counting on tiny graphs.
    fn brute_betweenness(g: &Graph) -> Vec<f64> {
        let n = g.node_count();
        let mut dist = vec![vec![usize::MAX; n]; n];
        let mut q = VecDeque::new();
        for s in 0..n {
            bfs_distances(g, s, &mut dist[s], &mut q);
        }
        // number of shortest s-t paths
        let count = |s: usize, t: usize| -> f64 {
            fn rec(g: &Graph, dist: &[Vec<usize>], v: usize, t: usize) -> f64 {
                if v == t {
                    return 1.0;
                }
                g.neighbors(v)
                    .iter()
                    .filter(|&&w| dist[w][t] != usize::MAX && dist[w][t] + 1 == dist[v][t])
                    .map(|&w| rec(g, dist, w, t))
                    .sum()
            }
            rec(g, &dist, s, t)
        };
        let mut bc = vec![0.0; n];
        for s in 0..n {
            for t in s + 1..n {
                if dist[s][t] == usize::MAX {
                    continue;
                }
                let total = count(s, t);
                for v in 0..n {
                    if v != s && v != t && dist[s][v] != usize::MAX && dist[s][v] + dist[v][t] == dist[s][t] {
                        bc[v] += count(s, v) * count(v, t) / total;
                    }
                }
            }
        }
        let pairs = ((n - 1) * (n - 2)) as f64 / 2.0;
        bc.iter().map(|b| b / pairs).collect()
    }

    #[test]
    fn path_betweenness_is_one_third() {
        let p3 = Graph::path(3).unwrap();
        assert!((extract(&p3, "avg_betweenness") - 1.0 / 3.0).abs() < 1e-12);
        assert!((mean(&brute_betweenness(&p3)) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn betweenness_matches_brute_force() {
        for seed in 0..5 {
            let g = generate_er(9, 0.3, seed).unwrap();
            let fast = betweenness_centrality(&g);
            let slow = brute_betweenness(&g);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "{fast:?} vs {slow:?}");
            }
        }
    }

    #[test]
    fn triangle_clustering() {
        assert_eq!(extract(&Graph::complete(3).unwrap(), "avg_clustering"), 1.0);
        assert_eq!(extract(&Graph::path(3).unwrap(), "avg_clustering"), 0.0);
    }

    #[test]
    fn closeness_on_disconnected_graph() {
        // two disjoint edges: each node reaches one other at distance 1
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let c = closeness_centrality(&g);
        for v in c {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(closeness_centrality(&Graph::empty(3).unwrap()), vec![0.0; 3]);
        assert_eq!(closeness_centrality(&Graph::complete(5).unwrap()), vec![1.0; 5]);
    }

    #[test]
    fn tags_and_unknown_features() {
        let g = Graph::path(4).unwrap().with_tag(0, 2).unwrap().with_tag(1, 2).unwrap().with_attr("cost", 3.5);
        assert_eq!(extract(&g, "tag:cost"), 3.5);
        assert_eq!(extract(&g, "tag:2"), 0.5);
        assert!(FeatureExtractor::new(&["tag:missing"], 0).unwrap().extract(&g, 0).is_err());
        assert!(matches!(FeatureExtractor::new(&["diameter"], 0), Err(GboError::UnknownFeature(_))));
    }

    #[test]
    fn random_feature_is_reproducible() {
        let g = Graph::path(4).unwrap();
        let a = FeatureExtractor::new(&["random_unrelated"], 9).unwrap();
        let b = FeatureExtractor::new(&["random_unrelated"], 9).unwrap();
        assert_eq!(a.extract(&g, 3).unwrap(), b.extract(&g, 3).unwrap());
        assert_ne!(a.extract(&g, 3).unwrap(), a.extract(&g, 4).unwrap());
    }

    #[test]
    fn normalize_columns() {
        let out = normalize(&[vec![2.0, 5.0], vec![4.0, 5.0], vec![6.0, 5.0]]);
        assert_eq!(out, vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0]]);
    }

    const TOPOLOGICAL: [&str; 6] = [
        "node_count",
        "edge_count",
        "avg_degree_centrality",
        "avg_betweenness",
        "avg_closeness",
        "avg_clustering",
    ];

    proptest! {
        #[test]
        fn features_are_permutation_invariant(seed in 0u64..1000, n in 3usize..14, shift in 1usize..13) {
            let g = if seed % 2 == 0 {
                generate_er(n, 0.3, seed).unwrap()
            } else {
                generate_ba(n, 2.min(n - 1), seed).unwrap()
            };
            // rotate then reverse
            let perm: Vec<usize> = (0..n).map(|v| n - 1 - (v + shift) % n).collect();
            let h = g.relabel(&perm).unwrap();
            let ex = FeatureExtractor::new(&TOPOLOGICAL, 0).unwrap();
            let a = ex.extract(&g, 0).unwrap();
            let b = ex.extract(&h, 0).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn normalize_is_idempotent(rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..20)) {
            let once = normalize(&rows);
            let twice = normalize(&once);
            for (a, b) in once.iter().flatten().zip(twice.iter().flatten()) {
                prop_assert!((0.0..=1.0).contains(a));
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
