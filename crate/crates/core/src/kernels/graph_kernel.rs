//! Base and deep graphlet kernels, cosine normalization, and the bank of
//! normalized graph kernels over a candidate set for every `(w, d)` grid
//! point.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embedding::{train_embeddings, EmbeddingModel, SkipGramConfig, GRID_VALUES};
use super::graphlet::{check_size, node_sentences, sample_graphlets, GraphletId};
use crate::error::{GboError, Result};
use crate::graph::CandidateSet;
use crate::rng;

/// `<psi_a, psi_b>`.
pub fn base_graphlet_kernel(psi_a: &[f64], psi_b: &[f64]) -> Result<f64> {
    if psi_a.len() != psi_b.len() {
        return Err(GboError::DimensionMismatch { expected: psi_a.len(), actual: psi_b.len() });
    }
    Ok(psi_a.iter().zip(psi_b).map(|(a, b)| a * b).sum())
}

/// `psi_a^T diag(m) psi_b`.
pub fn deep_graphlet_kernel(psi_a: &[f64], psi_b: &[f64], m_diag: &[f64]) -> Result<f64> {
    if psi_a.len() != psi_b.len() {
        return Err(GboError::DimensionMismatch { expected: psi_a.len(), actual: psi_b.len() });
    }
    if m_diag.len() != psi_a.len() {
        return Err(GboError::DimensionMismatch { expected: psi_a.len(), actual: m_diag.len() });
    }
    Ok(psi_a.iter().zip(psi_b).zip(m_diag).map(|((a, b), m)| a * m * b).sum())
}

/// `K_ij / sqrt(K_ii K_jj)` with the diagonal set to exactly 1.
pub fn normalize_kernel(raw: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = raw.len();
    if let Some(row) = raw.iter().find(|r| r.len() != n) {
        return Err(GboError::DimensionMismatch { expected: n, actual: row.len() });
    }
    let diag: Vec<f64> = (0..n).map(|i| raw[i][i]).collect();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(GboError::DegenerateGraph(format!("#{i}")));
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { raw[i][j] / (diag[i].sqrt() * diag[j].sqrt()) })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelVariant {
    /// Graphlet frequencies reweighted by embedding norms.
    #[default]
    Deep,
    /// Plain graphlet frequency dot product.
    Base,
}

fn default_k() -> usize {
    4
}
fn default_samples() -> usize {
    500
}
fn default_per_node() -> usize {
    10
}
pub fn default_grid() -> Vec<(usize, usize)> {
    GRID_VALUES
        .iter()
        .flat_map(|&w| GRID_VALUES.iter().map(move |&d| (w, d)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphKernelConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    /// Graphlets drawn per graph (per part when partitioned).
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Sentence length of node-rooted embedding corpus sentences.
    #[serde(default = "default_per_node")]
    pub samples_per_node: usize,
    /// `(window, dimension)` pairs.
    #[serde(default = "default_grid")]
    pub grid: Vec<(usize, usize)>,
    #[serde(default)]
    pub variant: KernelVariant,
    #[serde(default)]
    pub seed: u64,
}

impl Default for GraphKernelConfig {
    fn default() -> Self {
        GraphKernelConfig {
            k: default_k(),
            samples: default_samples(),
            samples_per_node: default_per_node(),
            grid: default_grid(),
            variant: KernelVariant::Deep,
            seed: 0,
        }
    }
}

/// Graphlet vocabulary and per-graph relative frequency vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphletProfile {
    pub k: usize,
    pub vocab: Vec<GraphletId>,
    pub psi: Vec<Vec<f64>>,
}

impl GraphletProfile {
    pub fn index_of(&self, id: GraphletId) -> Option<usize> {
        self.vocab.binary_search(&id).ok()
    }
}

/// Per-grid-point normalized graph kernel over a fixed candidate set.
#[derive(Debug, Clone)]
enum GramSource {
    /// Rows of `sqrt(M) psi / |sqrt(M) psi|`; the kernel is their dot product.
    Features(Vec<Vec<f64>>),
    /// Explicit row-major `n x n` matrix.
    Dense(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct GraphKernelBank {
    n: usize,
    grid: Vec<(usize, usize)>,
    sources: Vec<GramSource>,
    profile: Option<GraphletProfile>,
    models: Vec<Option<EmbeddingModel>>,
}

impl GraphKernelBank {
    /// Samples graphlet profiles for every candidate and, for the deep
    /// variant, trains one embedding model per grid point on the node-rooted
    /// corpus. `partition` switches profile sampling to per-part draws.
    pub fn build(
        candidates: &CandidateSet,
        config: &GraphKernelConfig,
        partition: Option<&[Vec<usize>]>,
    ) -> Result<Self> {
        check_size(config.k)?;
        if config.grid.is_empty() {
            return Err(GboError::Config("kernel grid is empty".into()));
        }
        let profile_seed = rng::derive_seed(config.seed, rng::label("graphlet-profile"));
        let counts = candidates
            .graphs()
            .par_iter()
            .enumerate()
            .map(|(i, g)| sample_graphlets(g, config.k, config.samples, rng::derive_seed(profile_seed, i as u64), partition))
            .collect::<Result<Vec<_>>>()?;

        let corpus_ids: Vec<Vec<GraphletId>> = match config.variant {
            KernelVariant::Base => Vec::new(),
            KernelVariant::Deep => {
                let corpus_seed = rng::derive_seed(config.seed, rng::label("corpus"));
                let per_graph = candidates
                    .graphs()
                    .par_iter()
                    .enumerate()
                    .map(|(i, g)| node_sentences(g, config.k, config.samples_per_node, rng::derive_seed(corpus_seed, i as u64)))
                    .collect::<Result<Vec<_>>>()?;
                per_graph.into_iter().flatten().collect()
            }
        };

        let vocab: Vec<GraphletId> = counts
            .iter()
            .flat_map(|c| c.counts.keys().copied())
            .chain(corpus_ids.iter().flatten().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<GraphletId, usize> = vocab.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let psi: Vec<Vec<f64>> = counts
            .iter()
            .map(|c| {
                let mut v = vec![0.0; vocab.len()];
                for (&id, &count) in &c.counts {
                    v[index[&id]] = count as f64 / c.total as f64;
                }
                v
            })
            .collect();
        let profile = GraphletProfile { k: config.k, vocab, psi };

        let (grid, m_diags, models) = match config.variant {
            KernelVariant::Base => (vec![config.grid[0]], vec![vec![1.0; profile.vocab.len()]], vec![None]),
            KernelVariant::Deep => {
                let sentences: Vec<Vec<usize>> = corpus_ids
                    .iter()
                    .map(|s| s.iter().map(|id| index[id]).collect())
                    .collect();
                let embed_seed = rng::derive_seed(config.seed, rng::label("skipgram"));
                let models = config
                    .grid
                    .par_iter()
                    .map(|&(w, d)| {
                        let cfg = SkipGramConfig::new(w, d, rng::derive_seed(embed_seed, (w * 1000 + d) as u64));
                        train_embeddings(&sentences, profile.vocab.len(), &cfg)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let diags = models.iter().map(|m| m.m_diag.clone()).collect();
                (config.grid.clone(), diags, models.into_iter().map(Some).collect())
            }
        };
        let sources = m_diags
            .iter()
            .map(|m| feature_rows(&profile.psi, m, candidates.ids()).map(GramSource::Features))
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphKernelBank {
            n: candidates.len(),
            grid,
            sources,
            profile: Some(profile),
            models,
        })
    }

    /// Bank from explicit normalized Gram matrices (row-major `n x n`), e.g.
    /// loaded from a kernel cache.
    pub fn from_dense(n: usize, entries: Vec<((usize, usize), Vec<f64>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(GboError::param("no graph kernel matrices"));
        }
        let mut grid = Vec::new();
        let mut sources = Vec::new();
        for (point, m) in entries {
            if m.len() != n * n {
                return Err(GboError::DimensionMismatch { expected: n * n, actual: m.len() });
            }
            grid.push(point);
            sources.push(GramSource::Dense(m));
        }
        let models = vec![None; grid.len()];
        Ok(GraphKernelBank { n, grid, sources, profile: None, models })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn grid(&self) -> &[(usize, usize)] {
        &self.grid
    }

    pub fn profile(&self) -> Option<&GraphletProfile> {
        self.profile.as_ref()
    }

    pub fn model(&self, grid_index: usize) -> Option<&EmbeddingModel> {
        self.models[grid_index].as_ref()
    }

    pub fn grid_index(&self, w: usize, d: usize) -> Option<usize> {
        self.grid.iter().position(|&p| p == (w, d))
    }

    /// Normalized graph kernel between candidates `i` and `j`.
    #[inline]
    pub fn value(&self, grid_index: usize, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        match &self.sources[grid_index] {
            GramSource::Features(rows) => rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum(),
            GramSource::Dense(m) => m[i * self.n + j],
        }
    }

    /// Full `n x n` normalized matrix for one grid point.
    pub fn dense(&self, grid_index: usize) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.value(grid_index, i, j);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }
}

fn feature_rows(psi: &[Vec<f64>], m_diag: &[f64], ids: &[String]) -> Result<Vec<Vec<f64>>> {
    let scale: Vec<f64> = m_diag.iter().map(|m| m.max(0.0).sqrt()).collect();
    psi.iter()
        .zip(ids)
        .map(|(p, id)| {
            let row: Vec<f64> = p.iter().zip(&scale).map(|(x, s)| x * s).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(GboError::DegenerateGraph(id.clone()));
            }
            Ok(row.into_iter().map(|x| x / norm).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_er, synth_dataset, Graph, SynthSpec};
    use crate::kernels::graphlet::graphlet_census;
    use rand::Rng as _;

    #[test]
    fn base_kernel_cases() {
        assert_eq!(base_graphlet_kernel(&[0.0, 1.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(base_graphlet_kernel(&[0.5, 0.5, 0.0], &[0.0, 0.0, 1.0]).unwrap(), 0.0);
        assert!(base_graphlet_kernel(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn kernels_match_naive_summation() {
        let mut r = rng::rng(4);
        for _ in 0..20 {
            let n = r.random_range(1..15);
            let a: Vec<f64> = (0..n).map(|_| r.random()).collect();
            let b: Vec<f64> = (0..n).map(|_| r.random()).collect();
            let m: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 3.0).collect();
            let mut dot = 0.0;
            let mut triple = 0.0;
            for i in 0..n {
                dot += a[i] * b[i];
                triple += a[i] * m[i] * b[i];
            }
            assert!((base_graphlet_kernel(&a, &b).unwrap() - dot).abs() < 1e-12);
            assert!((deep_graphlet_kernel(&a, &b, &m).unwrap() - triple).abs() < 1e-12);
            let ones = vec![1.0; n];
            assert_eq!(deep_graphlet_kernel(&a, &b, &ones).unwrap(), base_graphlet_kernel(&a, &b).unwrap());
            assert_eq!(deep_graphlet_kernel(&a, &b, &vec![0.0; n]).unwrap(), 0.0);
        }
        assert!(deep_graphlet_kernel(&[1.0], &[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn normalization() {
        let mut r = rng::rng(8);
        // random PSD 3x3 as A A^T
        let a: Vec<Vec<f64>> = (0..3).map(|_| (0..4).map(|_| r.random::<f64>()).collect()).collect();
        let k: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| (0..4).map(|t| a[i][t] * a[j][t]).sum()).collect())
            .collect();
        let nk = normalize_kernel(&k).unwrap();
        for i in 0..3 {
            assert_eq!(nk[i][i], 1.0);
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { k[i][j] / (k[i][i] * k[j][j]).sqrt() };
                assert!((nk[i][j] - expected).abs() < 1e-12);
                assert_eq!(nk[i][j], nk[j][i]);
            }
        }
        assert!(matches!(
            normalize_kernel(&[vec![1.0, 0.0], vec![0.0, 0.0]]),
            Err(GboError::DegenerateGraph(_))
        ));
    }

    #[test]
    fn relabeled_copy_has_unit_kernel_under_census() {
        let g = generate_er(10, 0.4, 3).unwrap();
        let h = g.relabel(&[9, 3, 5, 0, 1, 8, 2, 7, 4, 6]).unwrap();
        let a = graphlet_census(&g, 4).unwrap();
        let b = graphlet_census(&h, 4).unwrap();
        assert_eq!(a, b);
        let ids: Vec<_> = a.counts.keys().copied().collect();
        let pa: Vec<f64> = ids.iter().map(|&i| a.frequency(i)).collect();
        let pb: Vec<f64> = ids.iter().map(|&i| b.frequency(i)).collect();
        let raw = vec![
            vec![base_graphlet_kernel(&pa, &pa).unwrap(), base_graphlet_kernel(&pa, &pb).unwrap()],
            vec![base_graphlet_kernel(&pb, &pa).unwrap(), base_graphlet_kernel(&pb, &pb).unwrap()],
        ];
        let nk = normalize_kernel(&raw).unwrap();
        assert!((nk[0][1] - 1.0).abs() < 1e-12);
    }

    fn small_set() -> CandidateSet {
        synth_dataset(&SynthSpec {
            nodes: vec![10, 14],
            edge_probs: vec![0.2, 0.4],
            ba_edges: vec![1, 3],
            count_per_family: 4,
            seed: 2,
        })
        .unwrap()
    }

    #[test]
    fn bank_matches_direct_deep_kernel() {
        let set = small_set();
        let cfg = GraphKernelConfig {
            samples: 200,
            grid: vec![(2, 5), (5, 2)],
            ..Default::default()
        };
        let bank = GraphKernelBank::build(&set, &cfg, None).unwrap();
        let profile = bank.profile().unwrap();
        for g in 0..2 {
            let m = &bank.model(g).unwrap().m_diag;
            let raw: Vec<Vec<f64>> = profile
                .psi
                .iter()
                .map(|a| profile.psi.iter().map(|b| deep_graphlet_kernel(a, b, m).unwrap()).collect())
                .collect();
            let nk = normalize_kernel(&raw).unwrap();
            for i in 0..set.len() {
                assert_eq!(bank.value(g, i, i), 1.0);
                for j in 0..set.len() {
                    assert!((bank.value(g, i, j) - nk[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn base_variant_has_single_grid_point() {
        let set = small_set();
        let cfg = GraphKernelConfig { variant: KernelVariant::Base, samples: 100, ..Default::default() };
        let bank = GraphKernelBank::build(&set, &cfg, None).unwrap();
        assert_eq!(bank.grid().len(), 1);
        assert!(bank.model(0).is_none());
    }

    #[test]
    fn tiny_graphs_do_not_degenerate() {
        let set = CandidateSet::from_graphs(vec![Graph::empty(1).unwrap(), Graph::complete(2).unwrap()]).unwrap();
        let cfg = GraphKernelConfig { samples: 10, grid: vec![(2, 2)], ..Default::default() };
        let bank = GraphKernelBank::build(&set, &cfg, None).unwrap();
        assert!(bank.value(0, 0, 1).abs() < 1e-12);
    }
}
