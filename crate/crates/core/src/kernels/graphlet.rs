//! Graphlet sampling and canonical forms.
//!
//! A graphlet on `k` nodes is encoded as an adjacency bit mask over the
//! `C(k,2)` node pairs taken in lexicographic order; its canonical id is the
//! smallest mask reachable by permuting the nodes. Masks fit in 15 bits for
//! `k <= 6`, so the id for every possible mask is tabulated once per `k`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{GboError, Result};
use crate::graph::Graph;
use crate::rng;

pub const MIN_GRAPHLET_SIZE: usize = 3;
pub const MAX_GRAPHLET_SIZE: usize = 6;

/// Canonical adjacency mask of a graphlet.
pub type GraphletId = u16;

static TABLES: [OnceLock<Vec<GraphletId>>; MAX_GRAPHLET_SIZE + 1] =
    [const { OnceLock::new() }; MAX_GRAPHLET_SIZE + 1];

pub(crate) fn check_size(k: usize) -> Result<()> {
    if (MIN_GRAPHLET_SIZE..=MAX_GRAPHLET_SIZE).contains(&k) {
        Ok(())
    } else {
        Err(GboError::param(format!(
            "graphlet size {k} outside [{MIN_GRAPHLET_SIZE}, {MAX_GRAPHLET_SIZE}]"
        )))
    }
}

fn pair_bit(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    // pairs (a, b) with a < i come first
    i * (2 * k - i - 1) / 2 + (j - i - 1)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn heap(a: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..n - 1 {
            heap(a, n - 1, out);
            if n % 2 == 0 {
                a.swap(i, n - 1);
            } else {
                a.swap(0, n - 1);
            }
        }
        heap(a, n - 1, out);
    }
    let mut out = Vec::new();
    heap(&mut (0..k).collect(), k, &mut out);
    out
}

fn build_table(k: usize) -> Vec<GraphletId> {
    let bits = k * (k - 1) / 2;
    let perms = permutations(k);
    // bit b of a mask moves to bit_map[p][b] under permutation p
    let bit_maps: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| {
            let mut map = vec![0; bits];
            for i in 0..k {
                for j in i + 1..k {
                    map[pair_bit(k, i, j)] = pair_bit(k, p[i], p[j]);
                }
            }
            map
        })
        .collect();
    let size = 1usize << bits;
    let mut table = vec![GraphletId::MAX; size];
    // masks are visited in increasing order, so the first unassigned mask of
    // an orbit is its minimum
    for mask in 0..size {
        if table[mask] != GraphletId::MAX {
            continue;
        }
        for map in &bit_maps {
            let mut image = 0usize;
            for (b, &to) in map.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    image |= 1 << to;
                }
            }
            table[image] = mask as GraphletId;
        }
    }
    table
}

fn table(k: usize) -> &'static [GraphletId] {
    TABLES[k].get_or_init(|| build_table(k))
}

/// Canonical id of the graphlet whose adjacency mask is `mask`.
pub fn canonical_form(k: usize, mask: u32) -> Result<GraphletId> {
    check_size(k)?;
    let t = table(k);
    t.get(mask as usize)
        .copied()
        .ok_or_else(|| GboError::param(format!("mask {mask:#x} too wide for k={k}")))
}

/// Adjacency mask of the subgraph induced on `nodes`. Fewer than `k` nodes
/// are padded with isolated nodes.
pub fn induced_mask(graph: &Graph, nodes: &[usize], k: usize) -> u32 {
    let mut mask = 0u32;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if graph.has_edge(nodes[i], nodes[j]) {
                mask |= 1 << pair_bit(k, i, j);
            }
        }
    }
    mask
}

fn canonical_of(graph: &Graph, nodes: &[usize], k: usize) -> GraphletId {
    table(k)[induced_mask(graph, nodes, k) as usize]
}

/// Number of edges of a graphlet id.
pub fn graphlet_edges(id: GraphletId) -> u32 {
    id.count_ones()
}

/// Raw graphlet counts for one graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphletCounts {
    pub counts: BTreeMap<GraphletId, u64>,
    pub total: u64,
}

impl GraphletCounts {
    fn add(&mut self, id: GraphletId) {
        *self.counts.entry(id).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn frequency(&self, id: GraphletId) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.counts.get(&id).copied().unwrap_or(0) as f64 / self.total as f64
        }
    }
}

/// Draws `samples` induced `k`-subgraphs on uniformly chosen distinct
/// nodes. With a partition, each part is sampled `samples` times on its own
/// nodes and the draws are pooled.
pub fn sample_graphlets(
    graph: &Graph,
    k: usize,
    samples: usize,
    seed: u64,
    partition: Option<&[Vec<usize>]>,
) -> Result<GraphletCounts> {
    check_size(k)?;
    if samples == 0 {
        return Err(GboError::param("graphlet sampling needs samples >= 1"));
    }
    let mut rng = rng::rng(seed);
    let mut out = GraphletCounts::default();
    let mut nodes = Vec::with_capacity(k);
    let all: Vec<usize>;
    let parts: Vec<&[usize]> = match partition {
        Some(parts) => parts.iter().map(Vec::as_slice).collect(),
        None => {
            all = (0..graph.node_count()).collect();
            vec![all.as_slice()]
        }
    };
    for part in parts {
        let pool: Vec<usize> = part.iter().copied().filter(|&v| v < graph.node_count()).collect();
        if pool.is_empty() {
            continue;
        }
        let take = k.min(pool.len());
        for _ in 0..samples {
            nodes.clear();
            nodes.extend(
                crate::graph::sample_distinct(&mut rng, pool.len(), take)
                    .into_iter()
                    .map(|i| pool[i]),
            );
            out.add(canonical_of(graph, &nodes, k));
        }
    }
    Ok(out)
}

/// Exhaustive census of every `k`-subset of nodes.
pub fn graphlet_census(graph: &Graph, k: usize) -> Result<GraphletCounts> {
    check_size(k)?;
    let n = graph.node_count();
    let mut out = GraphletCounts::default();
    if n < k {
        let nodes: Vec<usize> = (0..n).collect();
        out.add(canonical_of(graph, &nodes, k));
        return Ok(out);
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.add(canonical_of(graph, &idx, k));
        // next combination in lexicographic order
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Node-rooted sentences for embedding training: for every node, a sentence
/// of `per_node` graphlet ids, each drawn on the node plus `k-1` distinct
/// members of its neighbourhood. Neighbourhoods smaller than `k-1` are
/// completed with uniformly chosen other nodes.
pub fn node_sentences(graph: &Graph, k: usize, per_node: usize, seed: u64) -> Result<Vec<Vec<GraphletId>>> {
    check_size(k)?;
    let n = graph.node_count();
    let mut rng = rng::rng(seed);
    let mut sentences = Vec::with_capacity(n);
    let mut nodes = Vec::with_capacity(k);
    for v in 0..n {
        let nb = graph.neighbors(v);
        let mut sentence = Vec::with_capacity(per_node);
        for _ in 0..per_node {
            nodes.clear();
            nodes.push(v);
            if nb.len() >= k - 1 {
                for i in crate::graph::sample_distinct(&mut rng, nb.len(), k - 1) {
                    nodes.push(nb[i]);
                }
            } else {
                nodes.extend_from_slice(nb);
                let want = k.min(n);
                if nodes.len() < want {
                    let rest: Vec<usize> = (0..n).filter(|u| !nodes.contains(u)).collect();
                    let extra = want - nodes.len();
                    for i in crate::graph::sample_distinct(&mut rng, rest.len(), extra) {
                        nodes.push(rest[i]);
                    }
                }
            }
            sentence.push(canonical_of(graph, &nodes, k));
        }
        sentences.push(sentence);
    }
    Ok(sentences)
}
