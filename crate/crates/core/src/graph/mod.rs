//! Undirected graphs, candidate sets, random generators and the edge-list
//! text format.

mod generate;
mod io;

pub use generate::{generate_ba, generate_er, synth_dataset, SynthSpec};
pub(crate) use generate::sample_distinct;
pub use io::{parse_graphs, read_graphs, write_graphs, format_graphs};

use std::collections::{BTreeMap, HashSet};

use crate::error::{GboError, Result};

/// Simple undirected graph with optional integer node tags and real-valued
/// graph attributes. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    node_tags: BTreeMap<usize, i64>,
    attrs: BTreeMap<String, f64>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range
    /// endpoints. Edge orientation is irrelevant.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if node_count == 0 {
            return Err(GboError::param("graph must have at least one node"));
        }
        let mut seen = HashSet::new();
        let mut normalized = Vec::new();
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(GboError::param(format!(
                    "edge ({u}, {v}) out of range for {node_count} nodes"
                )));
            }
            if u == v {
                return Err(GboError::param(format!("self-loop on node {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(GboError::param(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            normalized.push(e);
        }
        normalized.sort_unstable();
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &normalized {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            node_count,
            edges: normalized,
            adjacency,
            node_tags: BTreeMap::new(),
            attrs: BTreeMap::new(),
        })
    }

    pub fn empty(node_count: usize) -> Result<Self> {
        Graph::new(node_count, std::iter::empty())
    }

    pub fn complete(node_count: usize) -> Result<Self> {
        let edges = (0..node_count).flat_map(|u| (u + 1..node_count).map(move |v| (u, v)));
        Graph::new(node_count, edges)
    }

    pub fn path(node_count: usize) -> Result<Self> {
        Graph::new(node_count, (1..node_count).map(|v| (v - 1, v)))
    }

    /// Star with node 0 as hub.
    pub fn star(leaves: usize) -> Result<Self> {
        Graph::new(leaves + 1, (1..=leaves).map(|v| (0, v)))
    }

    pub fn with_tag(mut self, node: usize, tag: i64) -> Result<Self> {
        if node >= self.node_count {
            return Err(GboError::param(format!("tag on node {node} out of range")));
        }
        self.node_tags.insert(node, tag);
        Ok(self)
    }

    pub fn with_attr(mut self, name: impl Into<String>, value: f64) -> Self {
        self.attrs.insert(name.into(), value);
        self
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn node_tags(&self) -> &BTreeMap<usize, i64> {
        &self.node_tags
    }

    pub fn attrs(&self) -> &BTreeMap<String, f64> {
        &self.attrs
    }

    pub fn attr(&self, name: &str) -> Option<f64> {
        self.attrs.get(name).copied()
    }

    /// Copy with node `v` renamed to `perm[v]`. Tags move with their nodes.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.node_count {
            return Err(GboError::DimensionMismatch {
                expected: self.node_count,
                actual: perm.len(),
            });
        }
        let mut g = Graph::new(
            self.node_count,
            self.edges.iter().map(|&(u, v)| (perm[u], perm[v])),
        )?;
        g.node_tags = self.node_tags.iter().map(|(&v, &t)| (perm[v], t)).collect();
        g.attrs = self.attrs.clone();
        Ok(g)
    }

    /// Graph without the listed nodes; survivors are renumbered in order.
    pub fn remove_nodes(&self, removed: &[usize]) -> Result<Self> {
        let mut keep = vec![true; self.node_count];
        for &v in removed {
            keep[v] = false;
        }
        let mut index = vec![usize::MAX; self.node_count];
        let mut next = 0;
        for v in 0..self.node_count {
            if keep[v] {
                index[v] = next;
                next += 1;
            }
        }
        if next == 0 {
            return Err(GboError::param("cannot remove every node"));
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| keep[u] && keep[v])
            .map(|&(u, v)| (index[u], index[v]));
        Graph::new(next, edges)
    }

    /// Component id per node plus the component sizes.
    pub fn components(&self) -> (Vec<usize>, Vec<usize>) {
        let mut comp = vec![usize::MAX; self.node_count];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.node_count {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            comp[start] = id;
            stack.push(start);
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for &w in &self.adjacency[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            sizes.push(size);
        }
        (comp, sizes)
    }

    pub fn largest_component_size(&self) -> usize {
        self.components().1.into_iter().max().unwrap_or(0)
    }
}

/// Ordered, non-empty collection of graphs with unique string ids.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    ids: Vec<String>,
    graphs: Vec<Graph>,
}

impl CandidateSet {
    pub fn new(ids: Vec<String>, graphs: Vec<Graph>) -> Result<Self> {
        if graphs.is_empty() {
            return Err(GboError::param("candidate set is empty"));
        }
        if ids.len() != graphs.len() {
            return Err(GboError::DimensionMismatch {
                expected: graphs.len(),
                actual: ids.len(),
            });
        }
        let mut seen = HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(GboError::param(format!("duplicate graph id `{id}`")));
            }
        }
        Ok(CandidateSet { ids, graphs })
    }

    /// Ids default to `graph-<index>`.
    pub fn from_graphs(graphs: Vec<Graph>) -> Result<Self> {
        let ids = (0..graphs.len()).map(|i| format!("graph-{i}")).collect();
        CandidateSet::new(ids, graphs)
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn graph(&self, index: usize) -> &Graph {
        &self.graphs[index]
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Graph)> {
        self.ids.iter().map(String::as_str).zip(&self.graphs)
    }

    /// Keeps only the listed indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        CandidateSet::new(
            indices.iter().map(|&i| self.ids[i].clone()).collect(),
            indices.iter().map(|&i| self.graphs[i].clone()).collect(),
        )
    }
}
