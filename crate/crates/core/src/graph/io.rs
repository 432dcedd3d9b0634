//! Edge-list text format.
//!
//! ```text
//! # nodes=4 id=er-0
//! 0 1
//! 1 2
//! t 2 7
//! a weight 0.5
//! ```
//!
//! A `# nodes=<n>` header opens a graph (the `id=` token is optional).
//! Edge lines are 0-based `u v` pairs, `t u tag` assigns an integer node tag
//! and `a name value` sets a graph attribute. Other `#` lines and blank lines
//! are ignored.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use super::{CandidateSet, Graph};
use crate::error::{GboError, Result};

struct Pending {
    id: Option<String>,
    nodes: usize,
    edges: Vec<(usize, usize)>,
    seen: HashSet<(usize, usize)>,
    tags: BTreeMap<usize, i64>,
    attrs: BTreeMap<String, f64>,
}

pub fn read_graphs(path: impl AsRef<Path>) -> Result<CandidateSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_graphs(&text, path)
}

/// Parses edge-list text. `origin` is only used in error messages.
pub fn parse_graphs(text: &str, origin: &Path) -> Result<CandidateSet> {
    let err = |line: usize, message: String| GboError::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut done: Vec<(Option<String>, Graph)> = Vec::new();
    let mut current: Option<Pending> = None;

    let finish = |p: Pending, line: usize| -> Result<(Option<String>, Graph)> {
        let mut g = Graph::new(p.nodes, p.edges).map_err(|e| err(line, e.to_string()))?;
        for (v, t) in p.tags {
            g = g.with_tag(v, t).map_err(|e| err(line, e.to_string()))?;
        }
        for (k, v) in p.attrs {
            g = g.with_attr(k, v);
        }
        Ok((p.id, g))
    };

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            let Some(n) = tokens.iter().find_map(|t| t.strip_prefix("nodes=")) else {
                continue;
            };
            let nodes: usize = n
                .parse()
                .map_err(|_| err(lineno, format!("bad node count `{n}`")))?;
            if nodes == 0 {
                return Err(err(lineno, "graph must have at least one node".into()));
            }
            let id = tokens.iter().find_map(|t| t.strip_prefix("id=")).map(str::to_string);
            if let Some(p) = current.take() {
                done.push(finish(p, lineno)?);
            }
            current = Some(Pending {
                id,
                nodes,
                edges: Vec::new(),
                seen: HashSet::new(),
                tags: BTreeMap::new(),
                attrs: BTreeMap::new(),
            });
            continue;
        }
        let Some(p) = current.as_mut() else {
            return Err(err(lineno, "record before `# nodes=<n>` header".into()));
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let node = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| err(lineno, format!("bad node index `{s}`")))?;
            if v >= p.nodes {
                return Err(err(lineno, format!("node {v} out of range for {} nodes", p.nodes)));
            }
            Ok(v)
        };
        match tokens.as_slice() {
            ["t", v, tag] => {
                let v = node(v)?;
                let tag: i64 = tag.parse().map_err(|_| err(lineno, format!("bad tag `{tag}`")))?;
                p.tags.insert(v, tag);
            }
            ["a", name, value] => {
                let value: f64 = value
                    .parse()
                    .map_err(|_| err(lineno, format!("bad attribute value `{value}`")))?;
                p.attrs.insert((*name).to_string(), value);
            }
            [u, v] => {
                let (u, v) = (node(u)?, node(v)?);
                if u == v {
                    return Err(err(lineno, format!("self-loop on node {u}")));
                }
                let e = (u.min(v), u.max(v));
                if !p.seen.insert(e) {
                    return Err(err(lineno, format!("duplicate edge ({}, {})", e.0, e.1)));
                }
                p.edges.push(e);
            }
            _ => return Err(err(lineno, format!("unrecognized record `{line}`"))),
        }
    }
    let last_line = text.lines().count();
    if let Some(p) = current.take() {
        done.push(finish(p, last_line)?);
    }
    if done.is_empty() {
        return Err(err(last_line.max(1), "no graphs in file".into()));
    }
    let ids = done
        .iter()
        .enumerate()
        .map(|(i, (id, _))| id.clone().unwrap_or_else(|| format!("graph-{i}")))
        .collect();
    let graphs = done.into_iter().map(|(_, g)| g).collect();
    CandidateSet::new(ids, graphs).map_err(|e| err(last_line, e.to_string()))
}

pub fn format_graphs(set: &CandidateSet) -> String {
    let mut out = String::new();
    for (id, g) in set.iter() {
        let _ = writeln!(out, "# nodes={} id={}", g.node_count(), id);
        for &(u, v) in g.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        for (v, t) in g.node_tags() {
            let _ = writeln!(out, "t {v} {t}");
        }
        for (name, value) in g.attrs() {
            let _ = writeln!(out, "a {name} {value:?}");
        }
    }
    out
}

pub fn write_graphs(set: &CandidateSet, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_graphs(set))?;
    Ok(())
}
