//! Network design instances: road projects toggled on a base network, and
//! the candidate networks they induce.

use std::path::Path;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assignment::{frank_wolfe, FrankWolfeOptions, Router};
use super::tntp::TrafficNetwork;
use crate::bo::BitEncoding;
use crate::error::{GboError, Result};
use crate::graph::{CandidateSet, Graph};
use crate::rng;

/// One road (both directions) that may or may not be built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Project {
    /// Zero-based endpoints, `a < b`.
    pub road: (usize, usize),
    /// Indices of the road's links in the base network.
    pub links: Vec<usize>,
}

/// Unordered node pairs joined by links in both directions.
pub fn two_way_roads(net: &TrafficNetwork) -> Vec<(usize, usize)> {
    let mut roads: Vec<(usize, usize)> = net
        .links
        .iter()
        .filter(|l| l.from < l.to && net.links.iter().any(|m| m.from == l.to && m.to == l.from))
        .map(|l| (l.from, l.to))
        .collect();
    roads.sort();
    roads.dedup();
    roads
}

fn project_for(net: &TrafficNetwork, road: (usize, usize)) -> Project {
    let links = net
        .links
        .iter()
        .enumerate()
        .filter(|(_, l)| (l.from, l.to) == road || (l.to, l.from) == road)
        .map(|(i, _)| i)
        .collect();
    Project { road, links }
}

/// True when every positive-demand OD pair has a path.
pub fn serves_all_demand(net: &TrafficNetwork) -> bool {
    let zero = vec![0.0; net.links.len()];
    Router::new(net).all_or_nothing(net, &zero).is_ok()
}

/// A base network plus projects whose links are removed unless built.
#[derive(Debug, Clone)]
pub struct DesignInstance {
    pub base: TrafficNetwork,
    pub projects: Vec<Project>,
}

impl DesignInstance {
    /// Projects given as zero-based road endpoints.
    pub fn new(base: TrafficNetwork, roads: &[(usize, usize)]) -> Result<Self> {
        if roads.is_empty() || roads.len() > 20 {
            return Err(GboError::param(format!("{} projects; expected 1 to 20", roads.len())));
        }
        let mut projects: Vec<Project> = Vec::new();
        for &(a, b) in roads {
            let road = (a.min(b), a.max(b));
            if projects.iter().any(|p| p.road == road) {
                return Err(GboError::param(format!("road {}-{} listed twice", road.0 + 1, road.1 + 1)));
            }
            let p = project_for(&base, road);
            if p.links.is_empty() {
                return Err(GboError::param(format!("no link joins {} and {}", road.0 + 1, road.1 + 1)));
            }
            projects.push(p);
        }
        Ok(DesignInstance { base, projects })
    }

    /// Seeded random choice of `count` two-way roads, redrawn until the
    /// network with none of them built still serves every OD pair.
    pub fn random(base: TrafficNetwork, count: usize, seed: u64) -> Result<Self> {
        let roads = two_way_roads(&base);
        if count == 0 || count > roads.len() {
            return Err(GboError::param(format!("cannot pick {count} of {} roads", roads.len())));
        }
        let mut r = rng::derive_rng(seed, rng::label("projects"));
        for _ in 0..10_000 {
            let mut picked: Vec<(usize, usize)> = sample(&mut r, roads.len(), count).into_iter().map(|i| roads[i]).collect();
            picked.sort();
            let inst = DesignInstance::new(base.clone(), &picked)?;
            if serves_all_demand(&inst.network(0)) {
                return Ok(inst);
            }
        }
        Err(GboError::Unsupported("no project draw keeps the network connected".into()))
    }

    pub fn project_count(&self) -> usize {
        self.projects.len()
    }

    pub fn candidate_count(&self) -> usize {
        1 << self.projects.len()
    }

    /// Network with project `i` built iff bit `i` of `code` is set.
    pub fn network(&self, code: u64) -> TrafficNetwork {
        let removed: Vec<usize> = self
            .projects
            .iter()
            .enumerate()
            .filter(|(i, _)| code >> i & 1 == 0)
            .flat_map(|(_, p)| p.links.iter().copied())
            .collect();
        self.base.without_links(&removed)
    }

    /// `u-` followed by one digit per project, project 0 first.
    pub fn candidate_id(&self, code: u64) -> String {
        let bits: String = (0..self.projects.len()).map(|i| if code >> i & 1 == 1 { '1' } else { '0' }).collect();
        format!("u-{bits}")
    }

    /// Undirected road graph of a candidate network.
    pub fn graph(&self, code: u64) -> Result<Graph> {
        let net = self.network(code);
        let mut edges: Vec<(usize, usize)> = net
            .links
            .iter()
            .filter(|l| l.from != l.to)
            .map(|l| (l.from.min(l.to), l.from.max(l.to)))
            .collect();
        edges.sort();
        edges.dedup();
        Graph::new(net.node_count, edges)
    }

    /// Every candidate network as a graph, with the bit encoding that maps
    /// candidates back to project decisions.
    pub fn candidates(&self) -> Result<(CandidateSet, BitEncoding)> {
        let codes: Vec<u64> = (0..self.candidate_count() as u64).collect();
        let graphs = codes.iter().map(|&c| self.graph(c)).collect::<Result<Vec<_>>>()?;
        let ids = codes.iter().map(|&c| self.candidate_id(c)).collect();
        Ok((CandidateSet::new(ids, graphs)?, BitEncoding::new(self.projects.len(), codes)?))
    }

    /// Node sets around each project: the road's endpoints and their
    /// neighbors in the base network.
    pub fn project_areas(&self) -> Vec<Vec<usize>> {
        self.projects
            .iter()
            .map(|p| {
                let mut area: Vec<usize> = self
                    .base
                    .links
                    .iter()
                    .filter(|l| [p.road.0, p.road.1].contains(&l.from) || [p.road.0, p.road.1].contains(&l.to))
                    .flat_map(|l| [l.from, l.to])
                    .collect();
                area.sort();
                area.dedup();
                area
            })
            .collect()
    }

    /// Equilibrium total travel time of one candidate.
    pub fn total_travel_time(&self, code: u64, options: &FrankWolfeOptions) -> Result<f64> {
        Ok(frank_wolfe(&self.network(code), options)?.total_travel_time)
    }

    /// `-ln(total travel time)` of every candidate, in code order;
    /// disconnected candidates are reported as errors.
    pub fn objective_table(&self, options: &FrankWolfeOptions) -> Vec<Result<f64>> {
        (0..self.candidate_count() as u64)
            .into_par_iter()
            .map(|c| self.total_travel_time(c, options).map(utndp_objective))
            .collect()
    }
}

/// Maximization form of a total travel time.
pub fn utndp_objective(total_travel_time: f64) -> f64 {
    -total_travel_time.ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ProjectEntry {
    id: String,
    /// One-based end nodes.
    road: [usize; 2],
}

/// Projects as a JSON list of `{"id": .., "road": [a, b]}` with one-based
/// node numbers.
pub fn parse_projects(text: &str, path: &Path) -> Result<Vec<(usize, usize)>> {
    let entries: Vec<ProjectEntry> = serde_json::from_str(text).map_err(|e| GboError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    entries
        .iter()
        .map(|e| match e.road {
            [a, b] if a >= 1 && b >= 1 => Ok((a - 1, b - 1)),
            _ => Err(GboError::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: format!("project {} has a node numbered 0", e.id),
            }),
        })
        .collect()
}

pub fn format_projects(instance: &DesignInstance) -> String {
    let entries: Vec<ProjectEntry> = instance
        .projects
        .iter()
        .enumerate()
        .map(|(i, p)| ProjectEntry { id: format!("p{}", i + 1), road: [p.road.0 + 1, p.road.1 + 1] })
        .collect();
    serde_json::to_string_pretty(&entries).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::tntp::{Demand, Link};

    fn grid() -> TrafficNetwork {
        // 2x3 grid, two-way streets
        let pairs = [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)];
        let mut links = Vec::new();
        for (a, b) in pairs {
            for (f, t) in [(a, b), (b, a)] {
                links.push(Link { from: f, to: t, capacity: 50.0, length: 1.0, free_flow_time: 1.0, b: 0.15, power: 4.0 });
            }
        }
        TrafficNetwork {
            node_count: 6,
            zone_count: 6,
            first_thru_node: 0,
            links,
            demand: vec![Demand { origin: 0, destination: 5, flow: 80.0 }, Demand { origin: 2, destination: 3, flow: 40.0 }],
        }
    }

    #[test]
    fn candidates_cover_the_power_set() {
        let inst = DesignInstance::new(grid(), &[(1, 4), (4, 1 + 4)]).unwrap();
        let (set, enc) = inst.candidates().unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.id(1), "u-10");
        assert_eq!(set.graph(0).edge_count(), 5);
        assert_eq!(set.graph(3).edge_count(), 7);
        assert_eq!(enc.code(2), 2);
        assert_eq!(inst.network(1).links.len(), 12);
    }

    #[test]
    fn random_projects_keep_demand_served() {
        let base = grid();
        let a = DesignInstance::random(base.clone(), 2, 5).unwrap();
        let b = DesignInstance::random(base.clone(), 2, 5).unwrap();
        assert_eq!(a.projects, b.projects);
        assert!(serves_all_demand(&a.network(0)));
        assert!(DesignInstance::random(base, 8, 5).is_err());
    }

    #[test]
    fn building_roads_does_not_hurt_here() {
        let inst = DesignInstance::new(grid(), &[(1, 4)]).unwrap();
        let table = inst.objective_table(&FrankWolfeOptions { tolerance: 1e-6, max_iter: 1000, ..Default::default() });
        assert!(table[1].as_ref().unwrap() >= table[0].as_ref().unwrap());
    }

    #[test]
    fn disconnecting_design_is_reported() {
        // removing both vertical links at column 0 and 1 and the top row cut
        let inst = DesignInstance::new(grid(), &[(0, 3), (1, 4), (2, 5)]).unwrap();
        let table = inst.objective_table(&FrankWolfeOptions::default());
        assert!(matches!(table[0], Err(GboError::Infeasible { .. })));
        assert!(table[7].is_ok());
    }

    #[test]
    fn project_file_round_trip() {
        let inst = DesignInstance::new(grid(), &[(1, 4), (2, 5)]).unwrap();
        let text = format_projects(&inst);
        assert!(text.contains("\"id\": \"p2\"") && text.contains("3,\n      6"), "{text}");
        assert_eq!(parse_projects(&text, Path::new("p")).unwrap(), vec![(1, 4), (2, 5)]);
        assert!(parse_projects(r#"[{"id": "a", "road": [1, 2, 3]}]"#, Path::new("p")).is_err());
        assert!(parse_projects(r#"[{"id": "a", "road": [0, 2]}]"#, Path::new("p")).is_err());
        assert_eq!(parse_projects(r#"[{"id": "a", "road": [3, 1]}]"#, Path::new("p")).unwrap(), vec![(2, 0)]);
        assert!(DesignInstance::new(grid(), &[(0, 5)]).is_err());
    }

    #[test]
    fn areas_include_neighbors() {
        let inst = DesignInstance::new(grid(), &[(0, 1)]).unwrap();
        assert_eq!(inst.project_areas(), vec![vec![0, 1, 2, 3, 4]]);
    }
}
