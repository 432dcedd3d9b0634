//! Static user-equilibrium assignment with BPR link costs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::tntp::{Link, TrafficNetwork};
use crate::error::{GboError, Result};

/// `t0 (1 + b (v / c)^power)`.
pub fn bpr_time(link: &Link, flow: f64) -> f64 {
    link.free_flow_time * (1.0 + link.b * (flow / link.capacity).powf(link.power))
}

/// `integral_0^v t(x) dx` for the BPR cost.
pub fn bpr_integral(link: &Link, flow: f64) -> f64 {
    let p = link.power;
    link.free_flow_time * (flow + link.b * link.capacity / (p + 1.0) * (flow / link.capacity).powf(p + 1.0))
}

/// Beckmann potential of a flow vector.
pub fn beckmann(net: &TrafficNetwork, flows: &[f64]) -> f64 {
    net.links.iter().zip(flows).map(|(l, &v)| bpr_integral(l, v)).sum()
}

/// `sum_a v_a t_a(v_a)`.
pub fn total_travel_time(net: &TrafficNetwork, flows: &[f64]) -> f64 {
    net.links.iter().zip(flows).map(|(l, &v)| v * bpr_time(l, v)).sum()
}

/// Total ordering wrapper for non-negative costs in the heap.
#[derive(Debug, Clone, Copy)]
struct Cost(f64);

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Outgoing link lists and demand grouped by origin.
pub struct Router {
    out: Vec<Vec<usize>>,
    origins: Vec<(usize, Vec<(usize, f64)>)>,
    node_count: usize,
    first_thru: usize,
    zone_count: usize,
}

impl Router {
    pub fn new(net: &TrafficNetwork) -> Self {
        let mut out = vec![Vec::new(); net.node_count];
        for (i, l) in net.links.iter().enumerate() {
            out[l.from].push(i);
        }
        let mut origins: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
        for d in &net.demand {
            match origins.iter_mut().find(|(o, _)| *o == d.origin) {
                Some((_, list)) => list.push((d.destination, d.flow)),
                None => origins.push((d.origin, vec![(d.destination, d.flow)])),
            }
        }
        origins.sort_by_key(|(o, _)| *o);
        Router { out, origins, node_count: net.node_count, first_thru: net.first_thru_node, zone_count: net.zone_count }
    }

    /// Shortest-path predecessor links from `origin` under `costs`.
    fn tree(&self, net: &TrafficNetwork, origin: usize, costs: &[f64]) -> (Vec<f64>, Vec<Option<usize>>) {
        let mut dist = vec![f64::INFINITY; self.node_count];
        let mut pred = vec![None; self.node_count];
        let mut heap = BinaryHeap::new();
        dist[origin] = 0.0;
        heap.push(Reverse((Cost(0.0), origin)));
        while let Some(Reverse((Cost(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            // centroids other than the origin do not carry through traffic
            if u != origin && u < self.first_thru && u < self.zone_count {
                continue;
            }
            for &a in &self.out[u] {
                let v = net.links[a].to;
                let nd = d + costs[a];
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = Some(a);
                    heap.push(Reverse((Cost(nd), v)));
                }
            }
        }
        (dist, pred)
    }

    /// All-or-nothing loading of the demand on shortest paths.
    pub fn all_or_nothing(&self, net: &TrafficNetwork, costs: &[f64]) -> Result<Vec<f64>> {
        let mut flows = vec![0.0; net.links.len()];
        for (origin, dests) in &self.origins {
            let (dist, pred) = self.tree(net, *origin, costs);
            for &(dest, q) in dests {
                if !dist[dest].is_finite() {
                    return Err(GboError::Infeasible { origin: origin + 1, destination: dest + 1 });
                }
                let mut v = dest;
                while let Some(a) = pred[v] {
                    flows[a] += q;
                    v = net.links[a].from;
                }
            }
        }
        Ok(flows)
    }
}

fn default_tolerance() -> f64 {
    1e-4
}
fn default_max_iter() -> usize {
    500
}

/// How the search direction is formed from the all-or-nothing flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Towards the all-or-nothing flows.
    Classic,
    /// Towards a combination of the new and previous targets that is
    /// conjugate with respect to the Beckmann Hessian.
    #[default]
    Conjugate,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrankWolfeOptions {
    /// Relative gap at which to stop.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub direction: Direction,
}

impl Default for FrankWolfeOptions {
    fn default() -> Self {
        FrankWolfeOptions { tolerance: default_tolerance(), max_iter: default_max_iter(), direction: Direction::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub flows: Vec<f64>,
    pub total_travel_time: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative gap measured at each iteration.
    pub gaps: Vec<f64>,
    /// Beckmann potential after each iteration.
    pub objectives: Vec<f64>,
}

impl Assignment {
    pub fn gap(&self) -> f64 {
        self.gaps.last().copied().unwrap_or(0.0)
    }
}

/// `(sum t x - sum t y) / sum t x` for current flows `x` and the
/// all-or-nothing response `y`.
pub fn relative_gap(costs: &[f64], current: &[f64], target: &[f64]) -> f64 {
    let tx: f64 = costs.iter().zip(current).map(|(t, x)| t * x).sum();
    let ty: f64 = costs.iter().zip(target).map(|(t, y)| t * y).sum();
    if tx > 0.0 {
        (tx - ty) / tx
    } else {
        0.0
    }
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

/// Derivative of the BPR cost.
fn bpr_slope(link: &Link, flow: f64) -> f64 {
    if flow <= 0.0 || link.power == 0.0 {
        return 0.0;
    }
    link.free_flow_time * link.b * link.power / link.capacity * (flow / link.capacity).powf(link.power - 1.0)
}

/// Weight on the previous target in the conjugate direction, capped below 1.
fn conjugate_weight(net: &TrafficNetwork, x: &[f64], y: &[f64], prev: &[f64]) -> f64 {
    const CAP: f64 = 0.99;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, l) in net.links.iter().enumerate() {
        let h = bpr_slope(l, x[i]);
        num += (prev[i] - x[i]) * h * (y[i] - x[i]);
        den += (prev[i] - x[i]) * h * (y[i] - prev[i]);
    }
    if den == 0.0 {
        return 0.0;
    }
    let w = num / den;
    if w > CAP {
        CAP
    } else if w >= 0.0 {
        w
    } else {
        0.0
    }
}

/// Frank-Wolfe with exact line search on the Beckmann potential.
pub fn frank_wolfe(net: &TrafficNetwork, options: &FrankWolfeOptions) -> Result<Assignment> {
    let router = Router::new(net);
    let free: Vec<f64> = net.links.iter().map(|l| bpr_time(l, 0.0)).collect();
    let mut x = router.all_or_nothing(net, &free)?;
    let mut z = beckmann(net, &x);
    let mut gaps = Vec::new();
    let mut objectives = vec![z];
    let mut converged = false;
    let mut iterations = 0;
    let mut prev_target: Option<Vec<f64>> = None;
    while iterations < options.max_iter {
        let costs: Vec<f64> = net.links.iter().zip(&x).map(|(l, &v)| bpr_time(l, v)).collect();
        let y = router.all_or_nothing(net, &costs)?;
        let gap = relative_gap(&costs, &x, &y);
        gaps.push(gap);
        if gap <= options.tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let target = match (options.direction, &prev_target) {
            (Direction::Conjugate, Some(prev)) => {
                let w = conjugate_weight(net, &x, &y, prev);
                prev.iter().zip(&y).map(|(p, a)| w * p + (1.0 - w) * a).collect()
            }
            _ => y,
        };
        let mix = |lambda: f64| -> Vec<f64> { x.iter().zip(&target).map(|(a, b)| a + lambda * (b - a)).collect() };
        let mut lambda = golden_section(|l| beckmann(net, &mix(l)), 0.0, 1.0, 1e-8);
        let mut next = mix(lambda);
        let mut zn = beckmann(net, &next);
        // the bracket never contains its end point exactly
        let full = target.clone();
        let z_full = beckmann(net, &full);
        if z_full <= zn {
            (lambda, next, zn) = (1.0, full, z_full);
        }
        if zn > z {
            // the line search can only lose to rounding here; stop moving
            objectives.push(z);
            break;
        }
        x = next;
        z = zn;
        objectives.push(z);
        // a full step leaves no previous direction to be conjugate to
        prev_target = if lambda < 1.0 { Some(target) } else { None };
    }
    let total_travel_time = total_travel_time(net, &x);
    Ok(Assignment { flows: x, total_travel_time, iterations, converged, gaps, objectives })
}
