//! Model-free baselines: random order, a generational genetic algorithm,
//! and simulated annealing over bit-encoded candidates.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::optimizer::initial_design;
use super::record::{RunRecord, Stop};
use crate::error::{GboError, Result};
use crate::rng;

/// Maps candidates to bit vectors (one bit per decision) and back.
#[derive(Debug, Clone, PartialEq)]
pub struct BitEncoding {
    bits: usize,
    codes: Vec<u64>,
    lookup: HashMap<u64, usize>,
}

impl BitEncoding {
    pub fn new(bits: usize, codes: Vec<u64>) -> Result<Self> {
        if bits == 0 || bits > 63 {
            return Err(GboError::param(format!("bit width {bits} out of range 1..=63")));
        }
        let mut lookup = HashMap::with_capacity(codes.len());
        for (i, &c) in codes.iter().enumerate() {
            if c >> bits != 0 {
                return Err(GboError::param(format!("code {c:#b} wider than {bits} bits")));
            }
            if lookup.insert(c, i).is_some() {
                return Err(GboError::param(format!("code {c:#b} used twice")));
            }
        }
        Ok(BitEncoding { bits, codes, lookup })
    }

    /// Candidate `i` encoded as the binary digits of `i`. Codes past the
    /// last candidate stay unmapped.
    pub fn identity(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GboError::Unsupported(format!("{n} candidates cannot be bit-encoded")));
        }
        BitEncoding::new(n.next_power_of_two().trailing_zeros() as usize, (0..n as u64).collect())
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code(&self, candidate: usize) -> u64 {
        self.codes[candidate]
    }

    pub fn candidate(&self, code: u64) -> Option<usize> {
        self.lookup.get(&code).copied()
    }
}

/// Uniform order without replacement, starting with the shared initial
/// design.
pub fn run_random(
    ids: &[String],
    objective: &(dyn Fn(usize) -> Result<f64> + Sync),
    stop: impl Into<Stop>,
    n_init: usize,
    seed: u64,
) -> Result<RunRecord> {
    let stop = stop.into();
    let budget = stop.budget;
    check_budget(ids.len(), budget, n_init)?;
    let init = initial_design(ids.len(), n_init, seed)?;
    let mut rest: Vec<usize> = (0..ids.len()).filter(|i| !init.contains(i)).collect();
    rest.shuffle(&mut rng::derive_rng(seed, rng::label("random")));
    let mut record = RunRecord::new("random", seed);
    for i in init.into_iter().chain(rest) {
        if record.finished(&stop) {
            break;
        }
        match objective(i) {
            Ok(y) => record.push(i, &ids[i], y, None),
            Err(e) => {
                record.aborted = Some(e.to_string());
                break;
            }
        }
    }
    Ok(record)
}

fn check_budget(n: usize, budget: usize, n_init: usize) -> Result<()> {
    if budget > n {
        return Err(GboError::param(format!("budget {budget} exceeds {n} candidates")));
    }
    if n_init > budget {
        return Err(GboError::param(format!("budget {budget} is below n_init {n_init}")));
    }
    Ok(())
}

/// Objective cache that counts distinct evaluations and logs them into the
/// run record. Codes outside the encoding score `-inf` without cost.
struct Evaluator<'a> {
    ids: &'a [String],
    encoding: &'a BitEncoding,
    objective: &'a (dyn Fn(usize) -> Result<f64> + Sync),
    cache: HashMap<usize, f64>,
    record: RunRecord,
    stop: Stop,
}

impl Evaluator<'_> {
    fn done(&self) -> bool {
        self.record.finished(&self.stop)
    }

    fn eval(&mut self, code: u64) -> f64 {
        let Some(i) = self.encoding.candidate(code) else {
            return f64::NEG_INFINITY;
        };
        if let Some(&y) = self.cache.get(&i) {
            return y;
        }
        if self.done() {
            return f64::NEG_INFINITY;
        }
        match (self.objective)(i) {
            Ok(y) => {
                self.cache.insert(i, y);
                self.record.push(i, &self.ids[i], y, None);
                y
            }
            Err(e) => {
                self.record.aborted = Some(e.to_string());
                f64::NEG_INFINITY
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability.
    pub mutation_rate: f64,
    pub tournament: usize,
    /// Stop after this many consecutive generations without a new
    /// evaluation.
    pub stall_generations: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig { population: 90, crossover_rate: 0.6, mutation_rate: 0.062, tournament: 2, stall_generations: 1000 }
    }
}

/// Generational GA with tournament selection and single-point crossover.
/// The first population holds the shared initial design plus random codes.
#[allow(clippy::too_many_arguments)]
pub fn run_ga(
    ids: &[String],
    encoding: &BitEncoding,
    objective: &(dyn Fn(usize) -> Result<f64> + Sync),
    stop: impl Into<Stop>,
    n_init: usize,
    config: &GaConfig,
    seed: u64,
) -> Result<RunRecord> {
    let stop = stop.into();
    let budget = stop.budget;
    check_budget(ids.len(), budget, n_init)?;
    if encoding.len() != ids.len() {
        return Err(GboError::DimensionMismatch { expected: ids.len(), actual: encoding.len() });
    }
    if config.population < 2 || config.tournament == 0 {
        return Err(GboError::param("GA needs a population of at least 2 and a tournament of at least 1"));
    }
    let mut r = rng::derive_rng(seed, rng::label("ga"));
    let bits = encoding.bits();
    let mask = (1u64 << bits) - 1;
    let mut ev = Evaluator { ids, encoding, objective, cache: HashMap::new(), record: RunRecord::new("ga", seed), stop };

    let mut pop: Vec<u64> = initial_design(ids.len(), n_init, seed)?.into_iter().map(|i| encoding.code(i)).collect();
    while pop.len() < config.population {
        pop.push(r.random::<u64>() & mask);
    }
    pop.truncate(config.population.max(n_init));
    let mut fitness: Vec<f64> = pop.iter().map(|&c| ev.eval(c)).collect();
    let mut stall = 0;
    while !ev.done() && stall < config.stall_generations {
        let before = ev.record.len();
        let mut next = Vec::with_capacity(pop.len());
        while next.len() < pop.len() {
            let a = tournament(&fitness, config.tournament, &mut r);
            let b = tournament(&fitness, config.tournament, &mut r);
            let (mut c1, mut c2) = (pop[a], pop[b]);
            if bits > 1 && r.random::<f64>() < config.crossover_rate {
                let point = r.random_range(1..bits);
                let low = (1u64 << point) - 1;
                (c1, c2) = ((c1 & !low) | (c2 & low), (c2 & !low) | (c1 & low));
            }
            for c in [c1, c2] {
                let mut c = c;
                for bit in 0..bits {
                    if r.random::<f64>() < config.mutation_rate {
                        c ^= 1 << bit;
                    }
                }
                if next.len() < pop.len() {
                    next.push(c);
                }
            }
        }
        pop = next;
        fitness = pop.iter().map(|&c| ev.eval(c)).collect();
        stall = if ev.record.len() > before { 0 } else { stall + 1 };
    }
    Ok(ev.record)
}

fn tournament(fitness: &[f64], size: usize, r: &mut rng::Rng) -> usize {
    let mut best = r.random_range(0..fitness.len());
    for _ in 1..size {
        let c = r.random_range(0..fitness.len());
        if fitness[c] > fitness[best] {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaConfig {
    /// Probability of accepting a move that is worse by the calibration
    /// delta, at the start and at the end of the run.
    pub p_start: f64,
    pub p_end: f64,
    pub trials_per_cycle: usize,
    /// Stop after this many proposals per unit of budget.
    pub max_proposals_per_eval: usize,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig { p_start: 0.7, p_end: 0.001, trials_per_cycle: 2, max_proposals_per_eval: 1000 }
    }
}

/// Temperatures at which a move worse by `delta` is accepted with the
/// start and end probabilities.
pub fn sa_temperatures(delta: f64, config: &SaConfig) -> (f64, f64) {
    (-delta / config.p_start.ln(), -delta / config.p_end.ln())
}

/// Simulated annealing with one-bit-flip moves. The temperature falls
/// geometrically with the fraction of the budget spent; the calibration
/// delta is the standard deviation of the initial design's values.
#[allow(clippy::too_many_arguments)]
pub fn run_sa(
    ids: &[String],
    encoding: &BitEncoding,
    objective: &(dyn Fn(usize) -> Result<f64> + Sync),
    stop: impl Into<Stop>,
    n_init: usize,
    config: &SaConfig,
    seed: u64,
) -> Result<RunRecord> {
    let stop = stop.into();
    let budget = stop.budget;
    check_budget(ids.len(), budget, n_init)?;
    if encoding.len() != ids.len() {
        return Err(GboError::DimensionMismatch { expected: ids.len(), actual: encoding.len() });
    }
    if !(0.0 < config.p_end && config.p_end < config.p_start && config.p_start < 1.0) {
        return Err(GboError::param("SA needs 0 < p_end < p_start < 1"));
    }
    let mut r = rng::derive_rng(seed, rng::label("sa"));
    let bits = encoding.bits();
    let mut ev = Evaluator { ids, encoding, objective, cache: HashMap::new(), record: RunRecord::new("sa", seed), stop };

    let init = initial_design(ids.len(), n_init, seed)?;
    let values: Vec<f64> = init.iter().map(|&i| ev.eval(encoding.code(i))).collect();
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len().max(1) as f64).sqrt();
    let delta = if sd > 0.0 && sd.is_finite() { sd } else { 1.0 };
    let (t_start, t_end) = sa_temperatures(delta, config);

    let (mut current, mut current_y) = init
        .iter()
        .zip(&values)
        .fold((encoding.code(init[0]), f64::NEG_INFINITY), |acc, (&i, &v)| if v > acc.1 { (encoding.code(i), v) } else { acc });
    let max_proposals = budget.saturating_mul(config.max_proposals_per_eval);
    let mut proposals = 0usize;
    while !ev.done() && proposals < max_proposals {
        let progress = ev.record.len() as f64 / budget as f64;
        let t = t_start * (t_end / t_start).powf(progress);
        for _ in 0..config.trials_per_cycle {
            proposals += 1;
            let cand = current ^ (1 << r.random_range(0..bits));
            let y = ev.eval(cand);
            if y >= current_y || (y.is_finite() && r.random::<f64>() < ((y - current_y) / t).exp()) {
                current = cand;
                current_y = y;
            }
        }
    }
    Ok(ev.record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(bits: usize) -> (Vec<String>, BitEncoding, Vec<f64>) {
        let n = 1 << bits;
        let ids = (0..n).map(|i| format!("u-{i:0bits$b}")).collect();
        // best code has every bit set; value decreases with Hamming distance
        let y = (0..n).map(|i: usize| i.count_ones() as f64 + (i % 7) as f64 * 0.01).collect();
        (ids, BitEncoding::identity(n).unwrap(), y)
    }

    #[test]
    fn encoding_checks() {
        assert!(BitEncoding::identity(1).is_err());
        let padded = BitEncoding::identity(12).unwrap();
        assert_eq!(padded.bits(), 4);
        assert_eq!(padded.candidate(11), Some(11));
        assert_eq!(padded.candidate(12), None);
        assert!(BitEncoding::new(3, vec![1, 1]).is_err());
        assert!(BitEncoding::new(2, vec![4]).is_err());
        let e = BitEncoding::new(3, vec![5, 2]).unwrap();
        assert_eq!(e.candidate(2), Some(1));
        assert_eq!(e.candidate(3), None);
    }

    #[test]
    fn random_is_reproducible_and_distinct() {
        let (ids, _, y) = space(6);
        let f = |i: usize| Ok(y[i]);
        let a = run_random(&ids, &f, 40, 5, 3).unwrap();
        let b = run_random(&ids, &f, 40, 5, 3).unwrap();
        assert_eq!(a, b);
        let mut c: Vec<usize> = a.steps.iter().map(|s| s.candidate).collect();
        assert_eq!(&c[..5], &initial_design(64, 5, 3).unwrap()[..]);
        c.sort();
        c.dedup();
        assert_eq!(c.len(), 40);
        let full = run_random(&ids, &f, 64, 5, 3).unwrap();
        assert_eq!(full.best(), Some(y[63]));
    }

    #[test]
    fn target_ends_runs_at_the_hit() {
        let (ids, enc, y) = space(6);
        let f = |i: usize| Ok(y[i]);
        let stop = Stop { budget: 64, target: Some(y[63]) };
        let full = run_random(&ids, &f, 64, 5, 3).unwrap();
        let hit = full.evaluations_to_optimum(y[63], 64);
        let short = run_random(&ids, &f, stop, 5, 3).unwrap();
        assert_eq!(short.len(), hit);
        assert_eq!(short.steps[..], full.steps[..hit]);
        for r in [
            run_ga(&ids, &enc, &f, stop, 10, &GaConfig::default(), 4).unwrap(),
            run_sa(&ids, &enc, &f, stop, 10, &SaConfig::default(), 4).unwrap(),
        ] {
            assert_eq!(r.best(), Some(y[63]));
            assert_eq!(r.steps.last().unwrap().y, y[63]);
        }
    }

    #[test]
    fn ga_counts_distinct_evaluations() {
        let (ids, enc, y) = space(8);
        let f = |i: usize| Ok(y[i]);
        let cfg = GaConfig { population: 20, ..Default::default() };
        let r = run_ga(&ids, &enc, &f, 120, 10, &cfg, 4).unwrap();
        assert_eq!(r.len(), 120);
        let mut c: Vec<usize> = r.steps.iter().map(|s| s.candidate).collect();
        c.sort();
        c.dedup();
        assert_eq!(c.len(), 120);
        assert_eq!(run_ga(&ids, &enc, &f, 120, 10, &cfg, 4).unwrap(), r);
    }

    #[test]
    fn padded_codes_reach_every_candidate() {
        let ids: Vec<String> = (0..100).map(|i| format!("c{i}")).collect();
        let enc = BitEncoding::identity(100).unwrap();
        let f = |i: usize| Ok(-((i as f64) - 77.0).abs());
        let cfg = GaConfig { population: 20, ..Default::default() };
        for r in [
            run_ga(&ids, &enc, &f, 100, 10, &cfg, 2).unwrap(),
            run_sa(&ids, &enc, &f, 100, 10, &SaConfig::default(), 2).unwrap(),
        ] {
            assert!(r.steps.iter().all(|s| s.candidate < 100));
            assert!(r.len() >= 60, "{}", r.len());
        }
    }

    #[test]
    fn sa_climbs() {
        let (ids, enc, y) = space(8);
        let f = |i: usize| Ok(y[i]);
        let r = run_sa(&ids, &enc, &f, 100, 10, &SaConfig::default(), 5).unwrap();
        assert_eq!(r.len(), 100);
        assert!(r.best().unwrap() >= 7.0);
    }

    #[test]
    fn sa_start_acceptance_matches_probability() {
        let cfg = SaConfig::default();
        let delta = 0.37;
        let (t0, t1) = sa_temperatures(delta, &cfg);
        assert!(((-delta / t0).exp() - 0.7).abs() < 1e-12);
        assert!(((-delta / t1).exp() - 0.001).abs() < 1e-12);
        // empirical acceptance at the start temperature
        let mut r = rng::rng(0);
        let accepted = (0..100_000).filter(|_| r.random::<f64>() < (-delta / t0).exp()).count();
        assert!((accepted as f64 / 1e5 - 0.7).abs() < 0.01);
    }

    #[test]
    fn unknown_codes_cost_nothing() {
        // half the codes are missing from the candidate set
        let ids: Vec<String> = (0..8).map(|i| format!("c{i}")).collect();
        let enc = BitEncoding::new(4, (0..8).map(|i| i * 2).collect()).unwrap();
        let f = |i: usize| Ok(i as f64);
        let r = run_ga(&ids, &enc, &f, 8, 2, &GaConfig { population: 6, ..Default::default() }, 1).unwrap();
        assert!(r.len() <= 8);
        assert!(r.steps.iter().all(|s| s.candidate < 8));
    }
}
