//! Transmission-rate estimation from fully observed cascades.
//!
//! For the exponential kernel the negative log-likelihood separates over
//! target nodes. With rates `r_j = 1/alpha_ji` on the in-edges of node
//! `i`, each cascade contributes
//!
//! * `sum_{j feasible} r_j (t_i - t_j) - ln sum_{j feasible} r_j` if `i`
//!   was infected (feasible parents are infected strictly before `i`),
//! * `sum_{j infected} r_j (T - t_j)` if `i` was still uninfected at a
//!   finite window `T`,
//!
//! which is convex in `r`. Adding `mu * sum_j r_j` gives the l1-penalized
//! problem, solved on `r >= 0` by projected gradient descent with
//! Barzilai-Borwein steps and Armijo backtracking.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{Edge, Network, NodeId, Topology};
use crate::kernel::Kernel;
use crate::math::ln;
use crate::par::map_indices;
use crate::simulate::Cascade;

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    /// l1 weight `mu >= 0`.
    pub l1: f64,
    pub max_iterations: usize,
    /// Relative change of the objective below which iteration stops.
    pub tolerance: f64,
    pub initial_rate: f64,
    /// Rates below this are treated as absent edges.
    pub prune_below: f64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig { l1: 0.0, max_iterations: 5000, tolerance: 1e-12, initial_rate: 0.1, prune_below: 1e-4 }
    }
}

/// Per-node problem: exposures `a_j` and, for each infection of the
/// target, the indices of its feasible parents.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeObjective {
    pub exposure: Vec<f64>,
    pub infections: Vec<Vec<usize>>,
}

impl NodeObjective {
    /// Collect the terms of `target` whose candidate parents are the
    /// sources of `in_edges`.
    pub fn collect(target: NodeId, parents: &[NodeId], cascades: &[Cascade]) -> Self {
        let mut exposure = vec![0.0; parents.len()];
        let mut infections = Vec::new();
        for c in cascades {
            if c.source() == target {
                continue;
            }
            let t_i = c.time(target);
            if t_i.is_finite() {
                let mut feasible = Vec::new();
                for (k, &j) in parents.iter().enumerate() {
                    let t_j = c.time(j);
                    if t_j < t_i {
                        exposure[k] += t_i - t_j;
                        feasible.push(k);
                    }
                }
                // An infection no candidate parent can explain carries no
                // information about these rates.
                if !feasible.is_empty() {
                    infections.push(feasible);
                }
            } else if c.window().is_finite() {
                for (k, &j) in parents.iter().enumerate() {
                    let t_j = c.time(j);
                    if t_j.is_finite() {
                        exposure[k] += c.window() - t_j;
                    }
                }
            }
        }
        NodeObjective { exposure, infections }
    }

    /// Penalized negative log-likelihood; `+inf` if some infection has no
    /// positive feasible rate.
    pub fn value(&self, rates: &[f64], l1: f64) -> f64 {
        let mut f = 0.0;
        for (k, &r) in rates.iter().enumerate() {
            f += (self.exposure[k] + l1) * r;
        }
        for feasible in &self.infections {
            let s: f64 = feasible.iter().map(|&k| rates[k]).sum();
            if s <= 0.0 {
                return f64::INFINITY;
            }
            f -= ln(s);
        }
        f
    }

    pub fn gradient(&self, rates: &[f64], l1: f64, out: &mut [f64]) {
        for (k, g) in out.iter_mut().enumerate() {
            *g = self.exposure[k] + l1;
        }
        for feasible in &self.infections {
            let s: f64 = feasible.iter().map(|&k| rates[k]).sum();
            for &k in feasible {
                out[k] -= 1.0 / s;
            }
        }
    }

    /// Variables that appear in no term.
    fn is_idle(&self, k: usize) -> bool {
        self.exposure[k] == 0.0 && !self.infections.iter().any(|f| f.contains(&k))
    }
}

/// Minimize one node's objective. Returns the rates and the objective
/// trace.
pub fn solve_node(problem: &NodeObjective, node: NodeId, config: &LearnConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = problem.exposure.len();
    let mut x: Vec<f64> = (0..n).map(|k| if problem.is_idle(k) { 0.0 } else { config.initial_rate }).collect();
    let mut f = problem.value(&x, config.l1);
    let mut trace = vec![f];
    if n == 0 || !f.is_finite() {
        return if f.is_finite() { Ok((x, trace)) } else { Err(Error::LearningDiverged { node, trace }) };
    }
    let mut g = vec![0.0; n];
    problem.gradient(&x, config.l1, &mut g);
    let mut step = 1.0 / g.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
    let mut candidate = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    for _ in 0..config.max_iterations {
        let mut accepted = false;
        let mut t = step;
        for _ in 0..80 {
            for k in 0..n {
                candidate[k] = if problem.is_idle(k) { 0.0 } else { (x[k] - t * g[k]).max(0.0) };
            }
            let f_new = problem.value(&candidate, config.l1);
            let decrease: f64 = (0..n).map(|k| g[k] * (x[k] - candidate[k])).sum();
            let dist2: f64 = (0..n).map(|k| (x[k] - candidate[k]) * (x[k] - candidate[k])).sum();
            if dist2 == 0.0 {
                return Ok((x, trace));
            }
            if f_new.is_finite() && f_new <= f - 1e-4 * decrease.max(dist2 / t) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No descent along the projected gradient: stationary up to
            // rounding unless the gradient is still large.
            let pg: f64 = (0..n)
                .map(|k| if x[k] > 0.0 { g[k].abs() } else { (-g[k]).max(0.0) })
                .fold(0.0, f64::max);
            if pg <= 1e-6 * (1.0 + f.abs()) {
                return Ok((x, trace));
            }
            return Err(Error::LearningDiverged { node, trace });
        }
        let f_new = problem.value(&candidate, config.l1);
        problem.gradient(&candidate, config.l1, &mut g_new);
        let (mut sy, mut ss) = (0.0, 0.0);
        for k in 0..n {
            let s = candidate[k] - x[k];
            sy += s * (g_new[k] - g[k]);
            ss += s * s;
        }
        step = if sy > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { t * 2.0 };
        core::mem::swap(&mut x, &mut candidate);
        core::mem::swap(&mut g, &mut g_new);
        let change = f - f_new;
        f = f_new;
        trace.push(f);
        if x.iter().any(|&r| r > 1e12) {
            return Err(Error::LearningDiverged { node, trace });
        }
        if change <= config.tolerance * f.abs().max(1.0) {
            return Ok((x, trace));
        }
    }
    Ok((x, trace))
}

/// Estimated rate of every candidate edge, before pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedRates {
    pub node_count: usize,
    /// `(source, target, rate)` in candidate-edge order.
    pub rates: Vec<(NodeId, NodeId, f64)>,
}

impl LearnedRates {
    /// Network with edges whose rate is at least `prune_below`, scale
    /// `1 / rate`.
    pub fn to_network(&self, prune_below: f64) -> Result<Network> {
        let edges = self
            .rates
            .iter()
            .filter(|(_, _, r)| *r >= prune_below)
            .map(|&(source, target, r)| Edge { source, target, alpha: 1.0 / r })
            .collect();
        Network::new(self.node_count, Kernel::EXPONENTIAL, edges)
    }

    pub fn retained(&self, prune_below: f64) -> usize {
        self.rates.iter().filter(|(_, _, r)| *r >= prune_below).count()
    }
}

fn check_inputs(topology: &Topology, cascades: &[Cascade], config: &LearnConfig) -> Result<()> {
    if cascades.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if !(config.l1 >= 0.0) {
        return Err(Error::InvalidParameter { name: "l1 weight", value: config.l1 });
    }
    if !(config.initial_rate > 0.0) {
        return Err(Error::InvalidParameter { name: "initial rate", value: config.initial_rate });
    }
    if let Some(c) = cascades.iter().find(|c| c.node_count() != topology.node_count()) {
        return Err(Error::InvalidParameter { name: "cascade size", value: c.node_count() as f64 });
    }
    Ok(())
}

fn parents_by_target(topology: &Topology) -> Vec<Vec<NodeId>> {
    let mut parents = vec![Vec::new(); topology.node_count()];
    for &(j, i) in topology.edges() {
        parents[i].push(j);
    }
    parents
}

/// Estimate every edge rate of `topology`.
pub fn learn_rates(topology: &Topology, cascades: &[Cascade], config: &LearnConfig) -> Result<LearnedRates> {
    check_inputs(topology, cascades, config)?;
    let parents = parents_by_target(topology);
    let solved = map_indices(topology.node_count(), |i| {
        let problem = NodeObjective::collect(i, &parents[i], cascades);
        solve_node(&problem, i, config).map(|(rates, _)| rates)
    });
    let mut per_node = Vec::with_capacity(solved.len());
    for s in solved {
        per_node.push(s?);
    }
    let mut cursor = vec![0usize; topology.node_count()];
    let rates = topology
        .edges()
        .iter()
        .map(|&(j, i)| {
            let k = cursor[i];
            cursor[i] += 1;
            (j, i, per_node[i][k])
        })
        .collect();
    Ok(LearnedRates { node_count: topology.node_count(), rates })
}

/// Learn and prune, reporting scales `alpha = 1 / rate`.
pub fn learn_network(topology: &Topology, cascades: &[Cascade], config: &LearnConfig) -> Result<Network> {
    learn_rates(topology, cascades, config)?.to_network(config.prune_below)
}

/// Unpenalized held-out objective of `rates` (lower is better).
pub fn held_out_loss(topology: &Topology, rates: &LearnedRates, cascades: &[Cascade]) -> f64 {
    let parents = parents_by_target(topology);
    let mut by_target: Vec<Vec<f64>> = vec![Vec::new(); topology.node_count()];
    for &(_, i, r) in &rates.rates {
        by_target[i].push(r);
    }
    (0..topology.node_count())
        .map(|i| NodeObjective::collect(i, &parents[i], cascades).value(&by_target[i], 0.0))
        .sum()
}

/// Pick the l1 weight from `grid` by fitting on the first 80% of the
/// cascades and scoring the rest. Ties go to the earlier grid entry.
pub fn select_l1(topology: &Topology, cascades: &[Cascade], grid: &[f64], config: &LearnConfig) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter { name: "l1 grid size", value: 0.0 });
    }
    if cascades.len() < 2 {
        return Err(Error::EmptyTrainingSet);
    }
    let split = (cascades.len() * 4 / 5).clamp(1, cascades.len() - 1);
    let (train, validation) = cascades.split_at(split);
    let mut best = (f64::INFINITY, grid[0]);
    for &l1 in grid {
        let cfg = LearnConfig { l1, ..config.clone() };
        let rates = learn_rates(topology, train, &cfg)?;
        let loss = held_out_loss(topology, &rates, validation);
        if loss < best.0 {
            best = (loss, l1);
        }
    }
    Ok(best.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeCoverage {
    pub source: NodeId,
    pub target: NodeId,
    /// Cascades where the source was infected strictly before the target.
    pub count: usize,
}

impl EdgeCoverage {
    pub fn identifiable(&self) -> bool {
        self.count > 0
    }
}

pub fn coverage_report(topology: &Topology, cascades: &[Cascade]) -> Vec<EdgeCoverage> {
    topology
        .edges()
        .iter()
        .map(|&(source, target)| EdgeCoverage {
            source,
            target,
            count: cascades.iter().filter(|c| c.time(source) < c.time(target)).count(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::simulate::simulate_cascade;

    fn pair(gaps: &[f64]) -> Vec<Cascade> {
        gaps.iter().map(|&g| Cascade::new(vec![0.0, g], 0, f64::INFINITY).unwrap()).collect()
    }

    #[test]
    fn single_edge_mle_is_sample_mean() {
        let topo = Topology::new(2, vec![(0, 1)]).unwrap();
        let net = learn_network(&topo, &pair(&[1.0, 3.0]), &LearnConfig::default()).unwrap();
        assert!((net.edges()[0].alpha - 2.0).abs() < 1e-6);
        let net = learn_network(&topo, &pair(&[0.7; 5]), &LearnConfig::default()).unwrap();
        assert!((net.edges()[0].alpha - 0.7).abs() < 1e-6);
    }

    #[test]
    fn chain_rates_recovered() {
        let topo = Topology::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let truth = Network::new(
            3,
            Kernel::EXPONENTIAL,
            vec![Edge { source: 0, target: 1, alpha: 5.0 }, Edge { source: 1, target: 2, alpha: 10.0 }],
        )
        .unwrap();
        let mut rng = stream(12, &[]);
        let cascades: Vec<Cascade> =
            (0..2000).map(|_| simulate_cascade(&truth, 0, 0.0, f64::INFINITY, &mut rng).unwrap()).collect();
        let net = learn_network(&topo, &cascades, &LearnConfig::default()).unwrap();
        for (e, want) in net.edges().iter().zip([5.0, 10.0]) {
            assert!((e.alpha - want).abs() / want < 0.1, "{} vs {want}", e.alpha);
        }
    }

    #[test]
    fn censoring_lowers_rate() {
        // One infection after 1, one cascade censored at 9.
        let topo = Topology::new(2, vec![(0, 1)]).unwrap();
        let cascades = vec![
            Cascade::new(vec![0.0, 1.0], 0, 10.0).unwrap(),
            Cascade::new(vec![1.0, f64::INFINITY], 0, 10.0).unwrap(),
        ];
        let rates = learn_rates(&topo, &cascades, &LearnConfig::default()).unwrap();
        assert!((rates.rates[0].2 - 0.1).abs() < 1e-6);
    }

    #[test]
    fn unused_edge_is_pruned() {
        let topo = Topology::new(3, vec![(0, 1), (2, 1)]).unwrap();
        let cascades = pair(&[1.0, 2.0])
            .into_iter()
            .map(|c| Cascade::new(vec![c.time(0), c.time(1), f64::INFINITY], 0, f64::INFINITY).unwrap())
            .collect::<Vec<_>>();
        let rates = learn_rates(&topo, &cascades, &LearnConfig::default()).unwrap();
        assert_eq!(rates.rates[1].2, 0.0);
        assert_eq!(learn_network(&topo, &cascades, &LearnConfig::default()).unwrap().edge_count(), 1);
        let cov = coverage_report(&topo, &cascades);
        assert_eq!(cov[0].count, 2);
        assert!(!cov[1].identifiable());
    }

    #[test]
    fn objective_is_convex_on_random_chords() {
        let problem = NodeObjective {
            exposure: vec![1.0, 2.5, 0.3],
            infections: vec![vec![0], vec![0, 1], vec![1, 2], vec![2]],
        };
        let mut rng = stream(4, &[]);
        for _ in 0..1000 {
            let a: Vec<f64> = (0..3).map(|_| 0.01 + 3.0 * crate::rng::open_unit(&mut rng)).collect();
            let b: Vec<f64> = (0..3).map(|_| 0.01 + 3.0 * crate::rng::open_unit(&mut rng)).collect();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let lhs = problem.value(&mid, 0.2);
            let rhs = 0.5 * problem.value(&a, 0.2) + 0.5 * problem.value(&b, 0.2);
            assert!(lhs <= rhs + 1e-9);
        }
    }

    #[test]
    fn empty_training_set() {
        let topo = Topology::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(learn_rates(&topo, &[], &LearnConfig::default()), Err(Error::EmptyTrainingSet));
    }
}
