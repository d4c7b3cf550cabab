//! Forward cascade generation and observation masking.
//!
//! With one transmission delay drawn per edge, the infection time of every
//! node is the source time plus the shortest-path distance from the source
//! under those delays.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::graph::{Network, NodeId, NodeSet};
use crate::math::ceil;

#[derive(Clone, Copy)]
struct Pending {
    time: f64,
    node: NodeId,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // Min-heap on time, ties by node id.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.node.cmp(&self.node))
    }
}

/// Reusable Dijkstra buffers.
#[derive(Default)]
pub struct ShortestPaths {
    heap: BinaryHeap<Pending>,
}

impl ShortestPaths {
    pub fn new() -> Self {
        Self::default()
    }

    /// Distances from `source` into `out`, unreachable nodes at `+inf`.
    /// `edge_times` must be nonnegative.
    pub fn from_source(&mut self, net: &Network, edge_times: &[f64], source: NodeId, out: &mut [f64]) {
        self.run(net, edge_times, source, out, Direction::Forward);
    }

    /// Distances from every node to `target` (reverse search).
    pub fn to_target(&mut self, net: &Network, edge_times: &[f64], target: NodeId, out: &mut [f64]) {
        self.run(net, edge_times, target, out, Direction::Backward);
    }

    fn run(&mut self, net: &Network, edge_times: &[f64], start: NodeId, out: &mut [f64], dir: Direction) {
        out.fill(f64::INFINITY);
        out[start] = 0.0;
        self.heap.clear();
        self.heap.push(Pending { time: 0.0, node: start });
        while let Some(Pending { time, node }) = self.heap.pop() {
            if time > out[node] {
                continue;
            }
            let adjacent = match dir {
                Direction::Forward => net.out_edges(node),
                Direction::Backward => net.in_edges(node),
            };
            for &id in adjacent {
                let edge = net.edge(id);
                let next = match dir {
                    Direction::Forward => edge.target,
                    Direction::Backward => edge.source,
                };
                let candidate = time + edge_times[id];
                if candidate < out[next] {
                    out[next] = candidate;
                    self.heap.push(Pending { time: candidate, node: next });
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Backward,
}

fn check_edge_times(net: &Network, edge_times: &[f64]) -> Result<()> {
    if edge_times.len() != net.edge_count() {
        return Err(Error::InvalidParameter { name: "edge time count", value: edge_times.len() as f64 });
    }
    if let Some((edge, &time)) = edge_times.iter().enumerate().find(|(_, t)| !(**t >= 0.0)) {
        return Err(Error::NegativeEdgeTime { edge, time });
    }
    Ok(())
}

/// Shortest-path infection times from `source` at time zero.
pub fn shortest_path_times(net: &Network, edge_times: &[f64], source: NodeId) -> Result<Vec<f64>> {
    net.check_node(source)?;
    check_edge_times(net, edge_times)?;
    let mut out = vec![0.0; net.node_count()];
    ShortestPaths::new().from_source(net, edge_times, source, &mut out);
    Ok(out)
}

/// Shortest-path distance from every node to `target`.
pub fn shortest_path_times_to(net: &Network, edge_times: &[f64], target: NodeId) -> Result<Vec<f64>> {
    net.check_node(target)?;
    check_edge_times(net, edge_times)?;
    let mut out = vec![0.0; net.node_count()];
    ShortestPaths::new().to_target(net, edge_times, target, &mut out);
    Ok(out)
}

/// Fully observed cascade. `times[i]` is `+inf` for nodes not infected
/// before the absolute cut-off `window`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    times: Vec<f64>,
    source: NodeId,
    window: f64,
}

impl Cascade {
    pub fn new(times: Vec<f64>, source: NodeId, window: f64) -> Result<Self> {
        if source >= times.len() {
            return Err(Error::InvalidNode { node: source, node_count: times.len() });
        }
        let t_s = times[source];
        if !t_s.is_finite() {
            return Err(Error::InvalidCascade("source must be infected"));
        }
        if !(window > t_s) {
            return Err(Error::InvalidCascade("window must end after the source time"));
        }
        for &t in &times {
            if t.is_nan() || t == f64::NEG_INFINITY {
                return Err(Error::InvalidCascade("infection times must be finite or +inf"));
            }
            if t.is_finite() && (t < t_s || t >= window) {
                return Err(Error::InvalidCascade("infection time outside [source time, window)"));
            }
        }
        Ok(Cascade { times, source, window })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, node: NodeId) -> f64 {
        self.times[node]
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn source_time(&self) -> f64 {
        self.times[self.source]
    }

    /// Absolute observation cut-off.
    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn node_count(&self) -> usize {
        self.times.len()
    }

    pub fn is_infected(&self, node: NodeId) -> bool {
        self.times[node].is_finite()
    }

    pub fn infected(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.times.iter().enumerate().filter(|(_, t)| t.is_finite()).map(|(i, _)| i)
    }

    pub fn infected_count(&self) -> usize {
        self.times.iter().filter(|t| t.is_finite()).count()
    }

    /// Observe every infected node except the source.
    pub fn observe_all(&self) -> Result<ObservedCascade> {
        ObservedCascade::new(
            self.node_count(),
            self.infected().filter(|&i| i != self.source).map(|i| (i, self.times[i])).collect(),
            self.window,
        )
    }
}

/// Partially observed cascade: infection times of the observed set `O`;
/// every other node, the source included, is hidden.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedCascade {
    node_count: usize,
    observed: BTreeMap<NodeId, f64>,
    window: f64,
}

impl ObservedCascade {
    pub fn new(node_count: usize, observed: BTreeMap<NodeId, f64>, window: f64) -> Result<Self> {
        for (&node, &t) in &observed {
            if node >= node_count {
                return Err(Error::InvalidNode { node, node_count });
            }
            if !t.is_finite() {
                return Err(Error::InvalidCascade("observed times must be finite"));
            }
            if t >= window {
                return Err(Error::InvalidCascade("observed time at or after the window"));
            }
        }
        Ok(ObservedCascade { node_count, observed, window })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn observed(&self) -> &BTreeMap<NodeId, f64> {
        &self.observed
    }

    pub fn observed_time(&self, node: NodeId) -> Option<f64> {
        self.observed.get(&node).copied()
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn observed_set(&self) -> NodeSet {
        let mut set = NodeSet::empty(self.node_count);
        for &node in self.observed.keys() {
            set.insert(node);
        }
        set
    }

    pub fn hidden_set(&self) -> NodeSet {
        self.observed_set().complement()
    }

    /// Earliest observed infection time; the source must precede it.
    pub fn min_time(&self) -> f64 {
        self.observed.values().copied().fold(f64::INFINITY, f64::min)
    }

    /// The same cascade with every time moved by `offset`.
    pub fn shifted(&self, offset: f64) -> ObservedCascade {
        ObservedCascade {
            node_count: self.node_count,
            observed: self.observed.iter().map(|(&n, &t)| (n, t + offset)).collect(),
            window: self.window + offset,
        }
    }
}

/// Run the generative process from `source` at `t_s` until `t_s + window`.
pub fn simulate_cascade<R: RngCore + ?Sized>(
    net: &Network,
    source: NodeId,
    t_s: f64,
    window: f64,
    rng: &mut R,
) -> Result<Cascade> {
    net.check_node(source)?;
    if !(window > 0.0) {
        return Err(Error::InvalidParameter { name: "window", value: window });
    }
    if !t_s.is_finite() {
        return Err(Error::InvalidParameter { name: "source time", value: t_s });
    }
    let kernel = net.kernel();
    let delays: Vec<f64> = net.edges().iter().map(|e| kernel.sample(e.alpha, rng)).collect();
    let mut times = vec![0.0; net.node_count()];
    ShortestPaths::new().from_source(net, &delays, source, &mut times);
    let cutoff = t_s + window;
    for t in times.iter_mut() {
        let shifted = *t + t_s;
        *t = if shifted < cutoff { shifted } else { f64::INFINITY };
    }
    Cascade::new(times, source, cutoff)
}

/// Number of observed nodes for a fraction of `eligible` infected nodes.
pub fn observed_count(fraction: f64, eligible: usize) -> usize {
    // Guard against 0.1 * 40 landing a hair above 4.
    let raw = fraction * eligible as f64;
    (ceil(raw - 1e-9 * raw.max(1.0)) as usize).clamp(1, eligible.max(1))
}

/// Observe a uniform random `ceil(fraction * (#infected - 1))` of the
/// infected non-source nodes.
pub fn mask_cascade<R: RngCore + ?Sized>(
    cascade: &Cascade,
    fraction: f64,
    rng: &mut R,
) -> Result<ObservedCascade> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter { name: "observe fraction", value: fraction });
    }
    let mut eligible: Vec<NodeId> = cascade.infected().filter(|&i| i != cascade.source()).collect();
    if eligible.is_empty() {
        return Err(Error::TooFewInfected { infected: eligible.len() + 1 });
    }
    let keep = observed_count(fraction, eligible.len());
    let (chosen, _) = eligible.partial_shuffle(rng, keep);
    let observed = chosen.iter().map(|&i| (i, cascade.time(i))).collect();
    ObservedCascade::new(cascade.node_count(), observed, cascade.window())
}
