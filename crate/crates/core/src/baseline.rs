//! Reference rankings.
//!
//! * Out-degree: candidates that reach every observed node, by decreasing
//!   out-degree.
//! * Monte Carlo: each hidden node is scored by forward-simulating from it
//!   and counting the largest number of observed nodes infected within a
//!   window as long as the observed time span, averaged over runs and
//!   summed over cascades.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{Network, NodeId};
use crate::identify::common_candidates;
use crate::par::map_indices;
use crate::rng::stream;
use crate::simulate::{ObservedCascade, ShortestPaths};

/// A node and its baseline score, best first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub node: NodeId,
    pub score: f64,
}

fn sort_desc(entries: &mut [Scored]) {
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.node.cmp(&b.node)));
}

/// Feasible candidates by decreasing out-degree, ties by node id.
pub fn outdegree_ranking(net: &Network, cascades: &[ObservedCascade]) -> Result<Vec<Scored>> {
    let mut entries: Vec<Scored> = common_candidates(net, cascades)?
        .into_iter()
        .map(|node| Scored { node, score: net.out_degree(node) as f64 })
        .collect();
    sort_desc(&mut entries);
    Ok(entries)
}

/// Largest number of `times` inside any window `[x, x + width]`.
fn max_in_window(times: &mut [f64], width: f64) -> usize {
    times.sort_by(f64::total_cmp);
    let finite = times.iter().take_while(|t| t.is_finite()).count();
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..finite {
        while times[hi] - times[lo] > width {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}

/// Monte Carlo coverage score of every node hidden in all cascades.
///
/// One set of delays per run serves every candidate: reverse shortest
/// paths from each observed node give the infection time of that node
/// from every possible source. Run `r` of cascade `c` draws from
/// `stream(seed, [c, r])`.
pub fn montecarlo_ranking(net: &Network, cascades: &[ObservedCascade], runs: usize, seed: u64) -> Result<Vec<Scored>> {
    if cascades.is_empty() {
        return Err(Error::EmptyObservedSet);
    }
    if runs == 0 {
        return Err(Error::InvalidParameter { name: "simulation runs", value: 0.0 });
    }
    let n = net.node_count();
    let mut hidden_everywhere = vec![true; n];
    for c in cascades {
        if c.node_count() != n {
            return Err(Error::InvalidCascade("cascade and network sizes differ"));
        }
        if c.observed().is_empty() {
            return Err(Error::EmptyObservedSet);
        }
        for &o in c.observed().keys() {
            hidden_everywhere[o] = false;
        }
    }
    let kernel = net.kernel();
    let mut totals = vec![0.0; n];
    for (ci, cascade) in cascades.iter().enumerate() {
        let observed: Vec<NodeId> = cascade.observed().keys().copied().collect();
        let times: Vec<f64> = cascade.observed().values().copied().collect();
        let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = hi - lo;
        let per_run = map_indices(runs, |r| {
            let mut rng = stream(seed, &[ci as u64, r as u64]);
            let delays: Vec<f64> = net.edges().iter().map(|e| kernel.sample(e.alpha, &mut rng)).collect();
            let mut paths = ShortestPaths::new();
            // dist[k * n + s]: time from s to observed node k.
            let mut dist = vec![0.0; observed.len() * n];
            for (k, &o) in observed.iter().enumerate() {
                paths.to_target(net, &delays, o, &mut dist[k * n..(k + 1) * n]);
            }
            let mut counts = vec![0usize; n];
            let mut arrivals = vec![0.0; observed.len()];
            for (s, count) in counts.iter_mut().enumerate() {
                if !hidden_everywhere[s] {
                    continue;
                }
                for k in 0..observed.len() {
                    arrivals[k] = dist[k * n + s];
                }
                *count = max_in_window(&mut arrivals, width);
            }
            counts
        });
        for counts in per_run {
            for (s, c) in counts.into_iter().enumerate() {
                totals[s] += c as f64;
            }
        }
    }
    let mut entries: Vec<Scored> = (0..n)
        .filter(|&s| hidden_everywhere[s])
        .map(|node| Scored { node, score: totals[node] / runs as f64 })
        .collect();
    sort_desc(&mut entries);
    Ok(entries)
}
