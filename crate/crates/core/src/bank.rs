//! Reusable Monte Carlo draws.
//!
//! [`EdgeDraws`] holds `L` independent delay vectors, one value per edge.
//! They do not depend on the source or its start time, so one set of draws
//! serves every candidate. [`SampleBank`] turns them into shortest-path
//! infection times from one candidate at time zero; under source time
//! `t_s` every time is simply offset by `t_s`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{Network, NodeId};
use crate::par::map_indices;
use crate::rng::stream;
use crate::simulate::ShortestPaths;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDraws {
    samples: usize,
    edges: usize,
    times: Vec<f64>,
}

impl EdgeDraws {
    /// Sample `l` draws from `stream(seed, [l])`, so each draw is fixed by
    /// the seed regardless of how work is scheduled.
    pub fn sample(net: &Network, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidParameter { name: "sample count", value: 0.0 });
        }
        let kernel = net.kernel();
        let rows = map_indices(samples, |l| {
            let mut rng = stream(seed, &[l as u64]);
            net.edges().iter().map(|e| kernel.sample(e.alpha, &mut rng)).collect::<Vec<f64>>()
        });
        Ok(EdgeDraws { samples, edges: net.edge_count(), times: rows.concat() })
    }

    /// Wrap explicit delays, `times[l * edge_count + e]`.
    pub fn from_times(edge_count: usize, times: Vec<f64>) -> Result<Self> {
        if edge_count == 0 || times.is_empty() || times.len() % edge_count != 0 {
            return Err(Error::InvalidParameter { name: "edge draw count", value: times.len() as f64 });
        }
        if let Some((i, &time)) = times.iter().enumerate().find(|(_, t)| !(**t >= 0.0)) {
            return Err(Error::NegativeEdgeTime { edge: i % edge_count, time });
        }
        Ok(EdgeDraws { samples: times.len() / edge_count, edges: edge_count, times })
    }

    pub fn sample_count(&self) -> usize {
        self.samples
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn sample_times(&self, l: usize) -> &[f64] {
        &self.times[l * self.edges..(l + 1) * self.edges]
    }
}

/// Shortest-path times `t^l_i` from one candidate source at time zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBank {
    source: NodeId,
    samples: usize,
    nodes: usize,
    times: Vec<f64>,
}

impl SampleBank {
    pub fn build(net: &Network, draws: &EdgeDraws, source: NodeId) -> Result<Self> {
        net.check_node(source)?;
        if draws.edge_count() != net.edge_count() {
            return Err(Error::InvalidParameter { name: "edge draw width", value: draws.edge_count() as f64 });
        }
        let n = net.node_count();
        let rows = map_indices(draws.sample_count(), |l| {
            let mut out = vec![0.0; n];
            ShortestPaths::new().from_source(net, draws.sample_times(l), source, &mut out);
            out
        });
        Ok(SampleBank { source, samples: draws.sample_count(), nodes: n, times: rows.concat() })
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sample_count(&self) -> usize {
        self.samples
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// Base times of sample `l`, indexed by node.
    pub fn sample(&self, l: usize) -> &[f64] {
        &self.times[l * self.nodes..(l + 1) * self.nodes]
    }

    /// Infection times of sample `l` when the source starts at `t_s`.
    pub fn shifted(&self, l: usize, t_s: f64) -> Vec<f64> {
        self.sample(l).iter().map(|&t| t + t_s).collect()
    }

    /// Largest finite base time over `nodes` and all samples.
    pub fn max_time_over(&self, nodes: impl Iterator<Item = NodeId> + Clone) -> f64 {
        let mut max: f64 = 0.0;
        for l in 0..self.samples {
            let row = self.sample(l);
            for i in nodes.clone() {
                if row[i].is_finite() {
                    max = max.max(row[i]);
                }
            }
        }
        max
    }
}

/// Draw `samples` delay vectors and build the bank for `source`.
pub fn build_sample_bank(net: &Network, source: NodeId, samples: usize, seed: u64) -> Result<SampleBank> {
    SampleBank::build(net, &EdgeDraws::sample(net, samples, seed)?, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Topology;
    use crate::kernel::Kernel;

    fn diamond() -> Network {
        let topo = Topology::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 0)]).unwrap();
        Network::from_topology(&topo, Kernel::EXPONENTIAL, 2.0).unwrap()
    }

    #[test]
    fn offset_is_exact() {
        let net = diamond();
        let bank = build_sample_bank(&net, 0, 16, 9).unwrap();
        for l in 0..16 {
            let shifted = bank.shifted(l, 5.0);
            for (i, &t) in bank.sample(l).iter().enumerate() {
                assert_eq!(shifted[i], t + 5.0);
            }
        }
    }

    #[test]
    fn draws_shared_across_sources() {
        let net = diamond();
        let draws = EdgeDraws::sample(&net, 8, 3).unwrap();
        let a = SampleBank::build(&net, &draws, 0).unwrap();
        let b = SampleBank::build(&net, &draws, 1).unwrap();
        assert_eq!(a.sample_count(), b.sample_count());
        assert_eq!(EdgeDraws::sample(&net, 8, 3).unwrap(), draws);
        // Same delays: distance 0 -> 1 plus 1 -> 3 bounds 0 -> 3.
        for l in 0..8 {
            assert!(a.sample(l)[3] <= a.sample(l)[1] + b.sample(l)[3] + 1e-12);
        }
    }

    #[test]
    fn triangle_consistency() {
        let net = diamond();
        let draws = EdgeDraws::sample(&net, 32, 4).unwrap();
        let bank = SampleBank::build(&net, &draws, 2).unwrap();
        for l in 0..32 {
            let t = bank.sample(l);
            assert_eq!(t[2], 0.0);
            for (id, e) in net.edges().iter().enumerate() {
                assert!(t[e.target] <= t[e.source] + draws.sample_times(l)[id]);
            }
        }
    }

    #[test]
    fn first_samples_do_not_depend_on_count() {
        let net = diamond();
        let small = EdgeDraws::sample(&net, 4, 5).unwrap();
        let large = EdgeDraws::sample(&net, 40, 5).unwrap();
        for l in 0..4 {
            assert_eq!(small.sample_times(l), large.sample_times(l));
        }
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(EdgeDraws::sample(&diamond(), 0, 1).is_err());
    }
}
