//! Stochastic Kronecker benchmark graphs.
//!
//! Entry `(u, v)` of the `power`-th Kronecker power of a 2x2 seed matrix is
//! the product of `seed[u_b][v_b]` over the bits `b` of `u` and `v`. Each
//! off-diagonal entry is kept with that probability. When a target edge
//! count is given the sample is then made exact: the least likely sampled
//! entries are dropped, or the most likely unsampled entries are added.
//! Ties in probability are broken by the entry's own uniform draw, so the
//! adjustment prefers entries that came closest to flipping.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::str::FromStr;

use rand::RngCore;

use crate::error::{check_positive, Error, Result};
use crate::graph::{Edge, Network, NodeId, Topology};
use crate::kernel::Kernel;
use crate::rng::open_unit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetworkType {
    CorePeriphery,
    Random,
    Hierarchical,
}

impl NetworkType {
    pub fn seed_matrix(self) -> [[f64; 2]; 2] {
        match self {
            NetworkType::CorePeriphery => [[0.9, 0.5], [0.5, 0.3]],
            NetworkType::Random => [[0.5, 0.5], [0.5, 0.5]],
            NetworkType::Hierarchical => [[0.9, 0.1], [0.1, 0.9]],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NetworkType::CorePeriphery => "core-periphery",
            NetworkType::Random => "random",
            NetworkType::Hierarchical => "hierarchical",
        }
    }
}

impl FromStr for NetworkType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core-periphery" => Ok(NetworkType::CorePeriphery),
            "random" => Ok(NetworkType::Random),
            "hierarchical" => Ok(NetworkType::Hierarchical),
            _ => Err(Error::InvalidParameter { name: "network type", value: f64::NAN }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerSpec {
    pub seed: [[f64; 2]; 2],
    pub power: u32,
    /// Exact edge count after adjustment; `None` keeps the raw Bernoulli sample.
    pub target_edges: Option<usize>,
}

impl KroneckerSpec {
    pub fn new(seed: [[f64; 2]; 2], power: u32, target_edges: Option<usize>) -> Result<Self> {
        for &p in seed.iter().flatten() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter { name: "seed probability", value: p });
            }
        }
        if power == 0 || power > 16 {
            return Err(Error::InvalidParameter { name: "kronecker power", value: power as f64 });
        }
        Ok(KroneckerSpec { seed, power, target_edges })
    }

    pub fn preset(kind: NetworkType, power: u32, target_edges: Option<usize>) -> Result<Self> {
        KroneckerSpec::new(kind.seed_matrix(), power, target_edges)
    }

    pub fn node_count(&self) -> usize {
        1usize << self.power
    }

    pub fn probability(&self, u: NodeId, v: NodeId) -> f64 {
        (0..self.power).fold(1.0, |p, b| p * self.seed[(u >> b) & 1][(v >> b) & 1])
    }

    /// Sum over every matrix entry, diagonal included: `(sum of seed)^power`.
    pub fn expected_entry_count(&self) -> f64 {
        let total: f64 = self.seed.iter().flatten().sum();
        libm::pow(total, self.power as f64)
    }
}

struct Entry {
    u: NodeId,
    v: NodeId,
    p: f64,
    draw: f64,
}

pub fn generate_kronecker<R: RngCore + ?Sized>(spec: &KroneckerSpec, rng: &mut R) -> Result<Topology> {
    let n = spec.node_count();
    if let Some(target) = spec.target_edges {
        let available = n * (n - 1);
        if target > available {
            return Err(Error::TooManyEdges { requested: target, available });
        }
    }
    let mut sampled = Vec::new();
    let mut unsampled = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let p = spec.probability(u, v);
            let draw = open_unit(rng);
            let entry = Entry { u, v, p, draw };
            if draw < p {
                sampled.push(entry);
            } else if p > 0.0 {
                unsampled.push(entry);
            }
        }
    }
    if let Some(target) = spec.target_edges {
        if sampled.len() > target {
            // Most likely first, then the draws furthest below p.
            sampled.sort_by(by_likelihood);
            sampled.truncate(target);
        } else if sampled.len() < target {
            let missing = target - sampled.len();
            if missing > unsampled.len() {
                return Err(Error::TooManyEdges {
                    requested: target,
                    available: sampled.len() + unsampled.len(),
                });
            }
            unsampled.sort_by(by_likelihood);
            sampled.extend(unsampled.drain(..missing));
        }
    }
    sampled.sort_by_key(|e| (e.u, e.v));
    Topology::new(n, sampled.into_iter().map(|e| (e.u, e.v)).collect())
}

fn by_likelihood(a: &Entry, b: &Entry) -> Ordering {
    b.p.total_cmp(&a.p).then(a.draw.total_cmp(&b.draw))
}

/// Draw every edge scale i.i.d. uniform on `[low, high]`.
pub fn assign_rates<R: RngCore + ?Sized>(
    topology: &Topology,
    low: f64,
    high: f64,
    kernel: Kernel,
    rng: &mut R,
) -> Result<Network> {
    check_positive("rate lower bound", low)?;
    check_positive("rate upper bound", high)?;
    if low > high {
        return Err(Error::InvalidInterval { low, high });
    }
    let edges = topology
        .edges()
        .iter()
        .map(|&(source, target)| Edge { source, target, alpha: low + (high - low) * open_unit(rng) })
        .collect();
    Network::new(topology.node_count(), kernel, edges)
}
