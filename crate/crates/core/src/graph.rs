//! Directed diffusion networks.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_positive, Error, Result};
use crate::kernel::Kernel;

pub type NodeId = usize;

/// Directed edge `source -> target` with Weibull scale `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub alpha: f64,
}

/// Dense membership set over `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    members: Vec<bool>,
    len: usize,
}

impl NodeSet {
    pub fn empty(node_count: usize) -> Self {
        NodeSet { members: vec![false; node_count], len: 0 }
    }

    pub fn full(node_count: usize) -> Self {
        NodeSet { members: vec![true; node_count], len: node_count }
    }

    pub fn from_nodes(node_count: usize, nodes: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let mut set = NodeSet::empty(node_count);
        for node in nodes {
            if node >= node_count {
                return Err(Error::InvalidNode { node, node_count });
            }
            set.insert(node);
        }
        Ok(set)
    }

    pub fn insert(&mut self, node: NodeId) -> bool {
        let fresh = !self.members[node];
        if fresh {
            self.members[node] = true;
            self.len += 1;
        }
        fresh
    }

    #[inline]
    pub fn contains(&self, node: NodeId) -> bool {
        self.members.get(node).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn universe(&self) -> usize {
        self.members.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn complement(&self) -> NodeSet {
        NodeSet {
            members: self.members.iter().map(|m| !m).collect(),
            len: self.members.len() - self.len,
        }
    }

    pub fn to_vec(&self) -> Vec<NodeId> {
        self.iter().collect()
    }
}

/// Edge set without transmission parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    node_count: usize,
    edges: Vec<(NodeId, NodeId)>,
}

impl Topology {
    pub fn new(node_count: usize, edges: Vec<(NodeId, NodeId)>) -> Result<Self> {
        validate_edges(node_count, edges.iter().copied())?;
        Ok(Topology { node_count, edges })
    }

    /// Every ordered pair of distinct nodes.
    pub fn all_pairs(node_count: usize) -> Self {
        let mut edges = Vec::with_capacity(node_count * node_count.saturating_sub(1));
        for j in 0..node_count {
            for i in 0..node_count {
                if i != j {
                    edges.push((j, i));
                }
            }
        }
        Topology { node_count, edges }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

fn validate_edges(node_count: usize, edges: impl Iterator<Item = (NodeId, NodeId)>) -> Result<()> {
    let mut seen: Vec<Vec<NodeId>> = vec![Vec::new(); node_count];
    for (source, target) in edges {
        for node in [source, target] {
            if node >= node_count {
                return Err(Error::InvalidNode { node, node_count });
            }
        }
        if source == target {
            return Err(Error::SelfLoop(source));
        }
        if seen[source].contains(&target) {
            return Err(Error::DuplicateEdge { source, target });
        }
        seen[source].push(target);
    }
    Ok(())
}

/// Compressed adjacency: `offsets[v]..offsets[v + 1]` indexes `edge_ids`.
#[derive(Debug, Clone)]
struct Adjacency {
    offsets: Vec<usize>,
    edge_ids: Vec<usize>,
}

impl Adjacency {
    fn build(node_count: usize, edges: &[Edge], key: impl Fn(&Edge) -> NodeId) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for e in edges {
            offsets[key(e) + 1] += 1;
        }
        for v in 0..node_count {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let mut edge_ids = vec![0usize; edges.len()];
        for (id, e) in edges.iter().enumerate() {
            let slot = &mut fill[key(e)];
            edge_ids[*slot] = id;
            *slot += 1;
        }
        Adjacency { offsets, edge_ids }
    }

    #[inline]
    fn of(&self, node: NodeId) -> &[usize] {
        &self.edge_ids[self.offsets[node]..self.offsets[node + 1]]
    }
}

/// Immutable diffusion network: nodes `0..n`, directed edges with
/// positive scales, and one kernel shape.
#[derive(Debug, Clone)]
pub struct Network {
    node_count: usize,
    kernel: Kernel,
    edges: Vec<Edge>,
    incoming: Adjacency,
    outgoing: Adjacency,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.node_count == other.node_count && self.kernel == other.kernel && self.edges == other.edges
    }
}

impl Network {
    pub fn new(node_count: usize, kernel: Kernel, edges: Vec<Edge>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidParameter { name: "node count", value: 0.0 });
        }
        validate_edges(node_count, edges.iter().map(|e| (e.source, e.target)))?;
        for e in &edges {
            check_positive("alpha", e.alpha)?;
        }
        let incoming = Adjacency::build(node_count, &edges, |e| e.target);
        let outgoing = Adjacency::build(node_count, &edges, |e| e.source);
        Ok(Network { node_count, kernel, edges, incoming, outgoing })
    }

    /// Attach the same scale to every edge of a topology.
    pub fn from_topology(topology: &Topology, kernel: Kernel, alpha: f64) -> Result<Self> {
        let edges = topology
            .edges()
            .iter()
            .map(|&(source, target)| Edge { source, target, alpha })
            .collect();
        Network::new(topology.node_count(), kernel, edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Ids of edges pointing into `node`.
    #[inline]
    pub fn in_edges(&self, node: NodeId) -> &[usize] {
        self.incoming.of(node)
    }

    /// Ids of edges leaving `node`.
    #[inline]
    pub fn out_edges(&self, node: NodeId) -> &[usize] {
        self.outgoing.of(node)
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.out_edges(node).len()
    }

    pub fn in_degree(&self, node: NodeId) -> usize {
        self.in_edges(node).len()
    }

    pub fn topology(&self) -> Topology {
        Topology {
            node_count: self.node_count,
            edges: self.edges.iter().map(|e| (e.source, e.target)).collect(),
        }
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if node < self.node_count {
            Ok(())
        } else {
            Err(Error::InvalidNode { node, node_count: self.node_count })
        }
    }

    /// Nodes reachable from `from` along directed paths, `from` included.
    pub fn reachable_set(&self, from: NodeId) -> Result<NodeSet> {
        self.check_node(from)?;
        Ok(self.bfs(from, |net, v| net.out_edges(v), |e| e.target))
    }

    /// Nodes that can reach `to`, `to` included.
    pub fn reaching_set(&self, to: NodeId) -> Result<NodeSet> {
        self.check_node(to)?;
        Ok(self.bfs(to, |net, v| net.in_edges(v), |e| e.source))
    }

    fn bfs(
        &self,
        start: NodeId,
        next: impl Fn(&Network, NodeId) -> &[usize],
        endpoint: impl Fn(&Edge) -> NodeId,
    ) -> NodeSet {
        let mut seen = NodeSet::empty(self.node_count);
        let mut queue = VecDeque::new();
        seen.insert(start);
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &id in next(self, v) {
                let w = endpoint(&self.edges[id]);
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Hidden nodes from which every observed node is reachable.
    ///
    /// One reverse breadth-first search per observed node; the result is
    /// sorted by node id.
    pub fn candidate_sources(&self, observed: &NodeSet, hidden: &NodeSet) -> Result<Vec<NodeId>> {
        if observed.is_empty() {
            return Err(Error::EmptyObservedSet);
        }
        let mut reach_count = vec![0usize; self.node_count];
        for o in observed.iter() {
            for v in self.reaching_set(o)?.iter() {
                reach_count[v] += 1;
            }
        }
        Ok(hidden.iter().filter(|&v| reach_count[v] == observed.len()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(n: usize, edges: &[(NodeId, NodeId)]) -> Network {
        Network::from_topology(&Topology::new(n, edges.to_vec()).unwrap(), Kernel::EXPONENTIAL, 1.0)
            .unwrap()
    }

    fn set(n: usize, nodes: &[NodeId]) -> NodeSet {
        NodeSet::from_nodes(n, nodes.iter().copied()).unwrap()
    }

    #[test]
    fn reachable_set_examples() {
        let chain = net(3, &[(0, 1), (1, 2)]);
        assert_eq!(chain.reachable_set(0).unwrap().to_vec(), [0, 1, 2]);
        assert_eq!(chain.reachable_set(2).unwrap().to_vec(), [2]);
        let split = net(4, &[(0, 1), (2, 3)]);
        assert_eq!(split.reachable_set(0).unwrap().to_vec(), [0, 1]);
        assert!(matches!(chain.reachable_set(3), Err(Error::InvalidNode { node: 3, .. })));
    }

    #[test]
    fn candidate_source_examples() {
        let chain = net(3, &[(0, 1), (1, 2)]);
        assert_eq!(chain.candidate_sources(&set(3, &[2]), &set(3, &[0, 1])).unwrap(), [0, 1]);
        assert_eq!(chain.candidate_sources(&set(3, &[1, 2]), &set(3, &[0])).unwrap(), [0]);
        let star = net(3, &[(0, 1), (0, 2)]);
        assert_eq!(star.candidate_sources(&set(3, &[1, 2]), &set(3, &[0])).unwrap(), [0]);
        assert!(star.candidate_sources(&set(3, &[1, 2]), &set(3, &[1])).unwrap().is_empty());
        assert_eq!(
            star.candidate_sources(&set(3, &[]), &set(3, &[0])),
            Err(Error::EmptyObservedSet)
        );
    }

    #[test]
    fn construction_rejects_bad_edges() {
        let k = Kernel::EXPONENTIAL;
        let e = |s, t, a| Edge { source: s, target: t, alpha: a };
        assert_eq!(Network::new(2, k, vec![e(0, 0, 1.0)]), Err(Error::SelfLoop(0)));
        assert_eq!(
            Network::new(2, k, vec![e(0, 1, 1.0), e(0, 1, 2.0)]),
            Err(Error::DuplicateEdge { source: 0, target: 1 })
        );
        assert!(Network::new(2, k, vec![e(0, 1, 0.0)]).is_err());
        assert!(Network::new(2, k, vec![e(0, 5, 1.0)]).is_err());
        assert!(Network::new(2, k, vec![]).is_ok());
    }

    #[test]
    fn adjacency_lists() {
        let n = net(4, &[(0, 1), (2, 1), (1, 3), (0, 3)]);
        let parents: Vec<_> = n.in_edges(1).iter().map(|&id| n.edge(id).source).collect();
        assert_eq!(parents, [0, 2]);
        assert_eq!(n.out_degree(0), 2);
        assert_eq!(n.in_degree(3), 2);
        assert_eq!(n.reaching_set(3).unwrap().to_vec(), [0, 1, 2, 3]);
    }

    #[test]
    fn node_set_ops() {
        let s = set(5, &[1, 3]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.complement().to_vec(), [0, 2, 4]);
        assert!(!s.contains(10));
        assert!(NodeSet::from_nodes(2, [3]).is_err());
    }
}
