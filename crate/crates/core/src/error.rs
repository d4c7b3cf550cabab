use alloc::vec::Vec;
use core::fmt;

use crate::graph::NodeId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidNode { node: NodeId, node_count: usize },
    InvalidParameter { name: &'static str, value: f64 },
    SelfLoop(NodeId),
    DuplicateEdge { source: NodeId, target: NodeId },
    NegativeEdgeTime { edge: usize, time: f64 },
    TooManyEdges { requested: usize, available: usize },
    EmptyObservedSet,
    TooFewInfected { infected: usize },
    InvalidCascade(&'static str),
    /// A child node has no parent infected strictly before it.
    NoFeasibleParent { child: Option<NodeId> },
    /// The operation is only defined for the exponential kernel (shape 1).
    NonExponentialKernel { shape: f64 },
    EmptyTrainingSet,
    EmptyTrials,
    NoFeasibleSource,
    InvalidInterval { low: f64, high: f64 },
    /// Projected gradient failed to decrease the objective.
    LearningDiverged { node: NodeId, trace: Vec<f64> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidNode { node, node_count } => {
                write!(f, "node {node} out of range for a network of {node_count} nodes")
            }
            Error::InvalidParameter { name, value } => write!(f, "invalid {name}: {value}"),
            Error::SelfLoop(node) => write!(f, "self-loop on node {node}"),
            Error::DuplicateEdge { source, target } => {
                write!(f, "duplicate edge {source} -> {target}")
            }
            Error::NegativeEdgeTime { edge, time } => {
                write!(f, "edge {edge} has negative transmission time {time}")
            }
            Error::TooManyEdges { requested, available } => write!(
                f,
                "requested {requested} edges but only {available} admissible entries exist"
            ),
            Error::EmptyObservedSet => f.write_str("observed node set is empty"),
            Error::TooFewInfected { infected } => {
                write!(f, "cascade has {infected} infected nodes, need at least 2")
            }
            Error::InvalidCascade(why) => write!(f, "invalid cascade: {why}"),
            Error::NoFeasibleParent { child: Some(c) } => {
                write!(f, "node {c} has no parent infected before it")
            }
            Error::NoFeasibleParent { child: None } => f.write_str("empty feasible-parent set"),
            Error::NonExponentialKernel { shape } => {
                write!(f, "operation requires the exponential kernel, got shape {shape}")
            }
            Error::EmptyTrainingSet => f.write_str("training set is empty"),
            Error::EmptyTrials => f.write_str("no trials to aggregate"),
            Error::NoFeasibleSource => f.write_str("no feasible source"),
            Error::InvalidInterval { low, high } => write!(f, "invalid interval ({low}, {high})"),
            Error::LearningDiverged { node, trace } => write!(
                f,
                "rate estimation for node {node} failed to decrease the objective after {} iterations (last {:?})",
                trace.len(),
                trace.last()
            ),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}
