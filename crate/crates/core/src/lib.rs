//! Source identification for partially observed information cascades on
//! continuous-time diffusion networks.
//!
//! The crate has two stages. [`learn`] estimates exponential transmission
//! rates from fully observed historical cascades. [`identify`] takes a
//! network with known rates and a set of incomplete cascades and ranks the
//! hidden nodes by the maximized importance-sampling approximation of the
//! incomplete-cascade likelihood, returning the most likely source and its
//! initiation time.
//!
//! The crate is `no_std` compatible (it needs `alloc`). The `parallel`
//! feature evaluates independent candidates and samples on a rayon pool;
//! results are identical with or without it.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baseline;
pub mod bank;
pub mod error;
pub mod graph;
pub mod identify;
pub mod kernel;
pub mod kronecker;
pub mod learn;
pub mod likelihood;
pub mod math;
pub mod metrics;
pub mod piecewise;
pub mod rng;
pub mod search;
pub mod simulate;

mod par;

pub use bank::{EdgeDraws, SampleBank};
pub use error::{Error, Result};
pub use graph::{Edge, Network, NodeId, NodeSet, Topology};
pub use identify::{IdentifyConfig, SourceRanking};
pub use kernel::Kernel;
pub use kronecker::{KroneckerSpec, NetworkType};
pub use likelihood::{CascadeEvidence, LikelihoodEstimate};
pub use simulate::{Cascade, ObservedCascade};
