//! Source identification over one or more incomplete cascades.
//!
//! For each cascade, every hidden node that reaches all observed nodes is
//! scored by the maximum over source times of `log phi_L`. The samples of
//! a cascade are drawn once and shared by all candidates, so candidates
//! are compared under common random numbers. Cascades assumed to share a
//! source are combined by summing per-cascade maxima.

use alloc::vec::Vec;

use crate::bank::{EdgeDraws, SampleBank};
use crate::error::{Error, Result};
use crate::graph::{Network, NodeId};
use crate::likelihood::CascadeEvidence;
use crate::par::map_indices;
use crate::piecewise::{PieceSearch, PiecewiseLikelihood};
use crate::rng::derive_seed;
use crate::simulate::ObservedCascade;

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifyConfig {
    /// Importance samples per cascade.
    pub samples: usize,
    /// The search starts `kappa` times the largest sampled observed-node
    /// time before the earliest observation.
    pub kappa: f64,
    pub search: PieceSearch,
    pub seed: u64,
}

impl Default for IdentifyConfig {
    fn default() -> Self {
        IdentifyConfig { samples: 400, kappa: 3.0, search: PieceSearch::default(), seed: 0 }
    }
}

/// Best source time and likelihood of one candidate on one cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    pub node: NodeId,
    /// NaN when the candidate has zero likelihood everywhere.
    pub t: f64,
    pub log_likelihood: f64,
    pub lower_bound: f64,
    pub pieces: usize,
    pub evaluated_pieces: usize,
    pub evaluations: usize,
    /// Samples with zero weight at `t`.
    pub dropped: usize,
}

/// All candidate scores of one cascade, sorted by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeScores {
    pub candidates: Vec<CandidateScore>,
    pub observed: usize,
    pub m_size: usize,
}

impl CascadeScores {
    pub fn get(&self, node: NodeId) -> Option<&CandidateScore> {
        self.candidates.binary_search_by_key(&node, |c| c.node).ok().map(|i| &self.candidates[i])
    }

    pub fn total_pieces(&self) -> usize {
        self.candidates.iter().map(|c| c.pieces).sum()
    }

    pub fn total_dropped(&self) -> usize {
        self.candidates.iter().map(|c| c.dropped).sum()
    }
}

/// `min observed time - kappa * max_{l, i in O} t^l_i`.
pub fn search_lower_bound(evidence: &CascadeEvidence, bank: &SampleBank, kappa: f64) -> f64 {
    let span = kappa * bank.max_time_over(evidence.observed_nodes());
    evidence.min_time() - span.max(1e-9)
}

/// Maximize `log phi_L` over the source time of one candidate.
pub fn best_time_for_source(
    evidence: &CascadeEvidence,
    bank: &SampleBank,
    config: &IdentifyConfig,
) -> Result<CandidateScore> {
    let source = bank.source();
    let t_lo = search_lower_bound(evidence, bank, config.kappa);
    let pw = PiecewiseLikelihood::build(evidence, bank, source, t_lo)?;
    let best = pw.maximize(&config.search);
    let dropped = if best.is_feasible() {
        (0..bank.sample_count())
            .filter(|&l| evidence.sample_log_term(source, bank.sample(l), best.t) == f64::NEG_INFINITY)
            .count()
    } else {
        bank.sample_count()
    };
    Ok(CandidateScore {
        node: source,
        t: best.t,
        log_likelihood: best.log_value,
        lower_bound: t_lo,
        pieces: best.pieces,
        evaluated_pieces: best.evaluated_pieces,
        evaluations: best.evaluations,
        dropped,
    })
}

/// Score the candidates of one cascade. `cascade_index` selects the sample
/// stream; `restrict`, when given, limits scoring to those nodes.
pub fn score_cascade(
    net: &Network,
    cascade: &ObservedCascade,
    cascade_index: u64,
    restrict: Option<&[NodeId]>,
    config: &IdentifyConfig,
) -> Result<CascadeScores> {
    let evidence = CascadeEvidence::new(net, cascade)?;
    let mut candidates = evidence.candidates(net)?;
    if let Some(allowed) = restrict {
        candidates.retain(|c| allowed.binary_search(c).is_ok());
    }
    let draws = EdgeDraws::sample(net, config.samples, derive_seed(config.seed, &[cascade_index]))?;
    let scores = map_indices(candidates.len(), |i| {
        let bank = SampleBank::build(net, &draws, candidates[i])?;
        best_time_for_source(&evidence, &bank, config)
    });
    Ok(CascadeScores {
        candidates: scores.into_iter().collect::<Result<Vec<_>>>()?,
        observed: cascade.observed().len(),
        m_size: evidence.m_nodes().count(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedSource {
    pub node: NodeId,
    /// Best source time per cascade.
    pub best_times: Vec<f64>,
    pub total_log_likelihood: f64,
}

/// Candidates sorted by total log-likelihood, ties by smaller node id.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceRanking {
    pub entries: Vec<RankedSource>,
}

impl SourceRanking {
    pub fn best(&self) -> &RankedSource {
        &self.entries[0]
    }

    pub fn top(&self, k: usize) -> &[RankedSource] {
        &self.entries[..k.min(self.entries.len())]
    }

    /// Zero-based rank of `node`.
    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.entries.iter().position(|e| e.node == node)
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        self.entries.iter().map(|e| e.node).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Sum per-cascade maxima over the candidates feasible in every cascade.
/// A cascade in which every common candidate has zero estimated likelihood
/// scales all products alike and is left out of the totals.
pub fn combine(per_cascade: &[CascadeScores]) -> Result<SourceRanking> {
    let Some(first) = per_cascade.first() else {
        return Err(Error::EmptyObservedSet);
    };
    let common: Vec<NodeId> = first
        .candidates
        .iter()
        .map(|c| c.node)
        .filter(|&node| per_cascade.iter().all(|s| s.get(node).is_some()))
        .collect();
    if common.is_empty() {
        return Err(Error::NoFeasibleSource);
    }
    let informative: Vec<bool> = per_cascade
        .iter()
        .map(|s| common.iter().any(|&node| s.get(node).is_some_and(|c| c.log_likelihood > f64::NEG_INFINITY)))
        .collect();
    let mut entries: Vec<RankedSource> = common
        .iter()
        .map(|&node| {
            let mut times = Vec::with_capacity(per_cascade.len());
            let mut total = 0.0;
            for (scores, &used) in per_cascade.iter().zip(&informative) {
                let s = scores.get(node).expect("common candidate");
                times.push(s.t);
                if used {
                    total += s.log_likelihood;
                }
            }
            RankedSource { node, best_times: times, total_log_likelihood: total }
        })
        .collect();
    entries.sort_by(|a, b| b.total_log_likelihood.total_cmp(&a.total_log_likelihood).then(a.node.cmp(&b.node)));
    Ok(SourceRanking { entries })
}

/// Nodes feasible for every cascade, sorted.
pub fn common_candidates(net: &Network, cascades: &[ObservedCascade]) -> Result<Vec<NodeId>> {
    let mut common: Option<Vec<NodeId>> = None;
    for cascade in cascades {
        let observed = cascade.observed_set();
        if cascade.node_count() != net.node_count() {
            return Err(Error::InvalidCascade("cascade and network sizes differ"));
        }
        let here = net.candidate_sources(&observed, &observed.complement())?;
        common = Some(match common {
            None => here,
            Some(prev) => prev.into_iter().filter(|c| here.binary_search(c).is_ok()).collect(),
        });
    }
    common.ok_or(Error::EmptyObservedSet)
}

/// Rank sources of cascades assumed to share one source.
pub fn rank_sources(net: &Network, cascades: &[ObservedCascade], config: &IdentifyConfig) -> Result<SourceRanking> {
    let common = common_candidates(net, cascades)?;
    if common.is_empty() {
        return Err(Error::NoFeasibleSource);
    }
    let scores = cascades
        .iter()
        .enumerate()
        .map(|(c, cascade)| score_cascade(net, cascade, c as u64, Some(&common), config))
        .collect::<Result<Vec<_>>>()?;
    combine(&scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Topology;
    use crate::kernel::Kernel;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    fn observed(n: usize, pairs: &[(NodeId, f64)]) -> ObservedCascade {
        ObservedCascade::new(n, pairs.iter().copied().collect::<BTreeMap<_, _>>(), f64::INFINITY).unwrap()
    }

    #[test]
    fn sole_feasible_candidate_ranks_first() {
        // Only node 0 reaches both 3 and 4.
        let topo = Topology::new(5, vec![(0, 1), (0, 2), (1, 3), (2, 4)]).unwrap();
        let net = Network::from_topology(&topo, Kernel::EXPONENTIAL, 1.0).unwrap();
        let cfg = IdentifyConfig { samples: 50, ..Default::default() };
        for times in [(1.0, 2.0), (5.0, 0.5)] {
            let obs = observed(5, &[(3, times.0), (4, times.1)]);
            let ranking = rank_sources(&net, &[obs], &cfg).unwrap();
            assert_eq!(ranking.nodes(), vec![0]);
            assert!(ranking.best().best_times[0] < times.0.min(times.1));
        }
    }

    #[test]
    fn no_feasible_source() {
        let topo = Topology::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let net = Network::from_topology(&topo, Kernel::EXPONENTIAL, 1.0).unwrap();
        let obs = observed(4, &[(1, 1.0), (3, 1.0)]);
        assert_eq!(rank_sources(&net, &[obs], &IdentifyConfig::default()), Err(Error::NoFeasibleSource));
    }

    #[test]
    fn cascade_order_does_not_change_totals() {
        let topo = Topology::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (1, 3)]).unwrap();
        let net = Network::from_topology(&topo, Kernel::EXPONENTIAL, 1.0).unwrap();
        let a = observed(5, &[(3, 2.0), (4, 2.5)]);
        let b = observed(5, &[(2, 1.0), (4, 3.0)]);
        let cfg = IdentifyConfig { samples: 40, ..Default::default() };
        let sa = score_cascade(&net, &a, 0, None, &cfg).unwrap();
        let sb = score_cascade(&net, &b, 1, None, &cfg).unwrap();
        let ab = combine(&[sa.clone(), sb.clone()]).unwrap();
        let ba = combine(&[sb, sa]).unwrap();
        assert_eq!(ab.nodes(), ba.nodes());
        for (x, y) in ab.entries.iter().zip(&ba.entries) {
            assert_eq!(x.total_log_likelihood, y.total_log_likelihood);
        }
    }

    #[test]
    fn ties_broken_by_node_id() {
        let score = |node, ll| CandidateScore {
            node,
            t: 0.0,
            log_likelihood: ll,
            lower_bound: -1.0,
            pieces: 1,
            evaluated_pieces: 1,
            evaluations: 2,
            dropped: 0,
        };
        let scores = CascadeScores { candidates: vec![score(1, -2.0), score(4, -1.0), score(7, -1.0)], observed: 1, m_size: 0 };
        assert_eq!(combine(&[scores]).unwrap().nodes(), vec![4, 7, 1]);
    }

    #[test]
    fn cascade_with_no_finite_candidate_is_left_out() {
        let score = |node, ll| CandidateScore {
            node,
            t: if ll > f64::NEG_INFINITY { 0.0 } else { f64::NAN },
            log_likelihood: ll,
            lower_bound: -1.0,
            pieces: 1,
            evaluated_pieces: 1,
            evaluations: 2,
            dropped: 0,
        };
        let a = CascadeScores { candidates: vec![score(1, -2.0), score(4, -1.0)], observed: 1, m_size: 0 };
        let dead = CascadeScores { candidates: vec![score(1, f64::NEG_INFINITY), score(4, f64::NEG_INFINITY)], observed: 1, m_size: 0 };
        let half = CascadeScores { candidates: vec![score(1, -0.5), score(4, f64::NEG_INFINITY)], observed: 1, m_size: 0 };
        let ranking = combine(&[a.clone(), dead]).unwrap();
        assert_eq!(ranking.nodes(), vec![4, 1]);
        assert_eq!(ranking.best().total_log_likelihood, -1.0);
        assert!(ranking.best().best_times[1].is_nan());
        let ranking = combine(&[a, half]).unwrap();
        assert_eq!(ranking.nodes(), vec![1, 4]);
        assert_eq!(ranking.entries[1].total_log_likelihood, f64::NEG_INFINITY);
    }
}
