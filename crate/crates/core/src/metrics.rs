//! Accuracy summaries over identification trials.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::NodeId;

/// One identification trial: the true source and times, the ranking
/// produced, and the source time estimated for each cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub true_source: NodeId,
    pub ranking: Vec<NodeId>,
    pub true_times: Vec<f64>,
    /// `None` when no time estimate exists for this trial.
    pub estimated_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub trials: usize,
    /// Fraction of trials ranking the true source first.
    pub success: f64,
    /// Fraction of trials ranking the true source in the top ten.
    pub top10_success: f64,
    /// Mean squared source-time error, NaN when no trial has an estimate.
    pub mse: f64,
    pub mse_terms: usize,
}

pub fn top_k_hit(ranking: &[NodeId], truth: NodeId, k: usize) -> bool {
    ranking.iter().take(k).any(|&n| n == truth)
}

pub fn compute_metrics(trials: &[Trial]) -> Result<MetricReport> {
    if trials.is_empty() {
        return Err(Error::EmptyTrials);
    }
    let n = trials.len() as f64;
    let hits = trials.iter().filter(|t| top_k_hit(&t.ranking, t.true_source, 1)).count();
    let top10 = trials.iter().filter(|t| top_k_hit(&t.ranking, t.true_source, 10)).count();
    let mut sq = 0.0;
    let mut terms = 0;
    for t in trials {
        if let Some(est) = &t.estimated_times {
            for (&e, &truth) in est.iter().zip(&t.true_times) {
                if e.is_finite() {
                    sq += (e - truth) * (e - truth);
                    terms += 1;
                }
            }
        }
    }
    Ok(MetricReport {
        trials: trials.len(),
        success: hits as f64 / n,
        top10_success: top10 as f64 / n,
        mse: if terms > 0 { sq / terms as f64 } else { f64::NAN },
        mse_terms: terms,
    })
}

/// Success rate of guessing uniformly among `choices` nodes.
pub fn random_guess_rate(choices: usize) -> f64 {
    1.0 / choices as f64
}
