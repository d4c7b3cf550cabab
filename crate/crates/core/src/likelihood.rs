//! Cascade likelihoods.
//!
//! The density of a complete cascade factorizes over infected nodes: node
//! `i` contributes the survival of every parent infected before it times
//! the summed hazard of those parents.
//!
//! For an incomplete cascade the hidden times are integrated out by
//! importance sampling. Each sample is a forward cascade from the
//! candidate source (a row of a [`SampleBank`]). Its weight is the product
//! of the observed-node factors, evaluated with sampled times for hidden
//! parents, and for every hidden node with an observed parent (the set
//! `M`) the ratio of its factor under the observed parent times to its
//! factor under the sampled ones. Factors of the remaining hidden nodes
//! cancel, and within `M` the hidden-parent survival terms cancel too.
//!
//! Feasibility of a time-dependent parent is written as a threshold on
//! the source time: a hidden parent `j` of an observed node `i` is
//! feasible while `t_s < t_i - t^l_j`, an observed parent `j` of a node
//! `i` in `M` is feasible once `t_s > t_j - t^l_i`.

use alloc::vec;
use alloc::vec::Vec;

use crate::bank::SampleBank;
use crate::error::{Error, Result};
use crate::graph::{Network, NodeId, NodeSet};
use crate::kernel::Kernel;
use crate::math::{effective_sample_size, ln, log_mean_exp, pairwise_sum};
use crate::par::map_indices;
use crate::simulate::{Cascade, ObservedCascade};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleParent {
    pub node: NodeId,
    pub time: f64,
    pub alpha: f64,
}

/// Conditional density of one child time given its feasible parents.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFactor {
    pub child: NodeId,
    pub child_time: f64,
    pub parents: Vec<FeasibleParent>,
    pub kernel: Kernel,
}

/// `sum_j ln S(t_i - t_j) + ln sum_j H(t_i - t_j)` over the feasible parents.
pub fn node_log_factor(factor: &NodeFactor) -> Result<f64> {
    if factor.parents.is_empty() {
        return Err(Error::NoFeasibleParent { child: Some(factor.child) });
    }
    let mut survival = 0.0;
    let mut hazard = 0.0;
    for p in &factor.parents {
        let gap = factor.child_time - p.time;
        if !(gap >= 0.0) {
            return Err(Error::InvalidParameter { name: "parent time after child", value: p.time });
        }
        survival += factor.kernel.log_survival(gap, p.alpha);
        hazard += factor.kernel.hazard(gap, p.alpha);
    }
    Ok(survival + ln(hazard))
}

/// Log-density of a fully observed cascade.
///
/// Sums the factors of infected non-source nodes; `-inf` when one of them
/// has no parent infected strictly earlier. With `censor` set, nodes still
/// uninfected at a finite window add the survival of every infected parent
/// up to the window.
pub fn complete_log_likelihood(net: &Network, cascade: &Cascade, censor: bool) -> f64 {
    let kernel = net.kernel();
    let times = cascade.times();
    let window = cascade.window();
    let mut terms = Vec::new();
    for i in 0..net.node_count() {
        let t_i = times[i];
        if i == cascade.source() {
            continue;
        }
        if t_i.is_finite() {
            let mut survival = 0.0;
            let mut hazard = 0.0;
            for &id in net.in_edges(i) {
                let e = net.edge(id);
                let t_j = times[e.source];
                if t_j < t_i {
                    survival += kernel.log_survival(t_i - t_j, e.alpha);
                    hazard += kernel.hazard(t_i - t_j, e.alpha);
                }
            }
            if hazard <= 0.0 {
                return f64::NEG_INFINITY;
            }
            terms.push(survival + ln(hazard));
        } else if censor && window.is_finite() {
            for &id in net.in_edges(i) {
                let e = net.edge(id);
                let t_j = times[e.source];
                if t_j.is_finite() {
                    terms.push(kernel.log_survival(window - t_j, e.alpha));
                }
            }
        }
    }
    pairwise_sum(&terms)
}

/// Hidden nodes with at least one observed in-neighbor.
pub fn m_set(net: &Network, observed: &NodeSet, hidden: &NodeSet) -> NodeSet {
    let mut m = NodeSet::empty(net.node_count());
    for h in hidden.iter() {
        if net.in_edges(h).iter().any(|&id| observed.contains(net.edge(id).source)) {
            m.insert(h);
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlotKind {
    /// Observed child, observed parent: fixed.
    ObservedObserved,
    /// Observed child, hidden parent: feasible while `t_s < x`.
    ObservedHidden,
    /// Hidden child, hidden parent: fixed by the sample.
    HiddenHidden,
    /// Hidden child, observed parent: feasible once `t_s > x`.
    HiddenObserved,
}

#[derive(Debug, Clone)]
struct Slot {
    parent: NodeId,
    alpha: f64,
    rate: f64,
    kind: SlotKind,
}

#[derive(Debug, Clone)]
struct Target {
    node: NodeId,
    /// Observed infection time, NaN for members of `M`.
    time: f64,
    slots: (usize, usize),
}

/// Per-sample log weight `c + beta * t_s`, valid while no threshold is crossed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub c: f64,
    pub beta: f64,
}

impl Linear {
    pub const DEAD: Linear = Linear { c: f64::NEG_INFINITY, beta: 0.0 };

    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        if self.c == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.c + self.beta * t
        }
    }

    #[inline]
    pub fn is_dead(&self) -> bool {
        self.c == f64::NEG_INFINITY
    }
}

/// `gamma * exp(beta * t_s)` with `gamma = exp(log_gamma) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpCoefficient {
    pub log_gamma: f64,
    pub beta: f64,
}

/// Parent tables of the observed nodes and of `M` for one incomplete
/// cascade, shared by every candidate source.
#[derive(Debug, Clone)]
pub struct CascadeEvidence {
    kernel: Kernel,
    node_count: usize,
    observed: NodeSet,
    observed_time: Vec<f64>,
    min_time: f64,
    targets: Vec<Target>,
    observed_targets: usize,
    slots: Vec<Slot>,
}

impl CascadeEvidence {
    pub fn new(net: &Network, cascade: &ObservedCascade) -> Result<Self> {
        if cascade.node_count() != net.node_count() {
            return Err(Error::InvalidCascade("cascade and network sizes differ"));
        }
        if cascade.observed().is_empty() {
            return Err(Error::EmptyObservedSet);
        }
        let observed = cascade.observed_set();
        let hidden = observed.complement();
        let mut observed_time = vec![f64::NAN; net.node_count()];
        for (&i, &t) in cascade.observed() {
            observed_time[i] = t;
        }
        let mut targets = Vec::new();
        let mut slots = Vec::new();
        let push = |node: NodeId, time: f64, targets: &mut Vec<Target>, slots: &mut Vec<Slot>| {
            let start = slots.len();
            let child_observed = time.is_finite();
            for &id in net.in_edges(node) {
                let e = net.edge(id);
                let kind = match (child_observed, observed.contains(e.source)) {
                    (true, true) => SlotKind::ObservedObserved,
                    (true, false) => SlotKind::ObservedHidden,
                    (false, false) => SlotKind::HiddenHidden,
                    (false, true) => SlotKind::HiddenObserved,
                };
                slots.push(Slot { parent: e.source, alpha: e.alpha, rate: 1.0 / e.alpha, kind });
            }
            targets.push(Target { node, time, slots: (start, slots.len()) });
        };
        for (&i, &t) in cascade.observed() {
            push(i, t, &mut targets, &mut slots);
        }
        let observed_targets = targets.len();
        for i in m_set(net, &observed, &hidden).iter() {
            push(i, f64::NAN, &mut targets, &mut slots);
        }
        Ok(CascadeEvidence {
            kernel: net.kernel(),
            node_count: net.node_count(),
            observed,
            observed_time,
            min_time: cascade.min_time(),
            targets,
            observed_targets,
            slots,
        })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn observed_set(&self) -> &NodeSet {
        &self.observed
    }

    pub fn observed_nodes(&self) -> impl Iterator<Item = NodeId> + Clone + '_ {
        self.targets[..self.observed_targets].iter().map(|t| t.node)
    }

    /// Members of `M`, the candidate source included if it qualifies.
    pub fn m_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.targets[self.observed_targets..].iter().map(|t| t.node)
    }

    /// Upper end of the source-time domain.
    pub fn min_time(&self) -> f64 {
        self.min_time
    }

    /// Largest in-degree over `O` and `M`.
    pub fn max_in_degree(&self) -> usize {
        self.targets.iter().map(|t| t.slots.1 - t.slots.0).max().unwrap_or(0)
    }

    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    pub(crate) fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Hidden nodes that reach every observed node.
    pub fn candidates(&self, net: &Network) -> Result<Vec<NodeId>> {
        net.candidate_sources(&self.observed, &self.observed.complement())
    }

    fn check_bank(&self, source: NodeId, bank: &SampleBank) -> Result<()> {
        if bank.source() != source {
            return Err(Error::InvalidParameter { name: "bank source", value: bank.source() as f64 });
        }
        if bank.node_count() != self.node_count {
            return Err(Error::InvalidParameter { name: "bank width", value: bank.node_count() as f64 });
        }
        if self.observed.contains(source) {
            return Err(Error::InvalidNode { node: source, node_count: self.node_count });
        }
        Ok(())
    }

    fn skipped(&self, target: &Target, source: NodeId, base: &[f64]) -> bool {
        // The source time is the decision variable, not a sampled latent;
        // a hidden node the sample never reaches has nothing to reweight.
        !target.time.is_finite() && (target.node == source || !base[target.node].is_finite())
    }

    /// Log weight of one sample at source time `t_s`, evaluated directly
    /// from the kernel.
    pub fn sample_log_term(&self, source: NodeId, base: &[f64], t_s: f64) -> f64 {
        let k = self.kernel;
        let mut total = 0.0;
        for target in &self.targets {
            if self.skipped(target, source, base) {
                continue;
            }
            let slots = &self.slots[target.slots.0..target.slots.1];
            let term = if target.time.is_finite() {
                let t_i = target.time;
                let mut survival = 0.0;
                let mut hazard = 0.0;
                for s in slots {
                    let gap = match s.kind {
                        SlotKind::ObservedObserved => t_i - self.observed_time[s.parent],
                        _ => (t_i - base[s.parent]) - t_s,
                    };
                    if gap > 0.0 {
                        survival += k.log_survival(gap, s.alpha);
                        hazard += k.hazard(gap, s.alpha);
                    }
                }
                if hazard > 0.0 {
                    survival + ln(hazard)
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                let b_i = base[target.node];
                let mut shared = 0.0;
                let (mut num_surv, mut num_haz, mut den_surv, mut den_haz) = (0.0, 0.0, 0.0, 0.0);
                for s in slots {
                    let b_j = base[s.parent];
                    match s.kind {
                        SlotKind::HiddenHidden => {
                            if b_j < b_i {
                                shared += k.hazard(b_i - b_j, s.alpha);
                            }
                        }
                        _ => {
                            let gap = t_s - (self.observed_time[s.parent] - b_i);
                            if gap > 0.0 {
                                num_surv += k.log_survival(gap, s.alpha);
                                num_haz += k.hazard(gap, s.alpha);
                            }
                            if b_j < b_i {
                                den_surv += k.log_survival(b_i - b_j, s.alpha);
                                den_haz += k.hazard(b_i - b_j, s.alpha);
                            }
                        }
                    }
                }
                let num = shared + num_haz;
                let den = shared + den_haz;
                if num > 0.0 && den > 0.0 {
                    num_surv - den_surv + ln(num) - ln(den)
                } else {
                    f64::NEG_INFINITY
                }
            };
            if term == f64::NEG_INFINITY {
                return term;
            }
            total += term;
        }
        total
    }

    /// Threshold of every time-dependent slot for one sample; NaN for the
    /// fixed ones.
    pub(crate) fn fill_thresholds(&self, base: &[f64], out: &mut [f64]) {
        for target in &self.targets {
            for idx in target.slots.0..target.slots.1 {
                let s = &self.slots[idx];
                out[idx] = match s.kind {
                    SlotKind::ObservedHidden => target.time - base[s.parent],
                    SlotKind::HiddenObserved => self.observed_time[s.parent] - base[target.node],
                    _ => f64::NAN,
                };
            }
        }
    }

    pub(crate) fn slot_target(&self) -> Vec<usize> {
        let mut out = vec![0; self.slots.len()];
        for (t, target) in self.targets.iter().enumerate() {
            out[target.slots.0..target.slots.1].fill(t);
        }
        out
    }

    pub(crate) fn is_time_dependent(&self, slot: usize) -> bool {
        matches!(self.slots[slot].kind, SlotKind::ObservedHidden | SlotKind::HiddenObserved)
    }

    pub(crate) fn target_is_skipped(&self, target: usize, source: NodeId, base: &[f64]) -> bool {
        self.skipped(&self.targets[target], source, base)
    }

    /// Exponential-kernel factor of one target as `c + beta * t_s`, with
    /// feasibility of time-dependent slots decided at `probe`.
    pub(crate) fn target_linear(&self, target: usize, base: &[f64], thresholds: &[f64], probe: f64) -> Linear {
        let target = &self.targets[target];
        let (lo, hi) = target.slots;
        if target.time.is_finite() {
            let t_i = target.time;
            let (mut c, mut beta, mut hazard) = (0.0, 0.0, 0.0);
            for idx in lo..hi {
                let s = &self.slots[idx];
                match s.kind {
                    SlotKind::ObservedObserved => {
                        let t_j = self.observed_time[s.parent];
                        if t_j < t_i {
                            c -= (t_i - t_j) * s.rate;
                            hazard += s.rate;
                        }
                    }
                    _ => {
                        let x = thresholds[idx];
                        if probe < x {
                            c -= x * s.rate;
                            beta += s.rate;
                            hazard += s.rate;
                        }
                    }
                }
            }
            if hazard > 0.0 {
                Linear { c: c + ln(hazard), beta }
            } else {
                Linear::DEAD
            }
        } else {
            let b_i = base[target.node];
            let (mut c, mut beta, mut shared, mut num, mut den) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for idx in lo..hi {
                let s = &self.slots[idx];
                let b_j = base[s.parent];
                match s.kind {
                    SlotKind::HiddenHidden => {
                        if b_j < b_i {
                            shared += s.rate;
                        }
                    }
                    _ => {
                        let x = thresholds[idx];
                        if probe > x {
                            c += x * s.rate;
                            beta -= s.rate;
                            num += s.rate;
                        }
                        if b_j < b_i {
                            c += (b_i - b_j) * s.rate;
                            den += s.rate;
                        }
                    }
                }
            }
            if shared + num > 0.0 && shared + den > 0.0 {
                Linear { c: c + ln(shared + num) - ln(shared + den), beta }
            } else {
                Linear::DEAD
            }
        }
    }

    /// Per-sample exponential coefficients at `t_s`: for every `t` in the
    /// same piece, `sum_l gamma_l exp(beta_l t)` equals `L * phi_L(t)`.
    /// Samples with zero weight are omitted.
    pub fn exp_coefficients(&self, source: NodeId, bank: &SampleBank, t_s: f64) -> Result<Vec<ExpCoefficient>> {
        if !self.kernel.is_exponential() {
            return Err(Error::NonExponentialKernel { shape: self.kernel.shape() });
        }
        self.check_bank(source, bank)?;
        let mut thresholds = vec![0.0; self.slots.len()];
        let mut out = Vec::with_capacity(bank.sample_count());
        for l in 0..bank.sample_count() {
            let base = bank.sample(l);
            self.fill_thresholds(base, &mut thresholds);
            let mut c = 0.0;
            let mut beta = 0.0;
            let mut dead = false;
            for t in 0..self.targets.len() {
                if self.target_is_skipped(t, source, base) {
                    continue;
                }
                let lin = self.target_linear(t, base, &thresholds, t_s);
                if lin.is_dead() {
                    dead = true;
                    break;
                }
                c += lin.c;
                beta += lin.beta;
            }
            if !dead {
                out.push(ExpCoefficient { log_gamma: c, beta });
            }
        }
        Ok(out)
    }

    /// Importance-sampling estimate of the incomplete-cascade likelihood
    /// for `source` starting at `t_s`.
    pub fn phi_l(&self, source: NodeId, bank: &SampleBank, t_s: f64) -> Result<LikelihoodEstimate> {
        self.check_bank(source, bank)?;
        if !(t_s < self.min_time) {
            return Err(Error::InvalidParameter { name: "source time", value: t_s });
        }
        let terms = map_indices(bank.sample_count(), |l| self.sample_log_term(source, bank.sample(l), t_s));
        Ok(LikelihoodEstimate::from_terms(terms))
    }
}

/// `log phi_L` together with the per-sample log terms it averages.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodEstimate {
    pub log_value: f64,
    pub sample_count: usize,
    pub log_terms: Vec<f64>,
    /// Samples with zero weight.
    pub dropped: usize,
    pub effective_sample_size: f64,
}

impl LikelihoodEstimate {
    pub fn from_terms(log_terms: Vec<f64>) -> Self {
        LikelihoodEstimate {
            log_value: log_mean_exp(&log_terms),
            sample_count: log_terms.len(),
            dropped: log_terms.iter().filter(|t| **t == f64::NEG_INFINITY).count(),
            effective_sample_size: effective_sample_size(&log_terms),
            log_terms,
        }
    }
}
