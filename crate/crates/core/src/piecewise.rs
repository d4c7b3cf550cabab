//! `phi_L` as a piecewise function of the source time.
//!
//! Every time-dependent parent slot of every sample has a threshold at
//! which it becomes feasible or infeasible. Between consecutive
//! thresholds the feasible-parent configuration of every sample is fixed,
//! and for the exponential kernel each sample weight is `exp(c + beta t)`,
//! so `phi_L` is a positive combination of exponentials and convex on the
//! piece. Its maximum on a piece is then at one of the two ends.
//!
//! Each sample keeps its own list of linear segments, built by sweeping its
//! thresholds in order and recomputing only the node whose configuration
//! flipped. The global maximum is found by branch and bound over blocks of
//! consecutive pieces: the sum over samples of each sample's supremum on a
//! block bounds `phi_L` there, and blocks are evaluated piece by piece in
//! decreasing order of that bound until no remaining bound beats the best
//! value found.

use alloc::vec;
use alloc::vec::Vec;

use crate::bank::SampleBank;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::likelihood::{CascadeEvidence, ExpCoefficient, Linear};
use crate::math::{exp, ln, log_mean_exp, sqrt};
use crate::par::map_indices;
use crate::search::{best_of, endpoint_max, golden_section_max, two_point_max, PieceMaximum};

/// Change points closer than this are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Per-piece search settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PieceSearch {
    /// Absolute search tolerance. `None` uses `1e-6` of the piece width,
    /// but at least `1e-9`.
    pub epsilon: Option<f64>,
    /// Also run the two-point shrinking search on every evaluated piece
    /// (exponential kernel), or use it instead of golden section (other
    /// kernels).
    pub two_point: bool,
}

impl PieceSearch {
    fn epsilon_for(&self, width: f64) -> f64 {
        self.epsilon.unwrap_or_else(|| (1e-6 * width).max(1e-9))
    }
}

/// Result of maximizing over all pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseMaximum {
    /// Maximizing source time, NaN when every piece has zero likelihood.
    pub t: f64,
    pub log_value: f64,
    pub pieces: usize,
    pub evaluated_pieces: usize,
    pub evaluations: usize,
}

impl PiecewiseMaximum {
    pub fn is_feasible(&self) -> bool {
        self.log_value > f64::NEG_INFINITY
    }
}

pub struct PiecewiseLikelihood<'a> {
    evidence: &'a CascadeEvidence,
    bank: &'a SampleBank,
    source: NodeId,
    t_lo: f64,
    t_hi: f64,
    breaks: Vec<f64>,
    raw_change_points: usize,
    /// Exponential kernel only: segments of sample `l` are
    /// `seg_offsets[l]..seg_offsets[l + 1]`, each starting at `seg_x`.
    seg_offsets: Vec<usize>,
    seg_x: Vec<f64>,
    seg_lin: Vec<Linear>,
}

impl<'a> PiecewiseLikelihood<'a> {
    /// Enumerate change points of `phi_L` for `source` on `(t_lo, t_hi)`,
    /// where `t_hi` is the earliest observed time.
    pub fn build(evidence: &'a CascadeEvidence, bank: &'a SampleBank, source: NodeId, t_lo: f64) -> Result<Self> {
        let t_hi = evidence.min_time();
        if !(t_lo < t_hi) {
            return Err(Error::InvalidInterval { low: t_lo, high: t_hi });
        }
        if bank.source() != source || evidence.observed_set().contains(source) {
            return Err(Error::InvalidParameter { name: "bank source", value: bank.source() as f64 });
        }
        let samples = bank.sample_count();
        let slot_count = evidence.slot_count();
        let slot_target = evidence.slot_target();
        let mut thresholds = vec![f64::NAN; samples * slot_count];
        for l in 0..samples {
            let row = &mut thresholds[l * slot_count..(l + 1) * slot_count];
            let base = bank.sample(l);
            evidence.fill_thresholds(base, row);
            for (slot, x) in row.iter_mut().enumerate() {
                if !x.is_nan() && evidence.target_is_skipped(slot_target[slot], source, base) {
                    *x = f64::NAN;
                }
            }
        }

        let mut inside: Vec<usize> =
            (0..thresholds.len()).filter(|&i| thresholds[i] > t_lo && thresholds[i] < t_hi).collect();
        inside.sort_by(|&a, &b| thresholds[a].total_cmp(&thresholds[b]).then(a.cmp(&b)));
        let raw_change_points = inside.len();
        let mut breaks: Vec<f64> = Vec::new();
        for &i in &inside {
            match breaks.last() {
                Some(&rep) if thresholds[i] - rep <= MERGE_TOLERANCE => thresholds[i] = rep,
                _ => breaks.push(thresholds[i]),
            }
        }

        let mut pw = PiecewiseLikelihood {
            evidence,
            bank,
            source,
            t_lo,
            t_hi,
            breaks,
            raw_change_points,
            seg_offsets: Vec::new(),
            seg_x: Vec::new(),
            seg_lin: Vec::new(),
        };
        if evidence.kernel().is_exponential() {
            pw.build_segments(&thresholds, &slot_target);
        }
        Ok(pw)
    }

    fn build_segments(&mut self, thresholds: &[f64], slot_target: &[usize]) {
        let ev = self.evidence;
        let bank = self.bank;
        let slot_count = ev.slot_count();
        let (source, t_lo, t_hi) = (self.source, self.t_lo, self.t_hi);
        let per_sample = map_indices(bank.sample_count(), |l| {
            let base = bank.sample(l);
            let thr = &thresholds[l * slot_count..(l + 1) * slot_count];
            let mut events: Vec<(f64, usize)> = (0..slot_count)
                .filter(|&s| ev.is_time_dependent(s) && thr[s] > t_lo && thr[s] < t_hi)
                .map(|s| (thr[s], slot_target[s]))
                .collect();
            events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let first_probe = 0.5 * (t_lo + events.first().map_or(t_hi, |e| e.0));
            let active: Vec<bool> =
                (0..ev.target_count()).map(|t| !ev.target_is_skipped(t, source, base)).collect();
            let mut terms: Vec<Linear> = (0..ev.target_count())
                .map(|t| if active[t] { ev.target_linear(t, base, thr, first_probe) } else { Linear { c: 0.0, beta: 0.0 } })
                .collect();
            let mut total = Linear { c: 0.0, beta: 0.0 };
            let mut dead = 0usize;
            for term in &terms {
                if term.is_dead() {
                    dead += 1;
                } else {
                    total.c += term.c;
                    total.beta += term.beta;
                }
            }
            let current = |total: Linear, dead: usize| if dead > 0 { Linear::DEAD } else { total };
            let mut segments = vec![(t_lo, current(total, dead))];
            let mut touched: Vec<usize> = Vec::new();
            let mut i = 0;
            while i < events.len() {
                let x = events[i].0;
                touched.clear();
                while i < events.len() && events[i].0 == x {
                    if touched.last() != Some(&events[i].1) && !touched.contains(&events[i].1) {
                        touched.push(events[i].1);
                    }
                    i += 1;
                }
                let next = events.get(i).map_or(t_hi, |e| e.0);
                let probe = 0.5 * (x + next);
                for &t in &touched {
                    let old = terms[t];
                    let new = ev.target_linear(t, base, thr, probe);
                    if old.is_dead() {
                        dead -= 1;
                    } else {
                        total.c -= old.c;
                        total.beta -= old.beta;
                    }
                    if new.is_dead() {
                        dead += 1;
                    } else {
                        total.c += new.c;
                        total.beta += new.beta;
                    }
                    terms[t] = new;
                }
                segments.push((x, current(total, dead)));
            }
            segments
        });
        self.seg_offsets = Vec::with_capacity(per_sample.len() + 1);
        self.seg_offsets.push(0);
        for segments in per_sample {
            for (x, lin) in segments {
                self.seg_x.push(x);
                self.seg_lin.push(lin);
            }
            self.seg_offsets.push(self.seg_x.len());
        }
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn lower_bound(&self) -> f64 {
        self.t_lo
    }

    pub fn upper_bound(&self) -> f64 {
        self.t_hi
    }

    /// Sorted, merged change points inside `(t_lo, t_hi)`.
    pub fn change_points(&self) -> &[f64] {
        &self.breaks
    }

    /// Threshold crossings inside the interval before merging.
    pub fn raw_change_point_count(&self) -> usize {
        self.raw_change_points
    }

    pub fn piece_count(&self) -> usize {
        self.breaks.len() + 1
    }

    /// Bounds `(a, b)` of piece `i`.
    pub fn piece(&self, i: usize) -> (f64, f64) {
        let a = if i == 0 { self.t_lo } else { self.breaks[i - 1] };
        let b = if i == self.breaks.len() { self.t_hi } else { self.breaks[i] };
        (a, b)
    }

    fn segment_at(&self, l: usize, t: f64) -> Linear {
        let (lo, hi) = (self.seg_offsets[l], self.seg_offsets[l + 1]);
        let k = self.seg_x[lo..hi].partition_point(|&x| x <= t);
        self.seg_lin[lo + k.max(1) - 1]
    }

    /// `log phi_L(t)`, from the stored segments for the exponential kernel
    /// and by direct evaluation otherwise. At a change point the value of
    /// the piece to its right is returned.
    pub fn evaluate(&self, t: f64) -> f64 {
        let samples = self.bank.sample_count();
        let terms: Vec<f64> = if self.seg_offsets.is_empty() {
            (0..samples).map(|l| self.evidence.sample_log_term(self.source, self.bank.sample(l), t)).collect()
        } else {
            (0..samples).map(|l| self.segment_at(l, t).at(t)).collect()
        };
        log_mean_exp(&terms)
    }

    /// Coefficients of every sample with nonzero weight on piece `i`.
    pub fn piece_coefficients(&self, i: usize) -> Result<Vec<ExpCoefficient>> {
        if self.seg_offsets.is_empty() {
            return Err(Error::NonExponentialKernel { shape: self.evidence.kernel().shape() });
        }
        let (a, b) = self.piece(i);
        let mid = 0.5 * (a + b);
        Ok((0..self.bank.sample_count())
            .map(|l| self.segment_at(l, mid))
            .filter(|lin| !lin.is_dead())
            .map(|lin| ExpCoefficient { log_gamma: lin.c, beta: lin.beta })
            .collect())
    }

    /// Maximize `log phi_L` over `(t_lo, t_hi)`.
    ///
    /// Candidate times are kept strictly inside their piece, a distance
    /// `min(max(1e-6 w, 1e-9), w / 2)` from each end, so the result lies
    /// below the earliest observed time.
    pub fn maximize(&self, search: &PieceSearch) -> PiecewiseMaximum {
        if self.seg_offsets.is_empty() {
            self.maximize_direct(search)
        } else {
            self.maximize_exponential(search)
        }
    }

    fn inset(a: f64, b: f64) -> (f64, f64) {
        let w = b - a;
        let d = (1e-6 * w).max(1e-9).min(0.5 * w);
        (a + d, b - d)
    }

    fn maximize_direct(&self, search: &PieceSearch) -> PiecewiseMaximum {
        let samples = self.bank.sample_count();
        let phi = |t: f64| {
            let terms: Vec<f64> =
                (0..samples).map(|l| self.evidence.sample_log_term(self.source, self.bank.sample(l), t)).collect();
            log_mean_exp(&terms)
        };
        let pieces = self.piece_count();
        let results = map_indices(pieces, |i| {
            let (a, b) = self.piece(i);
            let (a, b) = Self::inset(a, b);
            let eps = search.epsilon_for(b - a);
            if search.two_point {
                two_point_max(phi, a, b, eps)
            } else {
                golden_section_max(phi, a, b, eps)
            }
        });
        let mut best: Option<PieceMaximum> = None;
        for r in results {
            best = Some(match best {
                None => r,
                Some(b) => best_of(b, r),
            });
        }
        let best = best.expect("at least one piece");
        PiecewiseMaximum {
            t: if best.value > f64::NEG_INFINITY { best.t } else { f64::NAN },
            log_value: best.value,
            pieces,
            evaluated_pieces: pieces,
            evaluations: best.evaluations,
        }
    }

    fn maximize_exponential(&self, search: &PieceSearch) -> PiecewiseMaximum {
        let samples = self.bank.sample_count();
        let pieces = self.piece_count();
        let block = (sqrt(pieces as f64) as usize).max(1);
        let blocks = pieces.div_ceil(block);
        let bound_of = |b: usize| -> (f64, f64) {
            let first = b * block;
            let last = ((b + 1) * block).min(pieces) - 1;
            (self.piece(first).0, self.piece(last).1)
        };
        let log_l = ln(samples as f64);

        // sups[b * samples + l]: supremum of sample l's log weight on block b.
        let per_sample = map_indices(samples, |l| {
            let (lo, hi) = (self.seg_offsets[l], self.seg_offsets[l + 1]);
            let mut out = vec![f64::NEG_INFINITY; blocks];
            let mut k = lo;
            for (b, slot) in out.iter_mut().enumerate() {
                let (x0, x1) = bound_of(b);
                while k + 1 < hi && self.seg_x[k + 1] <= x0 {
                    k += 1;
                }
                let mut j = k;
                let mut sup = f64::NEG_INFINITY;
                while j < hi && self.seg_x[j] < x1 {
                    let end = if j + 1 < hi { self.seg_x[j + 1] } else { self.t_hi };
                    let lin = self.seg_lin[j];
                    sup = sup.max(lin.at(self.seg_x[j].max(x0))).max(lin.at(end.min(x1)));
                    j += 1;
                }
                *slot = sup;
            }
            out
        });
        let mut upper: Vec<(f64, usize)> = (0..blocks)
            .map(|b| {
                let column: Vec<f64> = per_sample.iter().map(|row| row[b]).collect();
                (log_mean_exp(&column), b)
            })
            .collect();
        upper.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

        let mut best: Option<PieceMaximum> = None;
        let mut evaluated_pieces = 0;
        let mut evaluations = 0;
        let mut lins = vec![Linear::DEAD; samples];
        let mut pointers = vec![0usize; samples];
        let mut values = vec![0.0; samples];
        for &(bound, b) in &upper {
            if bound == f64::NEG_INFINITY {
                break;
            }
            if let Some(found) = best {
                if bound <= found.value {
                    break;
                }
            }
            let first = b * block;
            let last = ((b + 1) * block).min(pieces);
            let x0 = self.piece(first).0;
            for (l, p) in pointers.iter_mut().enumerate() {
                let (lo, hi) = (self.seg_offsets[l], self.seg_offsets[l + 1]);
                *p = lo + self.seg_x[lo..hi].partition_point(|&x| x <= x0).max(1) - 1;
            }
            for i in first..last {
                let (a, bb) = self.piece(i);
                for l in 0..samples {
                    let hi = self.seg_offsets[l + 1];
                    let p = &mut pointers[l];
                    while *p + 1 < hi && self.seg_x[*p + 1] <= a {
                        *p += 1;
                    }
                    lins[l] = self.seg_lin[*p];
                }
                let mut phi = |t: f64| {
                    for (v, lin) in values.iter_mut().zip(&lins) {
                        *v = lin.at(t);
                    }
                    log_sum_exp_fast(&values) - log_l
                };
                let (a, bb) = Self::inset(a, bb);
                let mut r = endpoint_max(&mut phi, a, bb);
                if search.two_point {
                    r = best_of(r, two_point_max(&mut phi, a, bb, search.epsilon_for(bb - a)));
                }
                evaluations += r.evaluations;
                evaluated_pieces += 1;
                best = Some(match best {
                    None => r,
                    Some(found) => {
                        if r.value > found.value {
                            r
                        } else {
                            found
                        }
                    }
                });
            }
        }
        match best {
            Some(r) if r.value > f64::NEG_INFINITY => PiecewiseMaximum {
                t: r.t,
                log_value: r.value,
                pieces,
                evaluated_pieces,
                evaluations,
            },
            _ => PiecewiseMaximum {
                t: f64::NAN,
                log_value: f64::NEG_INFINITY,
                pieces,
                evaluated_pieces,
                evaluations,
            },
        }
    }
}

/// `ln sum exp`, sequential; only used where the result is compared, not stored.
fn log_sum_exp_fast(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + ln(values.iter().map(|&v| exp(v - max)).sum::<f64>())
}
