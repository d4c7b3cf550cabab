//! Synthetic identification experiments.
//!
//! A trial picks a source that triggers at least `min_large` large
//! cascades out of `simulated_per_source` simulations, masks its first
//! large cascades, and ranks candidates with the likelihood method and
//! both baselines on every prefix of 1..=`cascades` cascades. Every method
//! sees the same masked cascades. The sweeps rerun the likelihood method
//! for other observed fractions and sample sizes on the same trials;
//! masks are nested across fractions and samples are nested across sizes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use cascade_sleuth_core::baseline::{montecarlo_ranking, outdegree_ranking};
use cascade_sleuth_core::identify::{combine, score_cascade, CascadeScores, IdentifyConfig};
use cascade_sleuth_core::kronecker::{assign_rates, generate_kronecker};
use cascade_sleuth_core::metrics::{compute_metrics, MetricReport, Trial};
use cascade_sleuth_core::piecewise::PieceSearch;
use cascade_sleuth_core::rng::{derive_seed, stream};
use cascade_sleuth_core::simulate::{mask_cascade, simulate_cascade};
use cascade_sleuth_core::{Cascade, Kernel, KroneckerSpec, Network, NodeId, ObservedCascade};
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::config::{ExperimentConfig, Metric};
use crate::error::{Result, SleuthError};
use crate::io::{read_network, write_text};

const NETWORK_STREAM: u64 = 1;
const SOURCE_STREAM: u64 = 2;
const SIMULATE_STREAM: u64 = 3;
const MASK_STREAM: u64 = 4;
const IDENTIFY_STREAM: u64 = 5;
const MONTECARLO_STREAM: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Likelihood,
    Outdegree,
    Montecarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Likelihood => "likelihood",
            Method::Outdegree => "outdegree",
            Method::Montecarlo => "montecarlo",
        }
    }
}

/// A source chosen for one trial and the large cascades it triggered.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub source: NodeId,
    /// Nodes tried before this one qualified.
    pub attempts: usize,
    pub large: Vec<Cascade>,
}

#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub method: Method,
    pub cascades: usize,
    pub report: MetricReport,
    pub records: Vec<Trial>,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub cascades: usize,
    pub report: MetricReport,
    /// Mean and largest wall-clock seconds to score one cascade.
    pub mean_seconds: f64,
    pub max_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CascadeDiagnostics {
    pub infected: usize,
    pub observed: usize,
    pub m_size: usize,
    pub candidates: usize,
    pub pieces: usize,
    pub evaluated_pieces: usize,
    pub evaluations: usize,
    pub dropped_samples: usize,
    pub true_source_rank: Option<usize>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialDiagnostics {
    pub trial: usize,
    pub source: NodeId,
    pub source_attempts: usize,
    pub large_cascades: usize,
    pub cascades: Vec<CascadeDiagnostics>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub network_nodes: usize,
    pub network_edges: usize,
    pub curves: Vec<CurvePoint>,
    pub sweep_observed: Vec<SweepPoint>,
    pub sweep_samples: Vec<SweepPoint>,
    pub trials: Vec<TrialDiagnostics>,
    pub wall_seconds: f64,
}

impl ExperimentResult {
    pub fn curve(&self, method: Method, cascades: usize) -> Option<&MetricReport> {
        self.curves.iter().find(|p| p.method == method && p.cascades == cascades).map(|p| &p.report)
    }
}

pub fn build_network(cfg: &ExperimentConfig) -> Result<Network> {
    if let Some(path) = &cfg.network_file {
        return read_network(path);
    }
    let kind = cfg.network_kind().map_err(SleuthError::Experiment)?;
    let spec = KroneckerSpec::preset(kind, cfg.power, Some(cfg.edges))?;
    let topo = generate_kronecker(&spec, &mut stream(cfg.seed, &[NETWORK_STREAM, 0]))?;
    let kernel = Kernel::new(cfg.kernel_shape)?;
    Ok(assign_rates(&topo, cfg.rate_low, cfg.rate_high, kernel, &mut stream(cfg.seed, &[NETWORK_STREAM, 1]))?)
}

/// Choose the source of every trial. Nodes are tried in a random order
/// until one triggers enough large cascades.
pub fn select_trials(net: &Network, cfg: &ExperimentConfig) -> Result<Vec<TrialSetup>> {
    let needed = cfg.min_large.max(cfg.cascades).max(cfg.sweep_cascades);
    let mut out = Vec::with_capacity(cfg.trials);
    for t in 0..cfg.trials {
        let mut order: Vec<NodeId> = (0..net.node_count()).collect();
        order.shuffle(&mut stream(cfg.seed, &[SOURCE_STREAM, t as u64]));
        let mut chosen = None;
        for (attempt, &s) in order.iter().take(cfg.max_source_attempts).enumerate() {
            let mut large = Vec::new();
            for c in 0..cfg.simulated_per_source {
                let mut rng = stream(cfg.seed, &[SIMULATE_STREAM, t as u64, s as u64, c as u64]);
                let cascade = simulate_cascade(net, s, 0.0, cfg.window, &mut rng)?;
                if cascade.infected_count() > cfg.large_threshold {
                    large.push(cascade);
                }
            }
            if large.len() >= needed {
                chosen = Some(TrialSetup { source: s, attempts: attempt + 1, large });
                break;
            }
        }
        out.push(chosen.ok_or_else(|| {
            SleuthError::Experiment(format!(
                "trial {t}: no node triggered {needed} cascades larger than {} nodes out of {}",
                cfg.large_threshold, cfg.simulated_per_source
            ))
        })?);
    }
    Ok(out)
}

struct Scored {
    scores: CascadeScores,
    seconds: f64,
}

/// Lazily scored cascades keyed by (trial, observed fraction, samples).
struct Runner<'a> {
    net: &'a Network,
    cfg: &'a ExperimentConfig,
    setups: &'a [TrialSetup],
    cache: HashMap<(usize, u64, usize), (Vec<ObservedCascade>, Vec<Scored>)>,
}

impl<'a> Runner<'a> {
    fn masked(&self, trial: usize, fraction: f64, count: usize) -> Result<Vec<ObservedCascade>> {
        self.setups[trial].large[..count]
            .iter()
            .enumerate()
            .map(|(c, cascade)| {
                let mut rng = stream(self.cfg.seed, &[MASK_STREAM, trial as u64, c as u64]);
                Ok(mask_cascade(cascade, fraction, &mut rng)?)
            })
            .collect()
    }

    fn identify_config(&self, trial: usize, samples: usize) -> IdentifyConfig {
        IdentifyConfig {
            samples,
            kappa: self.cfg.kappa,
            search: PieceSearch { epsilon: self.cfg.epsilon, two_point: self.cfg.lemma2_search },
            seed: derive_seed(self.cfg.seed, &[IDENTIFY_STREAM, trial as u64]),
        }
    }

    /// Observed cascades and scores for the first `count` cascades.
    fn scored(&mut self, trial: usize, fraction: f64, samples: usize, count: usize) -> Result<&(Vec<ObservedCascade>, Vec<Scored>)> {
        let key = (trial, fraction.to_bits(), samples);
        let have = self.cache.get(&key).map_or(0, |e| e.1.len());
        if have < count {
            let observed = self.masked(trial, fraction, count)?;
            let config = self.identify_config(trial, samples);
            let mut scored = self.cache.remove(&key).map(|e| e.1).unwrap_or_default();
            for (c, obs) in observed.iter().enumerate().skip(have) {
                let start = Instant::now();
                let scores = score_cascade(self.net, obs, c as u64, None, &config)?;
                scored.push(Scored { scores, seconds: start.elapsed().as_secs_f64() });
            }
            self.cache.insert(key, (observed, scored));
        }
        Ok(&self.cache[&key])
    }
}

/// The time estimate of a trial is the true source's own best source time
/// in each cascade, NaN where it has no feasible time.
fn ranked_trial(scores: &[CascadeScores], setup: &TrialSetup) -> Trial {
    let count = scores.len();
    let true_times = setup.large[..count].iter().map(|c| c.source_time()).collect();
    let estimated =
        scores.iter().map(|s| s.get(setup.source).map_or(f64::NAN, |c| c.t)).collect::<Vec<f64>>();
    let ranking = combine(scores).map(|r| r.nodes()).unwrap_or_default();
    Trial { true_source: setup.source, ranking, true_times, estimated_times: Some(estimated) }
}

fn baseline_trial(ranking: Vec<NodeId>, setup: &TrialSetup, count: usize) -> Trial {
    Trial {
        true_source: setup.source,
        ranking,
        true_times: setup.large[..count].iter().map(|c| c.source_time()).collect(),
        estimated_times: None,
    }
}

fn sweep_point(
    runner: &mut Runner,
    trials: usize,
    fraction: f64,
    samples: usize,
    count: usize,
    value: f64,
) -> Result<SweepPoint> {
    let mut records = Vec::with_capacity(trials);
    let mut seconds = Vec::new();
    for t in 0..trials {
        let (_, scored) = runner.scored(t, fraction, samples, count)?;
        let scores: Vec<CascadeScores> = scored[..count].iter().map(|s| s.scores.clone()).collect();
        seconds.extend(scored[..count].iter().map(|s| s.seconds));
        records.push(ranked_trial(&scores, &runner.setups[t]));
    }
    Ok(SweepPoint {
        value,
        cascades: count,
        report: compute_metrics(&records)?,
        mean_seconds: seconds.iter().sum::<f64>() / seconds.len() as f64,
        max_seconds: seconds.iter().copied().fold(0.0, f64::max),
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate().map_err(SleuthError::Experiment)?;
    let start = Instant::now();
    let net = build_network(cfg)?;
    let setups = select_trials(&net, cfg)?;
    let mut runner = Runner { net: &net, cfg, setups: &setups, cache: HashMap::new() };

    let mut per_count: Vec<[Vec<Trial>; 3]> = (0..cfg.cascades).map(|_| Default::default()).collect();
    let mut diagnostics = Vec::with_capacity(cfg.trials);
    for (t, setup) in setups.iter().enumerate() {
        let (observed, scored) = runner.scored(t, cfg.observe_fraction, cfg.samples, cfg.cascades)?;
        let observed = observed[..cfg.cascades].to_vec();
        let scores: Vec<CascadeScores> = scored[..cfg.cascades].iter().map(|s| s.scores.clone()).collect();
        let cascades = scored[..cfg.cascades]
            .iter()
            .zip(&setup.large)
            .map(|(s, full)| {
                let mut order: Vec<_> = s.scores.candidates.iter().collect();
                order.sort_by(|a, b| b.log_likelihood.total_cmp(&a.log_likelihood).then(a.node.cmp(&b.node)));
                CascadeDiagnostics {
                    infected: full.infected_count(),
                    observed: s.scores.observed,
                    m_size: s.scores.m_size,
                    candidates: s.scores.candidates.len(),
                    pieces: s.scores.total_pieces(),
                    evaluated_pieces: s.scores.candidates.iter().map(|c| c.evaluated_pieces).sum(),
                    evaluations: s.scores.candidates.iter().map(|c| c.evaluations).sum(),
                    dropped_samples: s.scores.total_dropped(),
                    true_source_rank: order.iter().position(|c| c.node == setup.source).map(|p| p + 1),
                    seconds: s.seconds,
                }
            })
            .collect();
        diagnostics.push(TrialDiagnostics {
            trial: t,
            source: setup.source,
            source_attempts: setup.attempts,
            large_cascades: setup.large.len(),
            cascades,
        });
        for count in 1..=cfg.cascades {
            let slot = &mut per_count[count - 1];
            slot[0].push(ranked_trial(&scores[..count], setup));
            if cfg.baselines {
                let prefix = &observed[..count];
                let out = outdegree_ranking(&net, prefix)?.into_iter().map(|s| s.node).collect();
                slot[1].push(baseline_trial(out, setup, count));
                let mc_seed = derive_seed(cfg.seed, &[MONTECARLO_STREAM, t as u64]);
                let mc = montecarlo_ranking(&net, prefix, cfg.montecarlo_runs, mc_seed)?;
                slot[2].push(baseline_trial(mc.into_iter().map(|s| s.node).collect(), setup, count));
            }
        }
    }

    let methods = [Method::Likelihood, Method::Outdegree, Method::Montecarlo];
    let mut curves = Vec::new();
    for (m, method) in methods.iter().enumerate() {
        for (k, slot) in per_count.iter().enumerate() {
            if !slot[m].is_empty() {
                curves.push(CurvePoint {
                    method: *method,
                    cascades: k + 1,
                    report: compute_metrics(&slot[m])?,
                    records: slot[m].clone(),
                });
            }
        }
    }

    let mut sweep_observed = Vec::new();
    for &f in &cfg.sweep_observed {
        sweep_observed.push(sweep_point(&mut runner, cfg.trials, f, cfg.samples, cfg.sweep_cascades, f)?);
    }
    let mut sweep_samples = Vec::new();
    for &l in &cfg.sweep_samples {
        sweep_samples.push(sweep_point(&mut runner, cfg.trials, cfg.observe_fraction, l, cfg.sweep_cascades, l as f64)?);
    }

    Ok(ExperimentResult {
        network_nodes: net.node_count(),
        network_edges: net.edge_count(),
        curves,
        sweep_observed,
        sweep_samples,
        trials: diagnostics,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn metric_header(metrics: &[Metric]) -> String {
    metrics
        .iter()
        .map(|m| match m {
            Metric::Sp => "sp",
            Metric::Top10 => "top10_sp",
            Metric::Mse => "mse\tmse_terms",
        })
        .collect::<Vec<_>>()
        .join("\t")
}

fn metric_cells(metrics: &[Metric], r: &MetricReport) -> String {
    metrics
        .iter()
        .map(|m| match m {
            Metric::Sp => r.success.to_string(),
            Metric::Top10 => r.top10_success.to_string(),
            Metric::Mse => format!("{}\t{}", r.mse, r.mse_terms),
        })
        .collect::<Vec<_>>()
        .join("\t")
}

pub fn metrics_tsv(result: &ExperimentResult, metrics: &[Metric]) -> String {
    let mut out = format!("method\tcascades\ttrials\t{}\n", metric_header(metrics));
    for p in &result.curves {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", p.method.name(), p.cascades, p.report.trials, metric_cells(metrics, &p.report));
    }
    out
}

pub fn sweep_tsv(points: &[SweepPoint], axis: &str, metrics: &[Metric]) -> String {
    let mut out = format!("{axis}\tcascades\ttrials\t{}\n", metric_header(metrics));
    for p in points {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", p.value, p.cascades, p.report.trials, metric_cells(metrics, &p.report));
    }
    out
}

pub fn runtime_tsv(result: &ExperimentResult) -> String {
    let mut out = String::from("sweep\tvalue\tcascades\tmean_seconds\tmax_seconds\n");
    for (axis, points) in [("observed_fraction", &result.sweep_observed), ("samples", &result.sweep_samples)] {
        for p in points.iter() {
            let _ = writeln!(out, "{axis}\t{}\t{}\t{:.6}\t{:.6}", p.value, p.cascades, p.mean_seconds, p.max_seconds);
        }
    }
    out
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    config: &'a ExperimentConfig,
    network_nodes: usize,
    network_edges: usize,
    wall_seconds: f64,
    trials: &'a [TrialDiagnostics],
}

pub fn diagnostics_json(result: &ExperimentResult, cfg: &ExperimentConfig) -> String {
    let d = Diagnostics {
        config: cfg,
        network_nodes: result.network_nodes,
        network_edges: result.network_edges,
        wall_seconds: result.wall_seconds,
        trials: &result.trials,
    };
    serde_json::to_string_pretty(&d).expect("diagnostics serialize") + "\n"
}

pub const OUTPUT_FILES: [&str; 5] = ["metrics.tsv", "sweep_observed.tsv", "sweep_samples.tsv", "runtime.tsv", "diagnostics.json"];

/// Write every table of `result` into `dir`.
pub fn write_outputs(result: &ExperimentResult, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    write_text(&dir.join("metrics.tsv"), &metrics_tsv(result, &cfg.metrics))?;
    write_text(&dir.join("sweep_observed.tsv"), &sweep_tsv(&result.sweep_observed, "observed_fraction", &cfg.metrics))?;
    write_text(&dir.join("sweep_samples.tsv"), &sweep_tsv(&result.sweep_samples, "samples", &cfg.metrics))?;
    write_text(&dir.join("runtime.tsv"), &runtime_tsv(result))?;
    write_text(&dir.join("diagnostics.json"), &diagnostics_json(result, cfg))
}
