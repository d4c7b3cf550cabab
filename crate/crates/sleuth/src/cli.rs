//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.
//! `CASCADE_SLEUTH_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cascade_sleuth_core::identify::{rank_sources, IdentifyConfig};
use cascade_sleuth_core::kronecker::{assign_rates, generate_kronecker};
use cascade_sleuth_core::learn::{learn_rates, select_l1, LearnConfig};
use cascade_sleuth_core::piecewise::PieceSearch;
use cascade_sleuth_core::rng::stream;
use cascade_sleuth_core::simulate::simulate_cascade;
use cascade_sleuth_core::{Kernel, KroneckerSpec, NetworkType, NodeId, Topology};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::SleuthError;
use crate::experiment::{run_experiment, write_outputs, OUTPUT_FILES};
use crate::io::{
    format_cascades, format_network, identification_set, read_cascades, read_network, training_set, write_text,
    CascadeRecord,
};
use crate::manifest::{manifest_path_for, manifest_reference, RunManifest};

pub const THREADS_ENV: &str = "CASCADE_SLEUTH_THREADS";

/// Regularization weights tried when `--l1` is not given.
pub const L1_GRID: [f64; 6] = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Parser)]
#[command(name = "cascade-sleuth", version, about = "Find the source of partially observed cascades")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a Kronecker network with uniform random edge scales.
    GenerateNetwork(GenerateArgs),
    /// Simulate complete cascades on a network.
    Simulate(SimulateArgs),
    /// Estimate exponential edge rates from complete cascades.
    Learn(LearnArgs),
    /// Rank candidate sources of cascades that share one source.
    Identify(IdentifyArgs),
    /// Run a synthetic benchmark described by a TOML config.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NetworkKind {
    CorePeriphery,
    Random,
    Hierarchical,
}

impl From<NetworkKind> for NetworkType {
    fn from(k: NetworkKind) -> Self {
        match k {
            NetworkKind::CorePeriphery => NetworkType::CorePeriphery,
            NetworkKind::Random => NetworkType::Random,
            NetworkKind::Hierarchical => NetworkType::Hierarchical,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long = "type", value_enum)]
    pub kind: NetworkKind,
    #[arg(long)]
    pub power: u32,
    #[arg(long)]
    pub edges: usize,
    #[arg(long, default_value_t = 5.0)]
    pub rate_low: f64,
    #[arg(long, default_value_t = 10.0)]
    pub rate_high: f64,
    /// Weibull shape shared by all edges.
    #[arg(long, default_value_t = 1.0)]
    pub shape: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub net: PathBuf,
    /// Number of distinct random source nodes.
    #[arg(long, default_value_t = 1)]
    pub sources: usize,
    #[arg(long, default_value_t = 1)]
    pub cascades_per_source: usize,
    /// Observation window after the source time (`inf` allowed).
    #[arg(long)]
    pub window: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TopologyKind {
    /// Edges of the network given with `--net`.
    Known,
    /// Every ordered pair of distinct nodes.
    AllPairs,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub cascades: PathBuf,
    #[arg(long, value_enum, default_value = "all-pairs")]
    pub topology: TopologyKind,
    /// Network whose edges form the known topology.
    #[arg(long)]
    pub net: Option<PathBuf>,
    /// Node count for the all-pairs topology when `--net` is absent.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// l1 weight; chosen by an 80/20 split when absent.
    #[arg(long)]
    pub l1: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub prune_below: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub cascades: PathBuf,
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
    /// Fraction of non-source infections observed when a cascade file
    /// holds complete cascades.
    #[arg(long, default_value_t = 0.1)]
    pub observe_frac: f64,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Per-piece search tolerance; defaults to a width-relative value.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    pub kappa: f64,
    /// Also run the two-point shrinking search on every evaluated piece.
    #[arg(long)]
    pub paper_lemma2_search: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ranking TSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Diagnostics JSON; `<out>.diagnostics.json` when absent.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(SleuthError),
}

impl From<SleuthError> for CliError {
    fn from(e: SleuthError) -> Self {
        CliError::Data(e)
    }
}

impl From<cascade_sleuth_core::Error> for CliError {
    fn from(e: cascade_sleuth_core::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parse `argv`, run the command and return the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    // A pool configured earlier in this process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::GenerateNetwork(a) => generate(a),
        Command::Simulate(a) => simulate(a),
        Command::Learn(a) => learn(a),
        Command::Identify(a) => identify(a),
        Command::Bench(a) => bench(a),
    }
}

fn finish_manifest(mut manifest: RunManifest, artifact: &Path, start: Instant) -> CliResult<()> {
    manifest.add_output(artifact);
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    manifest.write(&manifest_path_for(artifact))?;
    Ok(())
}

fn generate(a: GenerateArgs) -> CliResult<()> {
    let start = Instant::now();
    let kernel = Kernel::new(a.shape).map_err(|e| CliError::Usage(e.to_string()))?;
    if !(a.rate_low > 0.0 && a.rate_low <= a.rate_high) {
        return Err(CliError::Usage(format!("invalid rate bounds [{}, {}]", a.rate_low, a.rate_high)));
    }
    if a.power == 0 || a.power > 20 {
        return Err(CliError::Usage(format!("--power {} outside 1..=20", a.power)));
    }
    let spec = KroneckerSpec::preset(a.kind.into(), a.power, Some(a.edges))?;
    let topo = generate_kronecker(&spec, &mut stream(a.seed, &[0]))?;
    let net = assign_rates(&topo, a.rate_low, a.rate_high, kernel, &mut stream(a.seed, &[1]))?;
    write_text(&a.out, &format_network(&net, Some(&manifest_reference(&a.out))))?;
    finish_manifest(RunManifest::new("generate-network", a.seed), &a.out, start)
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let start = Instant::now();
    if !(a.window > 0.0) {
        return Err(CliError::Usage(format!("--window must be positive, got {}", a.window)));
    }
    let net = read_network(&a.net)?;
    if a.sources == 0 || a.sources > net.node_count() {
        return Err(CliError::Usage(format!("--sources must be in 1..={}", net.node_count())));
    }
    let mut nodes: Vec<NodeId> = (0..net.node_count()).collect();
    nodes.shuffle(&mut stream(a.seed, &[0]));
    let mut records = Vec::with_capacity(a.sources * a.cascades_per_source);
    for (k, &s) in nodes[..a.sources].iter().enumerate() {
        for c in 0..a.cascades_per_source {
            let mut rng = stream(a.seed, &[1, k as u64, c as u64]);
            records.push(CascadeRecord::from_cascade(&simulate_cascade(&net, s, 0.0, a.window, &mut rng)?));
        }
    }
    write_text(&a.out, &format_cascades(&records, Some(&manifest_reference(&a.out))))?;
    let mut manifest = RunManifest::new("simulate", a.seed);
    manifest.add_input(&a.net)?;
    finish_manifest(manifest, &a.out, start)
}

fn learn(a: LearnArgs) -> CliResult<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("learn", a.seed);
    let known = match &a.net {
        Some(path) => {
            manifest.add_input(path)?;
            Some(read_network(path)?)
        }
        None => None,
    };
    let node_count = match (&known, a.nodes) {
        (Some(net), Some(n)) if n != net.node_count() => {
            return Err(CliError::Usage(format!("--nodes {n} disagrees with the network's {}", net.node_count())))
        }
        (Some(net), _) => net.node_count(),
        (None, Some(n)) if n > 0 => n,
        _ => return Err(CliError::Usage("learn needs --net or --nodes".into())),
    };
    let topology = match a.topology {
        TopologyKind::Known => match &known {
            Some(net) => net.topology(),
            None => return Err(CliError::Usage("--topology known needs --net".into())),
        },
        TopologyKind::AllPairs => Topology::all_pairs(node_count),
    };
    manifest.add_input(&a.cascades)?;
    let records = read_cascades(&a.cascades, Some(node_count))?;
    let cascades = training_set(&records, node_count, &a.cascades)?;
    let base = LearnConfig { prune_below: a.prune_below, ..LearnConfig::default() };
    let l1 = match a.l1 {
        Some(l1) if l1 >= 0.0 => l1,
        Some(l1) => return Err(CliError::Usage(format!("--l1 must be nonnegative, got {l1}"))),
        None => select_l1(&topology, &cascades, &L1_GRID, &base)?,
    };
    let config = LearnConfig { l1, ..base };
    let net = learn_rates(&topology, &cascades, &config)?.to_network(config.prune_below)?;
    write_text(&a.out, &format_network(&net, Some(&manifest_reference(&a.out))))?;
    finish_manifest(manifest, &a.out, start)
}

#[derive(Serialize)]
struct IdentifyDiagnostics {
    manifest: Option<String>,
    cascades: usize,
    candidates: usize,
    observed: Vec<usize>,
    samples: usize,
    wall_seconds: f64,
}

fn identify(a: IdentifyArgs) -> CliResult<()> {
    let start = Instant::now();
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    if !(a.observe_frac > 0.0 && a.observe_frac <= 1.0) {
        return Err(CliError::Usage(format!("--observe-frac {} outside (0, 1]", a.observe_frac)));
    }
    if a.epsilon.is_some_and(|e| !(e > 0.0)) || !(a.kappa > 0.0) {
        return Err(CliError::Usage("--epsilon and --kappa must be positive".into()));
    }
    let net = read_network(&a.net)?;
    let records = read_cascades(&a.cascades, Some(net.node_count()))?;
    if records.is_empty() {
        return Err(SleuthError::Cascade { path: a.cascades.clone(), index: 0, message: "file holds no cascades".into() }.into());
    }
    let observed = identification_set(&records, net.node_count(), &a.cascades, a.observe_frac, a.seed)?;
    let config = IdentifyConfig {
        samples: a.samples,
        kappa: a.kappa,
        search: PieceSearch { epsilon: a.epsilon, two_point: a.paper_lemma2_search },
        seed: a.seed,
    };
    let ranking = rank_sources(&net, &observed, &config)?;

    let manifest_ref = a.out.as_deref().map(manifest_reference);
    let mut tsv = String::new();
    if let Some(m) = &manifest_ref {
        let _ = writeln!(tsv, "# manifest {m}");
    }
    tsv.push_str("rank\tnode\tbest_ts\ttotal_loglik\n");
    for (k, e) in ranking.top(a.top).iter().enumerate() {
        let times: Vec<String> = e.best_times.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(tsv, "{}\t{}\t{}\t{}", k + 1, e.node, times.join(","), e.total_log_likelihood);
    }
    let diagnostics = IdentifyDiagnostics {
        manifest: manifest_ref,
        cascades: observed.len(),
        candidates: ranking.len(),
        observed: observed.iter().map(|c| c.observed().len()).collect(),
        samples: a.samples,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&diagnostics).expect("diagnostics serialize") + "\n";
    match &a.out {
        Some(out) => {
            write_text(out, &tsv)?;
            let diag_path = a.diagnostics.clone().unwrap_or_else(|| with_suffix(out, ".diagnostics.json"));
            write_text(&diag_path, &json)?;
            let mut manifest = RunManifest::new("identify", a.seed);
            manifest.add_input(&a.net)?;
            manifest.add_input(&a.cascades)?;
            manifest.add_output(&diag_path);
            finish_manifest(manifest, out, start)?;
        }
        None => {
            print!("{tsv}");
            if let Some(d) = &a.diagnostics {
                write_text(d, &json)?;
            }
        }
    }
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn bench(a: BenchArgs) -> CliResult<()> {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::read(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let result = run_experiment(&cfg)?;
    write_outputs(&result, &cfg, &a.out)?;
    let mut manifest = RunManifest::new("bench", cfg.seed);
    manifest.add_input(&a.config)?;
    if let Some(net) = &cfg.network_file {
        manifest.add_input(net)?;
    }
    for f in OUTPUT_FILES {
        manifest.add_output(Path::new(f));
    }
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    manifest.write(&a.out.join("manifest.json"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
