//! Text formats for networks and cascades.
//!
//! Network file:
//!
//! ```text
//! # cascade-sleuth network v1
//! N k
//! j i alpha
//! ```
//!
//! Cascade file, one cascade per line:
//!
//! ```text
//! # cascade-sleuth cascades v1
//! src_hint;T;node:time,node:time,...
//! ```
//!
//! `src_hint` is `-1` when the source is unknown and `T` is the absolute
//! observation cut-off (`inf` allowed). Lines starting with `#` are
//! comments; a `# cascade-sleuth <kind> v<n>` comment is a format header
//! and must name a supported version. Floats are written in shortest
//! round-trip form so a written file reads back bit-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cascade_sleuth_core::rng::stream;
use cascade_sleuth_core::simulate::mask_cascade;
use cascade_sleuth_core::{Cascade, Edge, Kernel, Network, NodeId, ObservedCascade};

use crate::error::{Result, SleuthError};

pub const NETWORK_FORMAT_VERSION: u32 = 1;
pub const CASCADE_FORMAT_VERSION: u32 = 1;

/// Stream tag for masking complete cascades read from a file.
pub const MASK_STREAM: u64 = 0x6d61_736b;

const MAGIC: &str = "cascade-sleuth";

fn header(kind: &str, version: u32) -> String {
    format!("# {MAGIC} {kind} v{version}\n")
}

/// Content lines with 1-based numbers. Validates format headers.
fn content_lines<'a>(
    text: &'a str,
    kind: &str,
    version: u32,
    path: &Path,
) -> Result<Vec<(usize, &'a str)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some(MAGIC) {
                let found_kind = words.next().unwrap_or("");
                let found_version = words.next().unwrap_or("");
                if found_kind != kind || found_version != format!("v{version}") {
                    return Err(parse_error(
                        path,
                        i + 1,
                        format!("unsupported header `{line}`, expected `{}`", header(kind, version).trim()),
                    ));
                }
            }
            continue;
        }
        if !line.is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> SleuthError {
    SleuthError::Parse { path: path.to_path_buf(), line, message: message.into() }
}

fn field<T: std::str::FromStr>(s: &str, what: &str, path: &Path, line: usize) -> Result<T> {
    s.parse().map_err(|_| parse_error(path, line, format!("cannot parse {what} from `{s}`")))
}

pub fn format_network(net: &Network, manifest: Option<&str>) -> String {
    let mut out = header("network", NETWORK_FORMAT_VERSION);
    if let Some(m) = manifest {
        let _ = writeln!(out, "# manifest {m}");
    }
    let _ = writeln!(out, "{} {}", net.node_count(), net.kernel().shape());
    for e in net.edges() {
        let _ = writeln!(out, "{} {} {}", e.source, e.target, e.alpha);
    }
    out
}

pub fn parse_network(text: &str, path: &Path) -> Result<Network> {
    let lines = content_lines(text, "network", NETWORK_FORMAT_VERSION, path)?;
    let Some(&(first_no, first)) = lines.first() else {
        return Err(parse_error(path, 1, "missing `N k` line"));
    };
    let parts: Vec<&str> = first.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(parse_error(path, first_no, "expected `N k`"));
    }
    let n: usize = field(parts[0], "node count", path, first_no)?;
    let shape: f64 = field(parts[1], "kernel shape", path, first_no)?;
    if n == 0 {
        return Err(parse_error(path, first_no, "node count must be positive"));
    }
    let kernel = Kernel::new(shape).map_err(|e| parse_error(path, first_no, e.to_string()))?;
    let mut seen = BTreeSet::new();
    let mut edges = Vec::with_capacity(lines.len() - 1);
    for &(no, line) in &lines[1..] {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_error(path, no, "expected `j i alpha`"));
        }
        let source: NodeId = field(parts[0], "source node", path, no)?;
        let target: NodeId = field(parts[1], "target node", path, no)?;
        let alpha: f64 = field(parts[2], "alpha", path, no)?;
        if source >= n || target >= n {
            return Err(parse_error(path, no, format!("node id out of range for {n} nodes")));
        }
        if source == target {
            return Err(parse_error(path, no, format!("self-loop on node {source}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(parse_error(path, no, format!("alpha must be positive and finite, got {alpha}")));
        }
        if !seen.insert((source, target)) {
            return Err(parse_error(path, no, format!("duplicate edge {source} -> {target}")));
        }
        edges.push(Edge { source, target, alpha });
    }
    Ok(Network::new(n, kernel, edges)?)
}

/// One line of a cascade file.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeRecord {
    pub source: Option<NodeId>,
    /// Absolute observation cut-off.
    pub window: f64,
    /// `(node, time)` sorted by time, then node.
    pub entries: Vec<(NodeId, f64)>,
}

fn sort_entries(entries: &mut [(NodeId, f64)]) {
    entries.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
}

impl CascadeRecord {
    pub fn from_cascade(c: &Cascade) -> Self {
        let mut entries: Vec<_> = c.infected().map(|i| (i, c.time(i))).collect();
        sort_entries(&mut entries);
        CascadeRecord { source: Some(c.source()), window: c.window(), entries }
    }

    pub fn from_observed(c: &ObservedCascade, source_hint: Option<NodeId>) -> Self {
        let mut entries: Vec<_> = c.observed().iter().map(|(&i, &t)| (i, t)).collect();
        sort_entries(&mut entries);
        CascadeRecord { source: source_hint, window: c.window(), entries }
    }

    /// Whether the record lists its own source, i.e. is a complete cascade.
    pub fn is_complete(&self) -> bool {
        self.source.is_some_and(|s| self.entries.iter().any(|&(i, _)| i == s))
    }

    pub fn to_cascade(&self, node_count: usize) -> Result<Cascade, String> {
        let source = self.source.ok_or("complete cascade needs a source hint")?;
        if !self.is_complete() {
            return Err(format!("source {source} has no infection time"));
        }
        let mut times = vec![f64::INFINITY; node_count];
        for &(i, t) in &self.entries {
            *times.get_mut(i).ok_or(format!("node {i} out of range"))? = t;
        }
        Cascade::new(times, source, self.window).map_err(|e| e.to_string())
    }

    /// The entries as observations; the hinted source must not be among them.
    pub fn to_observed(&self, node_count: usize) -> Result<ObservedCascade, String> {
        if self.is_complete() {
            return Err("the source must be hidden in an observed cascade".into());
        }
        let observed: BTreeMap<NodeId, f64> = self.entries.iter().copied().collect();
        ObservedCascade::new(node_count, observed, self.window).map_err(|e| e.to_string())
    }
}

pub fn format_cascades(records: &[CascadeRecord], manifest: Option<&str>) -> String {
    let mut out = header("cascades", CASCADE_FORMAT_VERSION);
    if let Some(m) = manifest {
        let _ = writeln!(out, "# manifest {m}");
    }
    for r in records {
        let hint = r.source.map_or(-1, |s| s as i64);
        let _ = write!(out, "{hint};{};", r.window);
        let mut entries = r.entries.clone();
        sort_entries(&mut entries);
        for (k, (i, t)) in entries.iter().enumerate() {
            let _ = write!(out, "{}{i}:{t}", if k > 0 { "," } else { "" });
        }
        out.push('\n');
    }
    out
}

/// Parse cascade lines. `node_count`, when known, bounds node ids.
pub fn parse_cascades(text: &str, node_count: Option<usize>, path: &Path) -> Result<Vec<CascadeRecord>> {
    let lines = content_lines(text, "cascades", CASCADE_FORMAT_VERSION, path)?;
    let mut records = Vec::with_capacity(lines.len());
    for (index, &(no, line)) in lines.iter().enumerate() {
        let cascade_error = |message: String| parse_error(path, no, format!("cascade {index}: {message}"));
        let parts: Vec<&str> = line.splitn(3, ';').collect();
        if parts.len() != 3 {
            return Err(cascade_error("expected `src_hint;T;node:time,...`".into()));
        }
        let hint: i64 = field(parts[0].trim(), "source hint", path, no)?;
        let source = match hint {
            -1 => None,
            h if h >= 0 => Some(h as NodeId),
            h => return Err(cascade_error(format!("source hint {h} must be -1 or a node id"))),
        };
        let window: f64 = field(parts[1].trim(), "window", path, no)?;
        if window.is_nan() {
            return Err(cascade_error("window is NaN".into()));
        }
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for pair in parts[2].split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let Some((node, time)) = pair.split_once(':') else {
                return Err(cascade_error(format!("expected `node:time`, got `{pair}`")));
            };
            let node: NodeId = field(node.trim(), "node id", path, no)?;
            let time: f64 = field(time.trim(), "time", path, no)?;
            if !time.is_finite() {
                return Err(cascade_error(format!("node {node} has non-finite time {time}")));
            }
            if time >= window {
                return Err(cascade_error(format!("node {node} time {time} is not before the window {window}")));
            }
            if node_count.is_some_and(|n| node >= n) {
                return Err(cascade_error(format!("node {node} out of range")));
            }
            if !seen.insert(node) {
                return Err(cascade_error(format!("duplicate node {node}")));
            }
            entries.push((node, time));
        }
        if let (Some(s), Some(n)) = (source, node_count) {
            if s >= n {
                return Err(cascade_error(format!("source hint {s} out of range")));
            }
        }
        sort_entries(&mut entries);
        records.push(CascadeRecord { source, window, entries });
    }
    Ok(records)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| SleuthError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| SleuthError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| SleuthError::io(path, e))
}

pub fn read_network(path: &Path) -> Result<Network> {
    parse_network(&read_text(path)?, path)
}

pub fn write_network(path: &Path, net: &Network) -> Result<()> {
    write_text(path, &format_network(net, None))
}

pub fn read_cascades(path: &Path, node_count: Option<usize>) -> Result<Vec<CascadeRecord>> {
    parse_cascades(&read_text(path)?, node_count, path)
}

pub fn write_cascades(path: &Path, records: &[CascadeRecord]) -> Result<()> {
    write_text(path, &format_cascades(records, None))
}

fn cascade_error(path: &Path, index: usize, message: String) -> SleuthError {
    SleuthError::Cascade { path: PathBuf::from(path), index, message }
}

/// Complete cascades for training. Every record needs its source listed.
pub fn training_set(records: &[CascadeRecord], node_count: usize, path: &Path) -> Result<Vec<Cascade>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| r.to_cascade(node_count).map_err(|m| cascade_error(path, i, m)))
        .collect()
}

/// Observed cascades for identification. Complete records are masked to
/// `fraction` of their non-source infections with the stream
/// `(seed, [MASK_STREAM, index])`; records without their source are used
/// as they are. Each cascade needs an observed node besides its source.
pub fn identification_set(
    records: &[CascadeRecord],
    node_count: usize,
    path: &Path,
    fraction: f64,
    seed: u64,
) -> Result<Vec<ObservedCascade>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let observed_non_source = r.entries.iter().filter(|&&(n, _)| Some(n) != r.source).count();
            if observed_non_source == 0 {
                return Err(cascade_error(path, i, "needs at least one observed node besides the source".into()));
            }
            if r.is_complete() {
                let full = r.to_cascade(node_count).map_err(|m| cascade_error(path, i, m))?;
                let mut rng = stream(seed, &[MASK_STREAM, i as u64]);
                mask_cascade(&full, fraction, &mut rng).map_err(|e| cascade_error(path, i, e.to_string()))
            } else {
                r.to_observed(node_count).map_err(|m| cascade_error(path, i, m))
            }
        })
        .collect()
}
