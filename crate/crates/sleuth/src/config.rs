//! Experiment configuration, read from a flat TOML document.
//!
//! ```toml
//! network_type = "core-periphery"
//! power = 8
//! edges = 512
//! trials = 10
//! cascades = 10
//! observe_fraction = 0.1
//! samples = 400
//! seed = 1
//! sweep_observed = [0.1, 0.25, 0.5, 0.75, 0.9]
//! sweep_samples = [100, 200, 400, 800]
//! ```
//!
//! Every key is optional; missing keys take the defaults below.

use std::path::{Path, PathBuf};

use cascade_sleuth_core::NetworkType;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SleuthError};
use crate::io::read_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Sp,
    Top10,
    Mse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Read the network from this file instead of generating one.
    pub network_file: Option<PathBuf>,
    /// `core-periphery`, `random` or `hierarchical`.
    pub network_type: String,
    pub power: u32,
    pub edges: usize,
    pub rate_low: f64,
    pub rate_high: f64,
    pub kernel_shape: f64,
    /// Observation window after the source time.
    pub window: f64,
    /// Number of source trials.
    pub trials: usize,
    /// Cascades simulated per candidate source while selecting sources.
    pub simulated_per_source: usize,
    /// Large cascades a node must trigger to qualify as a source.
    pub min_large: usize,
    /// A cascade is large when it infects more than this many nodes.
    pub large_threshold: usize,
    /// Largest number of cascades combined per trial; metrics are
    /// reported for every count from 1 up to this.
    pub cascades: usize,
    pub observe_fraction: f64,
    pub samples: usize,
    pub kappa: f64,
    pub epsilon: Option<f64>,
    pub lemma2_search: bool,
    pub montecarlo_runs: usize,
    pub baselines: bool,
    pub metrics: Vec<Metric>,
    pub seed: u64,
    /// Observed fractions for the accuracy and runtime sweep.
    pub sweep_observed: Vec<f64>,
    /// Sample sizes for the accuracy sweep.
    pub sweep_samples: Vec<usize>,
    /// Cascades combined per trial in the sweeps.
    pub sweep_cascades: usize,
    /// Candidate nodes tried per trial before giving up on finding a source.
    pub max_source_attempts: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            network_file: None,
            network_type: "core-periphery".into(),
            power: 8,
            edges: 512,
            rate_low: 5.0,
            rate_high: 10.0,
            kernel_shape: 1.0,
            window: 10.0,
            trials: 10,
            simulated_per_source: 100,
            min_large: 10,
            large_threshold: 40,
            cascades: 10,
            observe_fraction: 0.1,
            samples: 400,
            kappa: 3.0,
            epsilon: None,
            lemma2_search: false,
            montecarlo_runs: 100,
            baselines: true,
            metrics: vec![Metric::Sp, Metric::Top10, Metric::Mse],
            seed: 0,
            sweep_observed: Vec::new(),
            sweep_samples: Vec::new(),
            sweep_cascades: 1,
            max_source_attempts: 10_000,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| SleuthError::Config { path: path.into(), message: e.to_string() })?;
        cfg.validate().map_err(|message| SleuthError::Config { path: path.into(), message })?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_toml(&read_text(path)?, path)
    }

    pub fn network_kind(&self) -> std::result::Result<NetworkType, String> {
        self.network_type.parse().map_err(|_| format!("unknown network_type `{}`", self.network_type))
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let positive = [
            ("trials", self.trials),
            ("simulated_per_source", self.simulated_per_source),
            ("min_large", self.min_large),
            ("cascades", self.cascades),
            ("samples", self.samples),
            ("sweep_cascades", self.sweep_cascades),
            ("max_source_attempts", self.max_source_attempts),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.baselines && self.montecarlo_runs == 0 {
            return Err("montecarlo_runs must be positive".into());
        }
        if self.network_file.is_none() {
            self.network_kind()?;
            if self.power == 0 || self.power > 20 {
                return Err(format!("power {} outside 1..=20", self.power));
            }
        }
        if self.min_large > self.simulated_per_source {
            return Err("min_large exceeds simulated_per_source".into());
        }
        let fractions = std::iter::once(&self.observe_fraction).chain(&self.sweep_observed);
        for &f in fractions {
            if !(f > 0.0 && f <= 1.0) {
                return Err(format!("observed fraction {f} outside (0, 1]"));
            }
        }
        if self.sweep_samples.contains(&0) {
            return Err("sweep_samples entries must be positive".into());
        }
        if !(self.rate_low > 0.0 && self.rate_low <= self.rate_high && self.rate_high.is_finite()) {
            return Err(format!("rate bounds [{}, {}] invalid", self.rate_low, self.rate_high));
        }
        if !(self.kernel_shape > 0.0 && self.kernel_shape.is_finite()) {
            return Err(format!("kernel_shape {} must be positive", self.kernel_shape));
        }
        if !(self.window > 0.0) {
            return Err(format!("window {} must be positive", self.window));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(format!("kappa {} must be positive", self.kappa));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(format!("epsilon {e} must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let cfg = ExperimentConfig::from_toml("trials = 3\nsweep_samples = [10, 20]\n", Path::new("x")).unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.samples, 400);
        assert_eq!(cfg.sweep_samples, vec![10, 20]);
    }

    #[test]
    fn rejects_bad_values() {
        for text in ["trials = 0", "observe_fraction = 1.5", "network_type = \"ring\"", "bogus = 1", "rate_low = 0.0"] {
            assert!(ExperimentConfig::from_toml(text, Path::new("x")).is_err(), "{text}");
        }
    }
}
