//! Experiment configuration, read from TOML.
//!
//! ```toml
//! name = "trend"
//! kind = "bottleneck-trend"
//! d = 3
//! lambda = [4.4, 0.5]
//! n = [9, 12, 15]
//! samples = 50
//! seed = 2024
//! t = [0]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use hardcore::enumerate::MAX_ENUM_N;
use hardcore::moments::MAX_SIZE_BIASED_N;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Tree fixed points over a λ grid.
    PhaseDiagram,
    /// Exact second-to-first moment ratio against `τ` along a list of `n`.
    RatioConvergence,
    /// Median bottleneck ratio over sampled graphs, per `n`, `λ` and `t`.
    BottleneckTrend,
    /// Cycle-series terms for `τ` and a size-biased double-edge check.
    Conditioning,
}

impl ExperimentKind {
    fn needs_lambda(self) -> bool {
        matches!(self, Self::PhaseDiagram | Self::BottleneckTrend)
    }

    fn needs_n(self) -> bool {
        !matches!(self, Self::PhaseDiagram)
    }

    /// Occupancy targets `a = b = n/d` must be integers.
    fn needs_divisible_n(self) -> bool {
        matches!(self, Self::RatioConvergence | Self::Conditioning)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub d: u32,
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub n: Vec<usize>,
    /// Graph samples per `n` (bottleneck trend, conditioning).
    #[serde(default)]
    pub samples: usize,
    pub seed: Option<u64>,
    /// Occupancy-difference thresholds for the bottleneck trend.
    #[serde(default)]
    pub t: Vec<usize>,
    /// Largest cycle length in the conditioning series.
    #[serde(default = "default_i_max")]
    pub i_max: usize,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn default_i_max() -> usize {
    40
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).context("malformed experiment config")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every reason the config cannot be run; empty iff it is runnable.
pub fn validate_config(cfg: &ExperimentConfig) -> Vec<Violation> {
    let mut v = Vec::new();
    let mut bad = |field: &'static str, message: String| v.push(Violation { field, message });
    if cfg.name.trim().is_empty() {
        bad("name", "must not be empty".into());
    }
    if cfg.seed.is_none() {
        bad("seed", "missing; every experiment needs an explicit seed".into());
    }
    if cfg.d < 3 {
        bad("d", format!("must be at least 3, got {}", cfg.d));
    }
    if cfg.kind.needs_lambda() && cfg.lambda.is_empty() {
        bad("lambda", "grid is empty".into());
    }
    if let Some(l) = cfg.lambda.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        bad("lambda", format!("values must be positive and finite, got {l}"));
    }
    if cfg.kind.needs_n() && cfg.n.is_empty() {
        bad("n", "list is empty".into());
    }
    if cfg.n.contains(&0) {
        bad("n", "values must be positive".into());
    }
    if cfg.kind.needs_divisible_n() && cfg.d > 0 {
        let off: Vec<String> = cfg.n.iter().filter(|&&n| n % cfg.d as usize != 0).map(|n| n.to_string()).collect();
        if !off.is_empty() {
            bad("n", format!("{} not divisible by d = {}, so n/d is not an integer occupancy", off.join(", "), cfg.d));
        }
    }
    if cfg.threads == Some(0) {
        bad("threads", "must be positive".into());
    }
    match cfg.kind {
        ExperimentKind::BottleneckTrend => {
            if cfg.samples == 0 {
                bad("samples", "must be positive".into());
            }
            if cfg.t.is_empty() {
                bad("t", "threshold list is empty".into());
            }
            if let Some(n) = cfg.n.iter().find(|&&n| n > MAX_ENUM_N) {
                bad("n", format!("{n} exceeds the enumeration cap {MAX_ENUM_N}"));
            }
        }
        ExperimentKind::Conditioning => {
            if cfg.i_max < 2 || cfg.i_max % 2 != 0 {
                bad("i_max", format!("must be even and at least 2, got {}", cfg.i_max));
            }
            if cfg.samples > 0 {
                if let Some(n) = cfg.n.iter().find(|&&n| n > MAX_SIZE_BIASED_N) {
                    bad("n", format!("{n} exceeds the size-biased cap {MAX_SIZE_BIASED_N}"));
                }
                if cfg.samples < 2 {
                    bad("samples", "need at least two samples".into());
                }
            }
        }
        ExperimentKind::RatioConvergence => {
            if cfg.n.len() < 2 {
                bad("n", "need at least two sizes to see convergence".into());
            }
        }
        ExperimentKind::PhaseDiagram => {}
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "ratio"
kind = "ratio-convergence"
d = 3
n = [30, 60, 120]
seed = 1
"#;

    #[test]
    fn well_formed_sample_is_valid() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert!(validate_config(&cfg).is_empty(), "{:?}", validate_config(&cfg));
        assert_eq!(cfg.i_max, 40);
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn missing_seed_and_bad_n() {
        let mut cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        cfg.seed = None;
        cfg.n = vec![30, 31];
        let v = validate_config(&cfg);
        assert!(v.iter().any(|x| x.field == "seed"));
        assert!(v.iter().any(|x| x.field == "n" && x.message.contains("31")));
    }

    #[test]
    fn empty_lambda_grid() {
        let cfg = ExperimentConfig::from_toml("name='p'\nkind='phase-diagram'\nd=3\nseed=0\n").unwrap();
        assert_eq!(validate_config(&cfg), vec![Violation { field: "lambda", message: "grid is empty".into() }]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("name='p'\nkind='phase-diagram'\nd=3\nlambdas=[1.0]\n").is_err());
    }
}
