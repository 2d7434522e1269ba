//! Validated run configuration, persisted next to every report.

use std::fmt;
use std::path::{Path, PathBuf};

use bsft::circuits::{AncillaPolicy, CheckOrder, Criterion, EcMethod, ExRecOptions, GaugeEcConfig};
use bsft::malignancy::{RunOptions, DEFAULT_MAX_COST};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default checkpoint root.
pub const CHECKPOINT_ENV: &str = "BSFT_CHECKPOINT_DIR";

/// Largest block size accepted on the command line.
pub const MAX_N: usize = 15;

/// A bad command line; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeSettings {
    pub policy: AncillaPolicy,
    pub order: CheckOrder,
    pub rounds: Option<usize>,
    pub agree: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub ec_method: EcMethod,
    pub criterion: Criterion,
    pub gauge: GaugeSettings,
    pub orders: Vec<usize>,
    /// Monte-Carlo sample count; `None` for exact runs.
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub chunk_size: u64,
    pub max_cost: f64,
    pub checkpoint_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(n: usize, ec_method: EcMethod) -> Self {
        let g = GaugeEcConfig::default();
        Self {
            n,
            ec_method,
            criterion: Criterion::default(),
            gauge: GaugeSettings {
                policy: g.policy,
                order: g.order,
                rounds: g.rounds,
                agree: g.agree,
            },
            orders: Vec::new(),
            samples: None,
            seed: None,
            jobs: 0,
            chunk_size: RunOptions::default().chunk_size,
            max_cost: DEFAULT_MAX_COST,
            checkpoint_dir: None,
            output: None,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(2..=MAX_N).contains(&self.n) {
            return Err(usage(format!("--n must be in 2..={MAX_N}, got {}", self.n)));
        }
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(usage("--order must be at least 1"));
        }
        if self.samples == Some(0) {
            return Err(usage("--samples must be positive"));
        }
        if self.chunk_size == 0 {
            return Err(usage("--chunk-size must be positive"));
        }
        if self.gauge.rounds == Some(0) || self.gauge.agree == Some(0) {
            return Err(usage("--rounds and --agree must be positive"));
        }
        Ok(())
    }

    pub fn exrec_options(&self) -> ExRecOptions {
        ExRecOptions {
            gauge: GaugeEcConfig {
                policy: self.gauge.policy,
                order: self.gauge.order,
                rounds: self.gauge.rounds,
                agree: self.gauge.agree,
            },
            criterion: self.criterion,
        }
    }

    pub fn run_options(&self, checkpoint: Option<PathBuf>) -> RunOptions {
        RunOptions {
            jobs: self.jobs,
            chunk_size: self.chunk_size,
            checkpoint,
            stop_after_chunks: None,
            max_cost: self.max_cost,
        }
    }

    /// Checkpoint directory for one order: the explicit `--checkpoint`, else
    /// a subdirectory of `$BSFT_CHECKPOINT_DIR` named after the run.
    pub fn checkpoint_for(&self, descriptor: &str, order: usize) -> Option<PathBuf> {
        let tag = match (self.samples, self.seed) {
            (Some(n), Some(s)) => format!("k{order}-mc-n{n}-s{s}"),
            _ => format!("k{order}-exact-c{}", self.chunk_size),
        };
        let name = format!("{}-{tag}", sanitize(descriptor));
        match &self.checkpoint_dir {
            Some(dir) if self.orders.len() == 1 => Some(dir.clone()),
            Some(dir) => Some(dir.join(name)),
            None => std::env::var_os(CHECKPOINT_ENV)
                .filter(|v| !v.is_empty())
                .map(|root| Path::new(&root).join(name)),
        }
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Sidecar written next to `report`: the configuration and timing.
#[derive(Debug, Serialize)]
pub struct RunRecord<'a> {
    pub tool_version: &'a str,
    pub circuit_hash: &'a str,
    pub exrec: &'a str,
    pub config: &'a RunConfig,
    pub elapsed_seconds: f64,
}

pub fn sidecar_path(report: &Path) -> PathBuf {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    report.with_file_name(format!("{stem}.run.json"))
}
