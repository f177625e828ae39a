//! Resolved run configuration. Every CLI invocation is turned into a
//! [`RunConfig`] first; `qcmi run --config` replays one from JSON.

use std::path::PathBuf;

use qcmi::netinfer::EdgeMethod;
use qcmi::{EstimatorConfig, PotentialKind, PotentialParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// `None` writes to `$QCMI_OUTPUT_DIR/<default name>` if set, else stdout.
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// kNN qCMI with importance weights.
    Qcmi,
    /// Plain kNN CMI (no potential).
    Cmi,
    /// Histogram qCMI baseline.
    Partition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    #[serde(default)]
    pub params: PotentialParams,
    /// Grid CSV, required for `grid` potentials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSpec {
    pub input: PathBuf,
    pub method: Method,
    pub potential: Option<PotentialSpec>,
    pub estimator: EstimatorConfig,
    /// Bins per dimension for `partition`; `None` uses the default rule.
    pub bins: Option<usize>,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    Mod1 {
        n: usize,
        degree: u32,
        width: f64,
    },
    BetaGaussian {
        n: usize,
        alpha: f64,
        beta: f64,
        sigma: f64,
    },
    ZeroInflated {
        n: usize,
        width: f64,
        zeros: usize,
    },
    LinearDecay {
        steps: usize,
        runs: usize,
        sigma: f64,
    },
}

impl Generator {
    pub fn slug(&self) -> &'static str {
        match self {
            Generator::Mod1 { .. } => "mod1",
            Generator::BetaGaussian { .. } => "beta-gaussian",
            Generator::ZeroInflated { .. } => "zero-inflated",
            Generator::LinearDecay { .. } => "linear-decay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub generator: Generator,
    pub seed: u64,
    pub output: OutputSpec,
    /// Where to write the ground-truth adjacency of a time series.
    pub adjacency: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// qCMI vs input skew degree n = 1..10 at fixed N.
    #[value(name = "mod1-sweep-n")]
    #[serde(rename = "mod1-sweep-n")]
    Mod1SweepDegree,
    /// qCMI error vs sample size N at degree 5.
    #[value(name = "mod1-sweep-N")]
    #[serde(rename = "mod1-sweep-N")]
    Mod1SweepSize,
    /// Beta inputs with Gaussian noise, sigma in {0.3, 1.0}, vs N.
    BetaGaussian,
    /// CMI and qCMI vs number of zeros added to 1000 samples.
    ZeroInflation,
    /// RDI and uRDI AUC on the linear-decay network vs number of steps.
    LinearDecayAuc,
}

impl Preset {
    pub fn slug(self) -> &'static str {
        match self {
            Preset::Mod1SweepDegree => "mod1-sweep-n",
            Preset::Mod1SweepSize => "mod1-sweep-N",
            Preset::BetaGaussian => "beta-gaussian",
            Preset::ZeroInflation => "zero-inflation",
            Preset::LinearDecayAuc => "linear-decay-auc",
        }
    }

    /// Swept parameter values when none are given.
    pub fn default_grid(self) -> Vec<usize> {
        match self {
            Preset::Mod1SweepDegree => (1..=10).collect(),
            Preset::Mod1SweepSize => vec![500, 1_000, 2_000, 4_000, 8_000, 16_000],
            Preset::BetaGaussian => vec![1_000, 2_000, 4_000, 8_000, 16_000],
            Preset::ZeroInflation => vec![0, 2_500, 5_000, 10_000, 15_000, 20_000],
            Preset::LinearDecayAuc => vec![250, 500, 1_000, 2_000],
        }
    }

    /// Fixed sample size (or base size) when none is given.
    pub fn default_samples(self) -> usize {
        match self {
            Preset::Mod1SweepDegree => 20_000,
            Preset::ZeroInflation => 1_000,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub grid: Vec<usize>,
    /// Fixed sample size for presets that sweep something else.
    pub samples: usize,
    pub seeds: Vec<u64>,
    pub estimator: EstimatorConfig,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferSpec {
    pub input: PathBuf,
    pub adjacency: Option<PathBuf>,
    pub method: EdgeMethod,
    pub estimator: EstimatorConfig,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Estimate(EstimateSpec),
    Gen(GenSpec),
    Experiment(ExperimentSpec),
    Infer(InferSpec),
}

impl RunConfig {
    pub fn output(&self) -> &OutputSpec {
        match self {
            RunConfig::Estimate(s) => &s.output,
            RunConfig::Gen(s) => &s.output,
            RunConfig::Experiment(s) => &s.output,
            RunConfig::Infer(s) => &s.output,
        }
    }

    /// File name used under the default output directory.
    pub fn default_file_name(&self) -> String {
        let ext = match self.output().format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        match self {
            RunConfig::Estimate(s) => format!("estimate-{:?}.{ext}", s.method).to_lowercase(),
            RunConfig::Gen(s) => format!("gen-{}-seed{}.csv", s.generator.slug(), s.seed),
            RunConfig::Experiment(s) => format!("experiment-{}.{ext}", s.preset.slug()),
            RunConfig::Infer(s) => format!("infer-{}.{ext}", s.method),
        }
    }
}

/// Parse `"0..10"` (half open) or `"1,2,5"`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a
            .trim()
            .parse()
            .map_err(|e| format!("bad seed range start {a:?}: {e}"))?;
        let b: u64 = b
            .trim()
            .parse()
            .map_err(|e| format!("bad seed range end {b:?}: {e}"))?;
        if b <= a {
            return Err(format!("empty seed range {text:?}"));
        }
        return Ok((a..b).collect());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad seed {s:?}: {e}"))
        })
        .collect()
}

/// Parse `"lo,hi;lo,hi"` into per-dimension bounds.
pub fn parse_bounds(text: &str) -> Result<Vec<(f64, f64)>, String> {
    text.split(';')
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(',')
                .ok_or_else(|| format!("bounds entry {pair:?} is not lo,hi"))?;
            let lo: f64 = lo
                .trim()
                .parse()
                .map_err(|e| format!("bad bound {lo:?}: {e}"))?;
            let hi: f64 = hi
                .trim()
                .parse()
                .map_err(|e| format!("bad bound {hi:?}: {e}"))?;
            Ok((lo, hi))
        })
        .collect()
}
