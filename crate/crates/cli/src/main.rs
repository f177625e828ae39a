mod config;
mod experiments;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcmi::netinfer::EdgeMethod;
use qcmi::{
    EstimatorConfig, Norm, PotentialKind, PotentialParams, WeightNormalization, ZCountWeighting,
};

use config::{
    parse_bounds, parse_seeds, EstimateSpec, ExperimentSpec, Format, GenSpec, Generator, InferSpec,
    Method, OutputSpec, PotentialSpec, Preset, RunConfig,
};

/// Potential conditional mutual information estimation.
#[derive(Parser, Debug)]
#[command(name = "qcmi", version, about)]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate qCMI, CMI or the histogram baseline for a dataset CSV.
    Estimate(EstimateArgs),
    /// Write a synthetic dataset or time series as CSV.
    Gen {
        #[command(subcommand)]
        generator: GenCommand,
    },
    /// Run a named experiment preset over a seed list.
    Experiment(ExperimentArgs),
    /// Score directed edges of a time series with RDI or uRDI.
    Infer(InferArgs),
    /// Replay a run configuration saved as JSON.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Debug)]
struct EstimatorArgs {
    /// Neighbours in the joint space.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// max or l2.
    #[arg(long, default_value = "max")]
    norm: Norm,
    /// Strict (<) subspace counts; false counts points on the radius too.
    #[arg(long)]
    strict: Option<bool>,
    /// KDE bandwidth for importance weights (default: bandwidth rule).
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, value_enum, default_value_t = ZWeighting::Neighbor)]
    z_weighting: ZWeighting,
    #[arg(long, value_enum, default_value_t = Normalization::SelfNormalized)]
    weights: Normalization,
    /// Run single threaded.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ZWeighting {
    Neighbor,
    Center,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Normalization {
    SelfNormalized,
    Raw,
}

impl EstimatorArgs {
    fn resolve(&self, default_strict: bool) -> EstimatorConfig {
        EstimatorConfig {
            k: self.k,
            norm: self.norm,
            strict: self.strict.unwrap_or(default_strict),
            bandwidth: self.bandwidth,
            z_weighting: match self.z_weighting {
                ZWeighting::Neighbor => ZCountWeighting::Neighbor,
                ZWeighting::Center => ZCountWeighting::Center,
            },
            weight_normalization: match self.weights {
                Normalization::SelfNormalized => WeightNormalization::SelfNormalized,
                Normalization::Raw => WeightNormalization::None,
            },
            parallel: !self.sequential,
            ..EstimatorConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file; defaults to $QCMI_OUTPUT_DIR/<name> or stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl OutputArgs {
    fn resolve(&self, default_format: Format) -> OutputSpec {
        OutputSpec {
            path: self.output.clone(),
            format: self.format.unwrap_or(default_format),
        }
    }
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Dataset CSV with header x0..,y0..,z0..
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Qcmi)]
    method: Method,
    /// uniform, gaussian, product, factual or grid.
    #[arg(long, default_value = "uniform")]
    potential: PotentialKind,
    /// Uniform box over (X,Z) as "lo,hi;lo,hi;..." (default: data range).
    #[arg(long)]
    bounds: Option<String>,
    /// Grid CSV for --potential grid.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Bins per dimension for --method partition.
    #[arg(long)]
    bins: Option<usize>,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct GenCommon {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; defaults to $QCMI_OUTPUT_DIR/<name> or stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Y = (X + Z + W) mod 1 with skewed uniform inputs.
    Mod1 {
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        degree: u32,
        #[arg(long, default_value_t = 0.2)]
        width: f64,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Beta inputs with Gaussian noise.
    BetaGaussian {
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1.5)]
        beta: f64,
        #[arg(long, default_value_t = 0.3)]
        sigma: f64,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Mod-1 samples (degree 1) plus copies of the origin.
    ZeroInflated {
        #[arg(long, default_value_t = 1_000)]
        n: usize,
        #[arg(long, default_value_t = 0.2)]
        width: f64,
        #[arg(long, default_value_t = 20_000)]
        zeros: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    /// 13-variable linear-decay network, CSV t,v0..v12.
    LinearDecay {
        #[arg(long, default_value_t = 1_000)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        /// Also write the true adjacency here.
        #[arg(long)]
        adjacency: Option<PathBuf>,
        #[command(flatten)]
        common: GenCommon,
    },
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(value_enum)]
    preset: Preset,
    /// "0..10" or "1,4,7".
    #[arg(long, default_value = "0..10", value_parser = parse_seeds)]
    seeds: std::vec::Vec<u64>,
    /// Override the swept values (degrees, sizes, zero counts or steps).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Fixed sample size for mod1-sweep-n and base size for zero-inflation.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct InferArgs {
    /// Time-series CSV with header t,v0,..
    #[arg(long, short)]
    input: PathBuf,
    /// Adjacency CSV (rows = sources, 0/1) for AUC.
    #[arg(long)]
    adjacency: Option<PathBuf>,
    /// rdi or urdi.
    #[arg(long, default_value = "urdi")]
    method: EdgeMethod,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn resolve(command: Command) -> Result<RunConfig> {
    Ok(match command {
        Command::Estimate(a) => {
            let bounds = a
                .bounds
                .as_deref()
                .map(parse_bounds)
                .transpose()
                .map_err(anyhow::Error::msg)?;
            let potential = (a.method != Method::Cmi).then(|| PotentialSpec {
                kind: a.potential,
                params: PotentialParams {
                    bounds,
                    bandwidth: a.estimator.bandwidth,
                    ..Default::default()
                },
                grid: a.grid.clone(),
            });
            RunConfig::Estimate(EstimateSpec {
                input: a.input,
                method: a.method,
                potential,
                estimator: a.estimator.resolve(true),
                bins: a.bins,
                output: a.output.resolve(Format::Json),
            })
        }
        Command::Gen { generator } => {
            let (generator, common, adjacency) = match generator {
                GenCommand::Mod1 {
                    n,
                    degree,
                    width,
                    common,
                } => (Generator::Mod1 { n, degree, width }, common, None),
                GenCommand::BetaGaussian {
                    n,
                    alpha,
                    beta,
                    sigma,
                    common,
                } => (
                    Generator::BetaGaussian {
                        n,
                        alpha,
                        beta,
                        sigma,
                    },
                    common,
                    None,
                ),
                GenCommand::ZeroInflated {
                    n,
                    width,
                    zeros,
                    common,
                } => (Generator::ZeroInflated { n, width, zeros }, common, None),
                GenCommand::LinearDecay {
                    steps,
                    runs,
                    sigma,
                    adjacency,
                    common,
                } => (
                    Generator::LinearDecay { steps, runs, sigma },
                    common,
                    adjacency,
                ),
            };
            RunConfig::Gen(GenSpec {
                generator,
                seed: common.seed,
                output: OutputSpec {
                    path: common.output,
                    format: Format::Csv,
                },
                adjacency,
            })
        }
        Command::Experiment(a) => {
            // the decayed tail of the linear system is full of ties
            let default_strict = a.preset != Preset::LinearDecayAuc;
            RunConfig::Experiment(ExperimentSpec {
                preset: a.preset,
                grid: a.grid.unwrap_or_else(|| a.preset.default_grid()),
                samples: a.samples.unwrap_or_else(|| a.preset.default_samples()),
                seeds: a.seeds,
                estimator: a.estimator.resolve(default_strict),
                output: a.output.resolve(Format::Csv),
            })
        }
        Command::Infer(a) => RunConfig::Infer(InferSpec {
            input: a.input,
            adjacency: a.adjacency,
            method: a.method,
            estimator: a.estimator.resolve(true),
            output: a.output.resolve(Format::Json),
        }),
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", config.display()))?
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match resolve(cli.command).and_then(|cfg| run::run(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = serde_json::json!({ "status": "error", "message": format!("{e:#}") });
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
