//! Execution of a resolved [`RunConfig`].

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use log::info;
use qcmi::netinfer::{auc, directed_scores, ScoreMatrix};
use qcmi::synthgen::{
    gen_beta_gaussian, gen_linear_decay_runs, gen_mod1, inflate_zeros, TimeSeries,
};
use qcmi::{
    cmi_knn, make_potential, qcmi_knn, qcmi_partition, Dataset, EstimateReport, Potential,
    PotentialKind,
};
use serde::Serialize;

use crate::config::{
    EstimateSpec, ExperimentSpec, Format, GenSpec, Generator, InferSpec, Method, PotentialSpec,
    RunConfig,
};
use crate::experiments;
use crate::output::{self, Envelope};

pub fn run(config: &RunConfig) -> Result<()> {
    match config {
        RunConfig::Estimate(spec) => estimate(config, spec),
        RunConfig::Gen(spec) => generate(config, spec),
        RunConfig::Experiment(spec) => experiment(config, spec),
        RunConfig::Infer(spec) => infer(config, spec),
    }
}

fn reader(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn load_potential(spec: &PotentialSpec, data: &Dataset) -> Result<Potential> {
    if spec.kind == PotentialKind::CustomGrid {
        let path = spec
            .grid
            .as_ref()
            .context("a grid potential needs --grid <file>")?;
        return Potential::read_grid_csv(reader(path)?)
            .with_context(|| format!("reading grid {}", path.display()));
    }
    Ok(make_potential(spec.kind, data, &spec.params)?)
}

#[derive(Serialize)]
#[serde(untagged)]
enum EstimateResult {
    Knn(Box<EstimateReport>),
    Partition { estimate: f64, bins: Option<usize> },
}

impl EstimateResult {
    fn estimate(&self) -> f64 {
        match self {
            EstimateResult::Knn(r) => r.estimate,
            EstimateResult::Partition { estimate, .. } => *estimate,
        }
    }
}

fn estimate(config: &RunConfig, spec: &EstimateSpec) -> Result<()> {
    let start = Instant::now();
    let data = Dataset::read_csv(reader(&spec.input)?)
        .with_context(|| format!("reading dataset {}", spec.input.display()))?;
    info!("loaded {} samples with dims {:?}", data.len(), data.dims());
    let potential = || -> Result<Potential> {
        let p = spec
            .potential
            .as_ref()
            .context("this method needs a potential")?;
        load_potential(p, &data)
    };
    let result = match spec.method {
        Method::Cmi => EstimateResult::Knn(Box::new(cmi_knn(&data, &spec.estimator)?)),
        Method::Qcmi => {
            EstimateResult::Knn(Box::new(qcmi_knn(&data, &potential()?, &spec.estimator)?))
        }
        Method::Partition => EstimateResult::Partition {
            estimate: qcmi_partition(&data, &potential()?, spec.bins)?,
            bins: spec.bins,
        },
    };
    if let EstimateResult::Knn(r) = &result {
        for w in &r.warnings {
            log::warn!("{w}");
        }
    }
    let path = output::resolve_path(config);
    let mut out = output::open(path.as_ref())?;
    match spec.output.format {
        Format::Json => {
            output::write_json(&mut out, &Envelope::new(config, start.elapsed(), &result))?
        }
        Format::Csv => {
            output::csv_preamble(&mut out, config)?;
            let (dx, dy, dz) = data.dims();
            writeln!(out, "method,estimate,samples,dx,dy,dz")?;
            writeln!(
                out,
                "{},{},{},{dx},{dy},{dz}",
                format!("{:?}", spec.method).to_lowercase(),
                result.estimate(),
                data.len()
            )?;
            writeln!(out, "# duration_secs: {}", start.elapsed().as_secs_f64())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn generate(config: &RunConfig, spec: &GenSpec) -> Result<()> {
    let start = Instant::now();
    if spec.adjacency.is_some() && !matches!(spec.generator, Generator::LinearDecay { .. }) {
        bail!("--adjacency only applies to linear-decay series");
    }
    let path = output::resolve_path(config);
    let mut out = output::open(path.as_ref())?;
    match &spec.generator {
        Generator::Mod1 { n, degree, width } => {
            gen_mod1(*n, *degree, *width, spec.seed)?.write_csv(&mut out)?
        }
        Generator::BetaGaussian {
            n,
            alpha,
            beta,
            sigma,
        } => gen_beta_gaussian(*n, *alpha, *beta, *sigma, spec.seed)?.write_csv(&mut out)?,
        Generator::ZeroInflated { n, width, zeros } => {
            inflate_zeros(&gen_mod1(*n, 1, *width, spec.seed)?, *zeros).write_csv(&mut out)?
        }
        Generator::LinearDecay { steps, runs, sigma } => {
            let ts = gen_linear_decay_runs(*steps, *runs, *sigma, spec.seed)?;
            ts.write_csv(&mut out)?;
            if let Some(adj) = &spec.adjacency {
                let mut f = output::open(Some(adj))?;
                ts.write_adjacency(&mut f)?;
                f.flush()?;
            }
        }
    }
    out.flush()?;
    // the data file stays a pure function of the seed; metadata goes alongside
    if let Some(p) = path {
        let mut meta_path = p.into_os_string();
        meta_path.push(".report.json");
        let mut meta = output::open(Some(&meta_path.into()))?;
        output::write_json(&mut meta, &Envelope::new(config, start.elapsed(), ()))?;
        meta.flush()?;
    }
    Ok(())
}

fn fmt_row(row: &[f64]) -> String {
    row.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn experiment(config: &RunConfig, spec: &ExperimentSpec) -> Result<()> {
    let start = Instant::now();
    let header = experiments::header(spec.preset);
    let path = output::resolve_path(config);
    let mut out = output::open(path.as_ref())?;
    if spec.output.format == Format::Csv {
        output::csv_preamble(&mut out, config)?;
        writeln!(out, "{}", header.join(","))?;
        out.flush()?;
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut failure = None;
    'grid: for &value in &spec.grid {
        for &seed in &spec.seeds {
            info!("{} value={value} seed={seed}", spec.preset.slug());
            match experiments::run_point(spec, value, seed) {
                Ok(new) => {
                    if spec.output.format == Format::Csv {
                        for r in &new {
                            writeln!(out, "{}", fmt_row(r))?;
                        }
                        out.flush()?;
                    }
                    rows.extend(new);
                }
                Err(e) => {
                    failure = Some(format!("value {value} seed {seed}: {e:#}"));
                    break 'grid;
                }
            }
        }
    }
    match spec.output.format {
        Format::Csv => match &failure {
            Some(msg) => writeln!(out, "# FAILED: {msg}")?,
            None => writeln!(out, "# duration_secs: {}", start.elapsed().as_secs_f64())?,
        },
        Format::Json => {
            let records: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .map(|h| h.to_string())
                        .zip(r.iter().map(|&v| v.into()))
                        .collect()
                })
                .collect();
            let mut env = Envelope::new(config, start.elapsed(), records);
            if let Some(msg) = &failure {
                env = env.failed(msg.clone());
            }
            output::write_json(&mut out, &env)?;
        }
    }
    out.flush()?;
    match failure {
        Some(msg) => bail!("experiment stopped early at {msg}"),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct InferResult<'a> {
    auc: Option<f64>,
    missing: usize,
    matrix: &'a ScoreMatrix,
}

fn infer(config: &RunConfig, spec: &InferSpec) -> Result<()> {
    let start = Instant::now();
    let mut series = TimeSeries::read_csv(reader(&spec.input)?)
        .with_context(|| format!("reading time series {}", spec.input.display()))?;
    if let Some(adj) = &spec.adjacency {
        let truth = TimeSeries::read_adjacency(reader(adj)?)
            .with_context(|| format!("reading adjacency {}", adj.display()))?;
        series = series.with_truth(truth)?;
    }
    let matrix = directed_scores(&series, spec.method, &spec.estimator)?;
    for f in &matrix.failures {
        log::warn!("pair {} -> {} failed: {}", f.source, f.target, f.message);
    }
    let auc = match &matrix.truth {
        Some(_) => Some(auc(&matrix)?),
        None => None,
    };
    let path = output::resolve_path(config);
    let mut out = output::open(path.as_ref())?;
    match spec.output.format {
        Format::Json => {
            let result = InferResult {
                auc,
                missing: matrix.missing(),
                matrix: &matrix,
            };
            output::write_json(&mut out, &Envelope::new(config, start.elapsed(), result))?;
        }
        Format::Csv => {
            output::csv_preamble(&mut out, config)?;
            if let Some(a) = auc {
                writeln!(out, "# auc: {a}")?;
            }
            writeln!(out, "# missing: {}", matrix.missing())?;
            matrix.write_csv(&mut out)?;
            writeln!(out, "# duration_secs: {}", start.elapsed().as_secs_f64())?;
        }
    }
    out.flush()?;
    Ok(())
}
