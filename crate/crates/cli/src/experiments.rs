//! Named experiment presets. Each grid point and seed yields one or more
//! CSV-ready rows.

use anyhow::{Context, Result};
use qcmi::estimators::default_bins;
use qcmi::netinfer::{auc, directed_scores, EdgeMethod};
use qcmi::synthgen::{
    gen_beta_gaussian, gen_linear_decay, gen_mod1, inflate_zeros, mod1_true_cmi,
    wrapped_normal_qcmi, BETA_GAUSSIAN_SIGMAS,
};
use qcmi::{cmi_knn, qcmi_knn, qcmi_partition, Dataset, EstimatorConfig, Potential};

use crate::config::{ExperimentSpec, Preset};

const NOISE_WIDTH: f64 = 0.2;
const SWEEP_SIZE_DEGREE: u32 = 5;
const BETA_SHAPE: f64 = 1.5;
const DECAY_SIGMA: f64 = 0.1;

pub fn header(preset: Preset) -> &'static [&'static str] {
    match preset {
        Preset::Mod1SweepDegree | Preset::Mod1SweepSize => &[
            "degree",
            "samples",
            "seed",
            "truth",
            "qcmi",
            "cmi",
            "partition",
        ],
        Preset::BetaGaussian => &["sigma", "samples", "seed", "truth", "qcmi", "cmi"],
        Preset::ZeroInflation => &["zeros", "samples", "seed", "truth", "qcmi", "cmi"],
        Preset::LinearDecayAuc => &[
            "steps",
            "seed",
            "auc_rdi",
            "auc_urdi",
            "missing_rdi",
            "missing_urdi",
        ],
    }
}

fn unit_square() -> Potential {
    Potential::uniform(vec![(0.0, 1.0), (0.0, 1.0)]).expect("valid bounds")
}

fn knn_pair(data: &Dataset, cfg: &EstimatorConfig) -> Result<(f64, f64)> {
    let q = qcmi_knn(data, &unit_square(), cfg)
        .context("qCMI")?
        .estimate;
    let c = cmi_knn(data, cfg).context("CMI")?.estimate;
    Ok((q, c))
}

fn mod1_row(degree: u32, n: usize, seed: u64, cfg: &EstimatorConfig) -> Result<Vec<f64>> {
    let data = gen_mod1(n, degree, NOISE_WIDTH, seed)?;
    let (q, c) = knn_pair(&data, cfg)?;
    let bins = default_bins(n, 3).max(2);
    let p = qcmi_partition(&data, &unit_square(), Some(bins)).context("partition qCMI")?;
    Ok(vec![
        degree as f64,
        n as f64,
        seed as f64,
        mod1_true_cmi(NOISE_WIDTH),
        q,
        c,
        p,
    ])
}

/// Rows for one grid value and seed.
pub fn run_point(spec: &ExperimentSpec, value: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let cfg = &spec.estimator;
    match spec.preset {
        Preset::Mod1SweepDegree => {
            let degree = u32::try_from(value).context("degree out of range")?;
            Ok(vec![mod1_row(degree, spec.samples, seed, cfg)?])
        }
        Preset::Mod1SweepSize => Ok(vec![mod1_row(SWEEP_SIZE_DEGREE, value, seed, cfg)?]),
        Preset::BetaGaussian => BETA_GAUSSIAN_SIGMAS
            .iter()
            .map(|&sigma| {
                let data = gen_beta_gaussian(value, BETA_SHAPE, BETA_SHAPE, sigma, seed)?;
                let (q, c) = knn_pair(&data, cfg)?;
                Ok(vec![
                    sigma,
                    value as f64,
                    seed as f64,
                    wrapped_normal_qcmi(sigma),
                    q,
                    c,
                ])
            })
            .collect(),
        Preset::ZeroInflation => {
            let data = inflate_zeros(&gen_mod1(spec.samples, 1, NOISE_WIDTH, seed)?, value);
            let (q, c) = knn_pair(&data, cfg)?;
            Ok(vec![vec![
                value as f64,
                spec.samples as f64,
                seed as f64,
                mod1_true_cmi(NOISE_WIDTH),
                q,
                c,
            ]])
        }
        Preset::LinearDecayAuc => {
            let ts = gen_linear_decay(value, DECAY_SIGMA, seed)?;
            let rdi = directed_scores(&ts, EdgeMethod::Rdi, cfg)?;
            let urdi = directed_scores(&ts, EdgeMethod::Urdi, cfg)?;
            Ok(vec![vec![
                value as f64,
                seed as f64,
                auc(&rdi).context("RDI AUC")?,
                auc(&urdi).context("uRDI AUC")?,
                rdi.missing() as f64,
                urdi.missing() as f64,
            ]])
        }
    }
}
