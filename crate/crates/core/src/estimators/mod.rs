//! Entropy, CMI and qCMI estimators.
//!
//! All estimators first put the samples into a canonical order (sorted by
//! coordinates) and reduce per-sample terms in that order, so permuting the
//! input rows never changes a result. Per-sample outputs in reports are
//! mapped back to input order.

mod entropy;
mod knn;
mod partition;

use serde::{Deserialize, Serialize};

use crate::geometry::Norm;
use crate::potentials::PotentialKind;

pub use entropy::entropy_kl;
pub use knn::{cmi_knn, importance_weights, qcmi_decomposed, qcmi_knn, qcmi_weighted};
pub use partition::{default_bins, qcmi_partition};

/// Counts smaller than this (but positive) are raised to it before the log.
pub const COUNT_FLOOR: f64 = 1e-12;

/// How the conditioning-space count `n_z` is weighted in qCMI.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZCountWeighting {
    /// `n_z,i = Σ_j ω_j` over the neighbours `j`, like `n_yz,i`.
    #[default]
    Neighbor,
    /// `n_z,i = ω_i · #neighbours`, weighting by the centre sample.
    Center,
}

/// Scaling applied to the importance weights before they enter qCMI.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightNormalization {
    /// Divide by the sample mean so the weights average exactly 1.
    #[default]
    SelfNormalized,
    /// Use `q / f̂` as is.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub k: usize,
    pub norm: Norm,
    /// Subspace counts use `<` (true) or `≤` (false).
    pub strict: bool,
    /// KDE bandwidth for the importance weights; `None` uses the bandwidth rule.
    pub bandwidth: Option<f64>,
    /// Warn when `max ω / min positive ω` exceeds this.
    pub weight_spread_warning: f64,
    pub z_weighting: ZCountWeighting,
    pub weight_normalization: WeightNormalization,
    /// Run per-sample loops on the thread pool (needs the `parallel` feature).
    pub parallel: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            k: 5,
            norm: Norm::MaxNorm,
            strict: true,
            bandwidth: None,
            weight_spread_warning: 1e3,
            z_weighting: ZCountWeighting::Neighbor,
            weight_normalization: WeightNormalization::SelfNormalized,
            parallel: true,
        }
    }
}

impl EstimatorConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }

    /// Advisory checks that do not prevent estimation.
    pub fn warnings(&self, dx: usize, dy: usize, dz: usize) -> Vec<String> {
        let mut out = Vec::new();
        let (dx, dy, dz) = (dx as f64, dy as f64, dz as f64);
        let bound = (dz / (dx + dy)).max((dx + dy) / dz).max((dx + dz) / dy);
        if self.k as f64 <= bound {
            out.push(format!(
                "k = {} does not exceed max{{dz/(dx+dy), (dx+dy)/dz, (dx+dz)/dy}} = {bound}; consistency is not guaranteed",
                self.k
            ));
        }
        out
    }
}

/// Importance weights `ω_i = q(x_i, z_i) / f̂(x_i, z_i)`, in sample order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(pub Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightDiagnostics {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub min_positive: Option<f64>,
    pub zeros: usize,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    pub fn diagnostics(&self) -> WeightDiagnostics {
        let min = self.0.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_positive = self.0.iter().copied().filter(|&w| w > 0.0).reduce(f64::min);
        WeightDiagnostics {
            min,
            mean: self.mean(),
            max,
            min_positive,
            zeros: self.0.iter().filter(|&&w| w == 0.0).count(),
        }
    }

    /// `max / min positive`, or `None` if every weight is zero.
    pub fn spread(&self) -> Option<f64> {
        let d = self.diagnostics();
        d.min_positive.map(|m| d.max / m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    /// The estimate reassembled from the four weighted entropy terms.
    pub value: f64,
    /// `|estimate − value|`
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// Estimate in nats.
    pub estimate: f64,
    pub n: usize,
    pub dims: (usize, usize, usize),
    /// `I_i` per sample in input order; `None` for zero-weight samples.
    pub per_sample: Vec<Option<f64>>,
    /// Raw importance weights (before any normalisation), when used.
    pub weights: Option<WeightDiagnostics>,
    /// Mean of the weights actually applied.
    pub applied_weight_mean: Option<f64>,
    pub potential: Option<PotentialKind>,
    pub config: EstimatorConfig,
    pub decomposition: Option<DecompositionCheck>,
    /// Weighted counts raised to [`COUNT_FLOOR`].
    pub floored_counts: usize,
    /// Samples whose k-th neighbour coincides with them.
    pub zero_radius_samples: usize,
    pub warnings: Vec<String>,
}
