//! Potential conditional mutual information (qCMI) estimation.
//!
//! qCMI is the conditional mutual information `I(X;Y|Z)` evaluated after the
//! observed input distribution `p(X,Z)` is swapped for a fixed *potential*
//! distribution `q(X,Z)`, keeping the channel `p(Y|X,Z)`. It is estimated
//! from samples by combining a coupled k-nearest-neighbour CMI estimator with
//! importance weights `q / f̂` where `f̂` is a kernel density estimate.
//!
//! Module map:
//!
//! - [`geometry`]: norms, unit-ball volumes, digamma.
//! - [`neighbors`]: exact kd-tree kNN radii and (weighted) radius counts.
//! - [`density`]: Gaussian product KDE and its bandwidth rule.
//! - [`potentials`]: the replacement distributions `q(X,Z)`.
//! - [`estimators`]: KL entropy, coupled-kNN CMI, qCMI, partitioning baseline.
//! - [`synthgen`]: seeded generators for the synthetic benchmarks.
//! - [`netinfer`]: RDI / uRDI edge scoring on time series and AUC.
//!
//! With the default `parallel` feature the per-sample loops run on rayon;
//! every reduction is done in sample-index order so results do not depend on
//! the thread count.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod density;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod neighbors;
pub mod netinfer;
mod par;
pub mod potentials;
pub mod synthgen;

pub use dataset::Dataset;
pub use density::{bandwidth_rule, KdeModel};
pub use error::{Error, Result};
pub use estimators::{
    cmi_knn, entropy_kl, importance_weights, qcmi_decomposed, qcmi_knn, qcmi_partition,
    qcmi_weighted, EstimateReport, EstimatorConfig, WeightNormalization, WeightVector,
    ZCountWeighting,
};
pub use geometry::{cmi_constant, digamma, log_unit_ball_volume, Norm};
pub use neighbors::{PointIndex, TreeWeights};
pub use netinfer::{auc, directed_scores, EdgeMethod, ScoreMatrix};
pub use potentials::{make_potential, Potential, PotentialKind, PotentialParams};
pub use synthgen::TimeSeries;

/// Version tag embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
