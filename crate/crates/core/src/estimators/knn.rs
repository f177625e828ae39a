//! Coupled k-nearest-neighbour CMI and its importance-weighted qCMI form.
//!
//! For every sample the radius ρ_i is the distance to its k-th neighbour in
//! the joint (X,Y,Z) space. That same radius is reused to count neighbours
//! in the (X,Z), (Y,Z) and Z subspaces, and the per-sample information term
//! is `I_i = ψ(k) − ln n_xz − ln n_yz + ln n_z`. For qCMI the (Y,Z) and Z
//! counts sum the importance weights of the neighbours, and the terms are
//! averaged with the sample's own weight.
//!
//! A sample whose k-th neighbour coincides with it (ρ_i = 0) sits on an atom
//! of the distribution. Its counts include every coincident sample, and ψ(k)
//! becomes ψ(k̃) with k̃ the number of coincident samples, which is the
//! usual treatment of discrete–continuous mixtures.

use log::warn;

use super::{
    DecompositionCheck, EstimateReport, EstimatorConfig, WeightNormalization, WeightVector,
    ZCountWeighting, COUNT_FLOOR,
};
use crate::dataset::Dataset;
use crate::density::KdeModel;
use crate::error::{Error, Result};
use crate::geometry::{cmi_constant, digamma_unchecked, log_unit_ball_volume};
use crate::neighbors::PointIndex;
use crate::par;
use crate::potentials::{resolve_bandwidth, Potential};

/// Radius and counts of one sample.
#[derive(Debug, Clone, Copy)]
struct Neighborhood {
    radius: f64,
    /// k, or the number of coincident samples when the radius is zero.
    k_eff: f64,
    n_xz: f64,
    n_yz: f64,
    n_z: f64,
    floored: u8,
}

impl Neighborhood {
    fn term(&self) -> f64 {
        digamma_unchecked(self.k_eff) - self.n_xz.ln() - self.n_yz.ln() + self.n_z.ln()
    }
}

fn check_sizes(data: &Dataset, cfg: &EstimatorConfig) -> Result<()> {
    if cfg.k == 0 {
        return Err(Error::InvalidK {
            k: 0,
            n: data.len(),
        });
    }
    if data.len() < cfg.k + 1 {
        return Err(Error::TooFewSamples {
            needed: cfg.k + 1,
            got: data.len(),
        });
    }
    Ok(())
}

/// Counts for every sample of `data` (already in canonical order).
///
/// `weights` switches the (Y,Z) and Z counts to weighted sums; samples with
/// zero weight are skipped (`None`) because their term is multiplied by 0.
/// `ids` maps positions back to caller sample ids for error messages.
fn neighborhoods(
    data: &Dataset,
    weights: Option<&[f64]>,
    cfg: &EstimatorConfig,
    ids: &[usize],
) -> Result<Vec<Option<Neighborhood>>> {
    let (dx, dy, dz) = data.dims();
    let joint = PointIndex::new(&data.xyz(), dx + dy + dz, cfg.norm)?;
    let xz = PointIndex::new(&data.xz(), dx + dz, cfg.norm)?;
    let yz = PointIndex::new(&data.yz(), dy + dz, cfg.norm)?;
    let z = PointIndex::new(data.z_block(), dz, cfg.norm)?;
    let (yz_w, z_w) = match weights {
        Some(w) => (Some(yz.tree_weights(w)?), Some(z.tree_weights(w)?)),
        None => (None, None),
    };
    let k = cfg.k;

    par::try_map_indexed(data.len(), cfg.parallel, |i| {
        let own_weight = weights.map_or(1.0, |w| w[i]);
        if own_weight == 0.0 {
            return Ok(None);
        }
        let radius = joint.kth_distance(i, k)?;
        let k_eff = if radius == 0.0 {
            joint.count_within(i, 0.0, None, false)?
        } else {
            k as f64
        };
        let n_xz = xz.count_within(i, radius, None, cfg.strict)?;
        let n_yz = yz.count_within(i, radius, yz_w.as_ref(), cfg.strict)?;
        let n_z = match (cfg.z_weighting, weights) {
            (ZCountWeighting::Center, Some(_)) => {
                own_weight * z.count_within(i, radius, None, cfg.strict)?
            }
            _ => z.count_within(i, radius, z_w.as_ref(), cfg.strict)?,
        };
        let mut floored = 0u8;
        let mut settle = |count: f64, subspace: &'static str| -> Result<f64> {
            if count > 0.0 && count < COUNT_FLOOR {
                floored += 1;
                Ok(COUNT_FLOOR)
            } else if count > 0.0 {
                Ok(count)
            } else {
                Err(Error::ZeroCount {
                    index: ids[i],
                    subspace,
                })
            }
        };
        Ok(Some(Neighborhood {
            radius,
            k_eff,
            n_xz: settle(n_xz, "(X,Z)")?,
            n_yz: settle(n_yz, "(Y,Z)")?,
            n_z: settle(n_z, "Z")?,
            floored,
        }))
    })
}

/// Algorithm-1 assembly: `(1/N) Σ ω_i I_i + C`.
fn weighted_sum(
    nbs: &[Option<Neighborhood>],
    weights: Option<&[f64]>,
    constant: f64,
) -> (f64, Vec<Option<f64>>) {
    let terms: Vec<Option<f64>> = nbs.iter().map(|nb| nb.map(|nb| nb.term())).collect();
    let mut sum = 0.0;
    for (i, t) in terms.iter().enumerate() {
        if let Some(t) = t {
            sum += weights.map_or(1.0, |w| w[i]) * t;
        }
    }
    (sum / nbs.len() as f64 + constant, terms)
}

/// Reassemble the estimate from the four weighted entropy estimates
/// `ĥ(X,Z) + ĥ(Y,Z) − ĥ(X,Y,Z) − ĥ(Z)`, correcting for the
/// `(Σω/N)(ln(N−1) − ψ(N))` offset and the placement of the constant.
fn decomposition(
    nbs: &[Option<Neighborhood>],
    weights: &[f64],
    dims: (usize, usize, usize),
    cfg: &EstimatorConfig,
    ids: &[usize],
) -> Result<f64> {
    let (dx, dy, dz) = dims;
    let n = nbs.len() as f64;
    let ln_n1 = (n - 1.0).ln();
    let psi_n = digamma_unchecked(n);
    let c_xyz = log_unit_ball_volume(dx + dy + dz, cfg.norm)?;
    let c_xz = log_unit_ball_volume(dx + dz, cfg.norm)?;
    let c_yz = log_unit_ball_volume(dy + dz, cfg.norm)?;
    let c_z = log_unit_ball_volume(dz, cfg.norm)?;
    let (d_xyz, d_xz, d_yz, d_z) = (
        (dx + dy + dz) as f64,
        (dx + dz) as f64,
        (dy + dz) as f64,
        dz as f64,
    );

    let (mut h_xyz, mut h_xz, mut h_yz, mut h_z, mut w_sum) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, nb) in nbs.iter().enumerate() {
        let Some(nb) = nb else { continue };
        let w = weights[i];
        if nb.radius == 0.0 {
            return Err(Error::ZeroRadius { index: ids[i] });
        }
        let log_rho = nb.radius.ln();
        h_xyz += w * (-digamma_unchecked(nb.k_eff) + psi_n + c_xyz + d_xyz * log_rho);
        h_xz += w * (-nb.n_xz.ln() + ln_n1 + c_xz + d_xz * log_rho);
        h_yz += w * (-nb.n_yz.ln() + ln_n1 + c_yz + d_yz * log_rho);
        h_z += w * (-nb.n_z.ln() + ln_n1 + c_z + d_z * log_rho);
        w_sum += w;
    }
    let (h_xyz, h_xz, h_yz, h_z) = (h_xyz / n, h_xz / n, h_yz / n, h_z / n);
    let mean_w = w_sum / n;
    let constant = cmi_constant(dx, dy, dz, cfg.norm)?;
    // (1/N) Σ ω_i (I_i + C)
    let per_sample_constant = h_xz + h_yz - h_xyz - h_z - mean_w * (ln_n1 - psi_n);
    Ok(per_sample_constant + constant * (1.0 - mean_w))
}

struct Canonical {
    data: Dataset,
    /// canonical position -> input id
    order: Vec<usize>,
}

fn canonical(data: &Dataset) -> Canonical {
    let order = data.canonical_order();
    Canonical {
        data: data.permuted(&order),
        order,
    }
}

fn to_input_order<T: Clone>(values: &[T], order: &[usize], fill: T) -> Vec<T> {
    let mut out = vec![fill; values.len()];
    for (pos, &id) in order.iter().enumerate() {
        out[id] = values[pos].clone();
    }
    out
}

fn base_report(data: &Dataset, cfg: &EstimatorConfig) -> EstimateReport {
    let dims = data.dims();
    EstimateReport {
        estimate: f64::NAN,
        n: data.len(),
        dims,
        per_sample: Vec::new(),
        weights: None,
        applied_weight_mean: None,
        potential: None,
        config: cfg.clone(),
        decomposition: None,
        floored_counts: 0,
        zero_radius_samples: 0,
        warnings: cfg.warnings(dims.0, dims.1, dims.2),
    }
}

/// Coupled kNN estimate of `I(X;Y|Z)` in nats.
pub fn cmi_knn(data: &Dataset, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    check_sizes(data, cfg)?;
    let canon = canonical(data);
    let (dx, dy, dz) = data.dims();
    let nbs = neighborhoods(&canon.data, None, cfg, &canon.order)?;
    let constant = cmi_constant(dx, dy, dz, cfg.norm)?;
    let (estimate, terms) = weighted_sum(&nbs, None, constant);

    let mut report = base_report(data, cfg);
    report.estimate = estimate;
    report.per_sample = to_input_order(&terms, &canon.order, None);
    report.zero_radius_samples = nbs.iter().flatten().filter(|nb| nb.radius == 0.0).count();
    report.floored_counts = nbs.iter().flatten().map(|nb| nb.floored as usize).sum();
    if report.zero_radius_samples == 0 {
        let ones = vec![1.0; data.len()];
        let value = decomposition(&nbs, &ones, data.dims(), cfg, &canon.order)?;
        report.decomposition = Some(DecompositionCheck {
            value,
            residual: (estimate - value).abs(),
        });
    }
    Ok(report)
}

fn spread_warning(w: &WeightVector, threshold: f64) -> Option<String> {
    match w.spread() {
        Some(s) if s > threshold => Some(format!(
            "importance weight spread max/min = {s:.3e} exceeds {threshold:.3e}; the density ratio q/f may be unbounded"
        )),
        None => Some("every importance weight is zero: q puts no mass on the data".to_string()),
        _ => None,
    }
}

/// `ω_i = q(x_i, z_i) / f̂(x_i, z_i)` with a Gaussian KDE `f̂` of the (X,Z)
/// samples, in input sample order.
pub fn importance_weights(
    data: &Dataset,
    q: &Potential,
    cfg: &EstimatorConfig,
) -> Result<WeightVector> {
    let (dx, _, dz) = data.dims();
    if data.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: data.len(),
        });
    }
    if q.dim() != dx + dz {
        return Err(Error::DimensionMismatch {
            expected: dx + dz,
            got: q.dim(),
        });
    }
    let h = resolve_bandwidth(data, cfg.bandwidth)?;
    let xz = data.xz();
    let kde = KdeModel::new(&xz, dx + dz, h)?;
    let f_hat = kde.density_many(&xz, cfg.parallel)?;
    let mut weights = Vec::with_capacity(data.len());
    for (i, f) in f_hat.iter().enumerate() {
        let qv = q.density_xz(&xz[i * (dx + dz)..(i + 1) * (dx + dz)])?;
        weights.push(qv / f);
    }
    let w = WeightVector(weights);
    if let Some(msg) = spread_warning(&w, cfg.weight_spread_warning) {
        warn!("{msg}");
    }
    Ok(w)
}

/// Algorithm-1 qCMI with caller-supplied weights (input sample order),
/// used as is. The report carries the entropy-decomposition cross-check.
pub fn qcmi_weighted(
    data: &Dataset,
    weights: &WeightVector,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport> {
    check_sizes(data, cfg)?;
    if weights.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            got: weights.len(),
        });
    }
    if let Some(i) = weights.0.iter().position(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "weight {i} is negative or not finite"
        )));
    }
    let canon = canonical(data);
    let w: Vec<f64> = canon.order.iter().map(|&i| weights.0[i]).collect();
    let (dx, dy, dz) = data.dims();
    let nbs = neighborhoods(&canon.data, Some(&w), cfg, &canon.order)?;
    let constant = cmi_constant(dx, dy, dz, cfg.norm)?;
    let (estimate, terms) = weighted_sum(&nbs, Some(&w), constant);

    let mut report = base_report(data, cfg);
    report.estimate = estimate;
    report.per_sample = to_input_order(&terms, &canon.order, None);
    report.applied_weight_mean = Some(weights.mean());
    report.zero_radius_samples = nbs.iter().flatten().filter(|nb| nb.radius == 0.0).count();
    report.floored_counts = nbs.iter().flatten().map(|nb| nb.floored as usize).sum();
    if report.zero_radius_samples == 0 {
        let value = decomposition(&nbs, &w, data.dims(), cfg, &canon.order)?;
        report.decomposition = Some(DecompositionCheck {
            value,
            residual: (estimate - value).abs(),
        });
    }
    Ok(report)
}

/// qCMI estimate of `I^q(X;Y|Z)` in nats for potential `q`.
///
/// Importance weights come from [`importance_weights`]; under the default
/// [`WeightNormalization::SelfNormalized`] they are rescaled to mean 1
/// before use.
pub fn qcmi_knn(data: &Dataset, q: &Potential, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    check_sizes(data, cfg)?;
    let raw = importance_weights(data, q, cfg)?;
    let applied = match cfg.weight_normalization {
        WeightNormalization::None => raw.clone(),
        WeightNormalization::SelfNormalized => {
            // summed in canonical order so row order cannot change the bits
            let mean = data
                .canonical_order()
                .iter()
                .map(|&i| raw.0[i])
                .sum::<f64>()
                / raw.len() as f64;
            if !(mean > 0.0) {
                return Err(Error::InvalidParameter(
                    "potential assigns zero density to every sample".into(),
                ));
            }
            WeightVector(raw.0.iter().map(|w| w / mean).collect())
        }
    };
    let mut report = qcmi_weighted(data, &applied, cfg)?;
    report.weights = Some(raw.diagnostics());
    report.potential = Some(q.kind());
    if let Some(msg) = spread_warning(&raw, cfg.weight_spread_warning) {
        report.warnings.push(msg);
    }
    if q.has_unbounded_support() {
        report.warnings.push(
            "potential has unbounded support; q/f is not bounded if the data density has compact support".into(),
        );
    }
    if report.floored_counts > 0 {
        report.warnings.push(format!(
            "{} weighted counts were floored at {COUNT_FLOOR:e}",
            report.floored_counts
        ));
    }
    Ok(report)
}

/// The qCMI estimate computed through the weighted entropy decomposition
/// `ĥ(X,Z) + ĥ(Y,Z) − ĥ(X,Y,Z) − ĥ(Z)` rather than per-sample terms.
///
/// Agrees with [`qcmi_weighted`] up to rounding; requires every
/// positive-weight sample to have a nonzero k-th neighbour distance.
pub fn qcmi_decomposed(
    data: &Dataset,
    weights: &WeightVector,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    check_sizes(data, cfg)?;
    if weights.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: data.len(),
            got: weights.len(),
        });
    }
    let canon = canonical(data);
    let w: Vec<f64> = canon.order.iter().map(|&i| weights.0[i]).collect();
    let nbs = neighborhoods(&canon.data, Some(&w), cfg, &canon.order)?;
    decomposition(&nbs, &w, data.dims(), cfg, &canon.order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Norm;
    use crate::potentials::{make_potential, PotentialKind, PotentialParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use rand_distr::StandardNormal;

    fn gaussian_chain(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut z = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.sample(StandardNormal);
            let c: f64 = rng.sample(StandardNormal);
            let e: f64 = rng.sample(StandardNormal);
            x.push(a);
            z.push(c);
            y.push(a + c + e);
        }
        Dataset::from_columns(x, y, z).unwrap()
    }

    fn uniform_cube(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut col = |_| (0..n).map(|_| rng.random::<f64>()).collect::<Vec<_>>();
        let (x, y, z) = (col(0), col(1), col(2));
        Dataset::from_columns(x, y, z).unwrap()
    }

    #[test]
    fn conditional_independence_near_zero() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let n = 10_000;
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let x: Vec<f64> = z
            .iter()
            .map(|c| c + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let y: Vec<f64> = z
            .iter()
            .map(|c| c * c + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let r = cmi_knn(
            &Dataset::from_columns(x, y, z).unwrap(),
            &EstimatorConfig::default(),
        )
        .unwrap();
        assert!(r.estimate.abs() < 0.05, "{}", r.estimate);
    }

    #[test]
    fn gaussian_chain_value() {
        let r = cmi_knn(&gaussian_chain(20_000, 1), &EstimatorConfig::default()).unwrap();
        assert!(
            (r.estimate - 0.5 * 2f64.ln()).abs() < 0.05,
            "{}",
            r.estimate
        );
        assert!(r.decomposition.unwrap().residual < 1e-9);
    }

    #[test]
    fn factual_weights_are_exactly_one() {
        let data = uniform_cube(300, 3);
        let cfg = EstimatorConfig::default();
        let q = make_potential(PotentialKind::Factual, &data, &PotentialParams::default()).unwrap();
        let w = importance_weights(&data, &q, &cfg).unwrap();
        assert!(w.0.iter().all(|&v| v == 1.0));
        let a = qcmi_knn(&data, &q, &cfg).unwrap();
        let b = cmi_knn(&data, &cfg).unwrap();
        assert_eq!(a.estimate, b.estimate);
    }

    #[test]
    fn weights_outside_uniform_support_are_zero() {
        let mut data = uniform_cube(200, 4);
        data = data
            .map_values(|b, _, v| if b == 'x' { v * 2.0 } else { v })
            .unwrap();
        let q = Potential::uniform(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let w = importance_weights(&data, &q, &EstimatorConfig::default()).unwrap();
        for i in 0..data.len() {
            assert_eq!(w.0[i] == 0.0, data.x(i)[0] > 1.0);
        }
        // zero-weight samples drop out of the estimate
        let r = qcmi_knn(&data, &q, &EstimatorConfig::default()).unwrap();
        for i in 0..data.len() {
            assert_eq!(r.per_sample[i].is_none(), data.x(i)[0] > 1.0);
        }
    }

    /// E[1/f_h] for U(0,1)^2 data when f_h is the Gaussian-smoothed density,
    /// by the midpoint rule. Independent of the KDE code path.
    fn smoothed_uniform_inverse_mean(h: f64) -> f64 {
        let phi = |x: f64| 0.5 * (1.0 + statrs::function::erf::erf(x / std::f64::consts::SQRT_2));
        let m = 20_000;
        let one_dim: f64 = (0..m)
            .map(|i| {
                let x = (i as f64 + 0.5) / m as f64;
                1.0 / (phi((1.0 - x) / h) - phi(-x / h))
            })
            .sum::<f64>()
            / m as f64;
        one_dim * one_dim
    }

    #[test]
    fn uniform_weights_mean_matches_smoothing_oracle() {
        let n = 20_000;
        let data = uniform_cube(n, 6);
        let q = Potential::uniform(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let w = importance_weights(&data, &q, &EstimatorConfig::default()).unwrap();
        let h = crate::density::bandwidth_rule(n, 1, 1).unwrap();
        let oracle = smoothed_uniform_inverse_mean(h);
        assert!(
            (w.mean() - oracle).abs() < 0.03,
            "mean {} oracle {oracle}",
            w.mean()
        );
        // away from the boundary the KDE is unbiased and weights sit at 1
        let interior: Vec<f64> = (0..n)
            .filter(|&i| {
                (0.35..0.65).contains(&data.x(i)[0]) && (0.35..0.65).contains(&data.z(i)[0])
            })
            .map(|i| w.0[i])
            .collect();
        let mean_inner = interior.iter().sum::<f64>() / interior.len() as f64;
        assert!((mean_inner - 1.0).abs() < 0.1, "interior mean {mean_inner}");
    }

    #[test]
    fn decomposition_matches_with_unit_weights() {
        let data = gaussian_chain(100, 2);
        let cfg = EstimatorConfig::default();
        let ones = WeightVector(vec![1.0; 100]);
        let direct = cmi_knn(&data, &cfg).unwrap().estimate;
        assert!((qcmi_decomposed(&data, &ones, &cfg).unwrap() - direct).abs() < 1e-9);
        let euclid = cfg.clone().with_norm(Norm::Euclidean);
        let direct = cmi_knn(&data, &euclid).unwrap().estimate;
        assert!((qcmi_decomposed(&data, &ones, &euclid).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn decomposition_matches_with_random_weights() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let data = uniform_cube(50, 12);
        let w = WeightVector((0..50).map(|_| rng.random_range(0.1..3.0)).collect());
        for norm in [Norm::MaxNorm, Norm::Euclidean] {
            let cfg = EstimatorConfig::default().with_norm(norm);
            let a = qcmi_weighted(&data, &w, &cfg).unwrap();
            let b = qcmi_decomposed(&data, &w, &cfg).unwrap();
            assert!((a.estimate - b).abs() <= 1e-9);
            assert!(a.decomposition.unwrap().residual <= 1e-9);
        }
    }

    #[test]
    fn duplicates_use_coincidence_count() {
        // 30 copies of the origin plus spread points
        let mut base = uniform_cube(200, 5);
        let zeros = Dataset::from_columns(vec![0.0; 30], vec![0.0; 30], vec![0.0; 30]).unwrap();
        base = base.concat(&zeros).unwrap();
        let r = cmi_knn(&base, &EstimatorConfig::default()).unwrap();
        assert_eq!(r.zero_radius_samples, 30);
        assert!(r.decomposition.is_none());
        // each origin copy: ψ(29) − ln 29 − ln 29 + ln 29
        let expected = digamma_unchecked(29.0) - 29f64.ln();
        for i in 200..230 {
            assert!((r.per_sample[i].unwrap() - expected).abs() < 1e-12);
        }
        assert!(matches!(
            qcmi_decomposed(
                &base,
                &WeightVector(vec![1.0; 230]),
                &EstimatorConfig::default()
            ),
            Err(Error::ZeroRadius { .. })
        ));
    }

    #[test]
    fn zero_strict_count_is_reported() {
        // k = 1 on a lattice: the nearest neighbour differs in z only, so
        // nothing is strictly inside the radius in the (X,Z) space.
        let data = Dataset::from_columns(
            vec![0.0, 0.0, 5.0, 5.0],
            vec![0.0, 0.0, 9.0, 9.0],
            vec![0.0, 1.0, 3.0, 4.0],
        )
        .unwrap();
        let cfg = EstimatorConfig::default().with_k(1);
        assert!(matches!(cmi_knn(&data, &cfg), Err(Error::ZeroCount { .. })));
        assert!(cmi_knn(&data, &cfg.with_strict(false)).is_ok());
    }

    #[test]
    fn validates_inputs() {
        let data = uniform_cube(5, 1);
        assert!(matches!(
            cmi_knn(&data, &EstimatorConfig::default()),
            Err(Error::TooFewSamples { .. })
        ));
        let q = Potential::uniform(vec![(0.0, 1.0)]).unwrap();
        assert!(matches!(
            importance_weights(&data, &q, &EstimatorConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(qcmi_weighted(
            &data,
            &WeightVector(vec![1.0; 4]),
            &EstimatorConfig::default().with_k(2)
        )
        .is_err());
    }

    #[test]
    fn warns_on_small_k() {
        let cfg = EstimatorConfig::default().with_k(2);
        assert!(cfg.warnings(1, 1, 1).len() == 1);
        assert!(EstimatorConfig::default().warnings(1, 1, 1).is_empty());
    }

    #[test]
    fn literal_modes_are_selectable() {
        let data = uniform_cube(400, 21);
        let q = Potential::uniform(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let base = EstimatorConfig::default();
        let raw_cfg = EstimatorConfig {
            weight_normalization: WeightNormalization::None,
            ..base.clone()
        };
        let raw = qcmi_knn(&data, &q, &raw_cfg).unwrap();
        let norm = qcmi_knn(&data, &q, &base).unwrap();
        assert_eq!(
            norm.applied_weight_mean.map(|m| (m - 1.0).abs() < 1e-12),
            Some(true)
        );
        assert_eq!(raw.applied_weight_mean, Some(raw.weights.unwrap().mean));
        let centre = EstimatorConfig {
            z_weighting: ZCountWeighting::Center,
            ..base
        };
        let c = qcmi_knn(&data, &q, &centre).unwrap();
        assert!(c.estimate.is_finite() && c.estimate != norm.estimate);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let data = gaussian_chain(2000, 17);
        let q = Potential::uniform(vec![(-5.0, 5.0), (-5.0, 5.0)]).unwrap();
        let a = qcmi_knn(&data, &q, &EstimatorConfig::default()).unwrap();
        let b = qcmi_knn(&data, &q, &EstimatorConfig::default().sequential()).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    }
}
