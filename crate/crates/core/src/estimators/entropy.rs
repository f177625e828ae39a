use crate::error::{Error, Result};
use crate::geometry::{digamma, log_unit_ball_volume, Norm};
use crate::neighbors::PointIndex;

/// Kozachenko–Leonenko differential entropy (nats) of the rows of `points`.
///
/// `ĥ = (1/N) Σ ln(N ρ_i^d c_d / k) + ln k − ψ(k)` with ρ_i the distance to
/// the k-th nearest neighbour. Coincident samples (ρ_i = 0) are rejected.
pub fn entropy_kl(points: &[f64], dim: usize, k: usize, norm: Norm) -> Result<f64> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let n = points.len() / dim;
    if n < k + 1 {
        return Err(Error::TooFewSamples {
            needed: k + 1,
            got: n,
        });
    }
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        row(a)
            .iter()
            .zip(row(b))
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sorted: Vec<f64> = order.iter().flat_map(|&i| row(i).iter().copied()).collect();
    let index = PointIndex::new(&sorted, dim, norm)?;

    let mut sum_log_rho = 0.0;
    for (i, &id) in order.iter().enumerate() {
        let rho = index.kth_distance(i, k)?;
        if rho == 0.0 {
            return Err(Error::ZeroRadius { index: id });
        }
        sum_log_rho += rho.ln();
    }
    let nf = n as f64;
    Ok(
        dim as f64 * sum_log_rho / nf + nf.ln() + log_unit_ball_volume(dim, norm)?
            - digamma(k as f64)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn rejects_duplicates_and_small_n() {
        let pts = [0.0, 0.5, 0.5, 1.0, 2.0];
        assert!(matches!(
            entropy_kl(&pts, 1, 1, Norm::MaxNorm),
            Err(Error::ZeroRadius { index: 1 | 2 })
        ));
        assert!(matches!(
            entropy_kl(&pts[..2], 1, 2, Norm::MaxNorm),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn scaling_shifts_by_d_ln_a() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for dim in 1..=3 {
            let pts: Vec<f64> = (0..600 * dim).map(|_| rng.random::<f64>()).collect();
            let scaled: Vec<f64> = pts.iter().map(|v| v * 10.0).collect();
            for norm in [Norm::MaxNorm, Norm::Euclidean] {
                let a = entropy_kl(&pts, dim, 4, norm).unwrap();
                let b = entropy_kl(&scaled, dim, 4, norm).unwrap();
                assert!((b - a - dim as f64 * 10f64.ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_dimensional_analytic_values() {
        let mut uni = Vec::new();
        let mut gau = Vec::new();
        for seed in 0..10 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let u: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
            let g: Vec<f64> = (0..10_000)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            uni.push(entropy_kl(&u, 1, 5, Norm::MaxNorm).unwrap());
            gau.push(entropy_kl(&g, 1, 5, Norm::MaxNorm).unwrap());
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&uni).abs() < 0.05, "uniform {}", mean(&uni));
        let h_normal = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!(
            (mean(&gau) - h_normal).abs() < 0.05,
            "normal {}",
            mean(&gau)
        );
    }
}
