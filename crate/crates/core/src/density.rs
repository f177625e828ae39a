//! Gaussian product kernel density estimation.

use crate::error::{Error, Result};
use crate::par;

/// Bandwidth `½ · N^(−1/(2 dx + 2 dz + 3))` for a KDE of `f(X,Z)` that feeds
/// importance weights.
pub fn bandwidth_rule(n: usize, dx: usize, dz: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    if dx == 0 || dz == 0 {
        return Err(Error::ZeroDimension);
    }
    let exponent = -1.0 / (2 * dx + 2 * dz + 3) as f64;
    Ok(0.5 * (n as f64).powf(exponent))
}

/// Fixed-bandwidth KDE with an isotropic Gaussian product kernel.
///
/// Samples are held in a canonical (sorted) order so every evaluation sums
/// contributions in the same order whatever order the samples arrived in.
#[derive(Debug, Clone)]
pub struct KdeModel {
    dim: usize,
    bandwidth: f64,
    samples: Vec<f64>,
    /// Input sample id -> position in `samples`.
    slot_of: Vec<usize>,
    /// `ln((2π)^(d/2) h^d)`
    log_norm: f64,
}

impl KdeModel {
    /// Fit on `points` (row-major, `dim` columns) with bandwidth `h`.
    pub fn new(points: &[f64], dim: usize, bandwidth: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if !points.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: points.len() % dim,
            });
        }
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let n = points.len() / dim;
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let row = |i: usize| &points[i * dim..(i + 1) * dim];
        if let Some(r) = (0..n).find(|&i| row(i).iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite { row: r });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            row(a)
                .iter()
                .zip(row(b))
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut slot_of = vec![0; n];
        for (slot, &id) in order.iter().enumerate() {
            slot_of[id] = slot;
        }
        let samples = order.iter().flat_map(|&i| row(i).iter().copied()).collect();
        let log_norm = dim as f64 * (0.5 * (2.0 * std::f64::consts::PI).ln() + bandwidth.ln());
        Ok(KdeModel {
            dim,
            bandwidth,
            samples,
            slot_of,
            log_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.slot_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot_of.is_empty()
    }

    /// Density estimate at `query`, optionally leaving sample `leave_out`
    /// (input id) out of both the sum and the normalising count.
    pub fn density(&self, query: &[f64], leave_out: Option<usize>) -> Result<f64> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: query.len(),
            });
        }
        let skip = match leave_out {
            Some(id) if id >= self.len() => {
                return Err(Error::IndexOutOfRange {
                    index: id,
                    n: self.len(),
                })
            }
            Some(id) => Some(self.slot_of[id]),
            None => None,
        };
        let m = self.len() - usize::from(skip.is_some());
        if m == 0 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: self.len(),
            });
        }
        let inv_h = 1.0 / self.bandwidth;
        let mut sum = 0.0;
        for (slot, s) in self.samples.chunks_exact(self.dim).enumerate() {
            if Some(slot) == skip {
                continue;
            }
            let mut sq = 0.0;
            for (q, v) in query.iter().zip(s) {
                let u = (q - v) * inv_h;
                sq += u * u;
            }
            sum += (-0.5 * sq).exp();
        }
        let value = sum / m as f64 * (-self.log_norm).exp();
        if value > 0.0 {
            Ok(value)
        } else {
            Err(Error::KdeUnderflow {
                index: leave_out.unwrap_or(0),
            })
        }
    }

    /// Density at each row of `points`; the error names the failing row.
    pub fn density_many(&self, points: &[f64], parallel: bool) -> Result<Vec<f64>> {
        if !points.len().is_multiple_of(self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: points.len() % self.dim,
            });
        }
        let n = points.len() / self.dim;
        par::try_map_indexed(n, parallel, |i| {
            self.density(&points[i * self.dim..(i + 1) * self.dim], None)
                .map_err(|e| match e {
                    Error::KdeUnderflow { .. } => Error::KdeUnderflow { index: i },
                    other => other,
                })
        })
    }
}

/// Free-function form of [`KdeModel::density`].
pub fn kde_density(model: &KdeModel, query: &[f64], leave_out: Option<usize>) -> Result<f64> {
    model.density(query, leave_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn bandwidth_examples() {
        let h = bandwidth_rule(1024, 1, 1).unwrap();
        assert!((h - 0.5 * 1024f64.powf(-1.0 / 7.0)).abs() < 1e-15);
        assert!((h - 0.18575).abs() < 5e-6);
        let h = bandwidth_rule(128, 2, 1).unwrap();
        assert!((h - 0.29163).abs() < 5e-6);
        assert!(bandwidth_rule(1, 1, 1).is_err());
    }

    #[test]
    fn kernel_peak() {
        for d in 1..=3 {
            let m = KdeModel::new(&vec![0.0; d], d, 1.0).unwrap();
            let v = m.density(&vec![0.0; d], None).unwrap();
            let expected = (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
            assert!((v - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn leave_out_on_duplicates() {
        // samples: p, p, r; query at p
        let pts = [0.3, 0.3, 1.1];
        let m = KdeModel::new(&pts, 1, 0.5).unwrap();
        let k = |u: f64| {
            (-0.5 * (u / 0.5) * (u / 0.5)).exp() / (0.5 * (2.0 * std::f64::consts::PI).sqrt())
        };
        let full = m.density(&[0.3], None).unwrap();
        let without_first = m.density(&[0.3], Some(0)).unwrap();
        assert!((full - (2.0 * k(0.0) + k(0.8)) / 3.0).abs() < 1e-14);
        assert!((without_first - (k(0.0) + k(0.8)) / 2.0).abs() < 1e-14);
        // removing either copy gives the same answer
        assert_eq!(without_first, m.density(&[0.3], Some(1)).unwrap());
        assert!(m.density(&[0.3], Some(3)).is_err());
    }

    #[test]
    fn uniform_square_density_near_one() {
        let mut estimates = Vec::new();
        for seed in 0..5 {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let pts: Vec<f64> = (0..20000).map(|_| rng.random::<f64>()).collect();
            let h = bandwidth_rule(10000, 1, 1).unwrap();
            let m = KdeModel::new(&pts, 2, h).unwrap();
            estimates.push(m.density(&[0.5, 0.5], None).unwrap());
        }
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        assert!((mean - 1.0).abs() < 0.15, "mean {mean}");
    }

    #[test]
    fn integrates_to_one() {
        // well-spread data, bounding box padded by 6h on each side
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let pts: Vec<f64> = (0..400).map(|_| rng.random::<f64>()).collect();
        let h = 0.1;
        let m = KdeModel::new(&pts, 2, h).unwrap();
        let (lo, hi) = (-0.6, 1.6);
        let area = (hi - lo) * (hi - lo);
        let draws = 100_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let q = [rng.random_range(lo..hi), rng.random_range(lo..hi)];
            acc += m.density(&q, None).unwrap();
        }
        let integral = acc / draws as f64 * area;
        assert!((integral - 1.0).abs() < 0.02, "integral {integral}");
    }

    #[test]
    fn permutation_gives_identical_bits() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let pts: Vec<f64> = (0..300).map(|_| rng.random::<f64>()).collect();
        let mut rows: Vec<[f64; 3]> = pts.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        let a = KdeModel::new(&pts, 3, 0.2).unwrap();
        rows.reverse();
        rows.swap(3, 40);
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let b = KdeModel::new(&flat, 3, 0.2).unwrap();
        for q in pts.chunks(3).take(30) {
            assert_eq!(
                a.density(q, None).unwrap().to_bits(),
                b.density(q, None).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn underflow_is_an_error() {
        let m = KdeModel::new(&[0.0, 1.0], 1, 0.01).unwrap();
        assert!(matches!(
            m.density(&[1e6], None),
            Err(Error::KdeUnderflow { .. })
        ));
        assert!(m.density_many(&[0.0, 1e6], false).is_err());
    }
}
