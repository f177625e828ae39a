//! Norms, unit-ball volumes and the digamma function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance used for every neighbour query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    /// Chebyshev / L-infinity distance.
    #[default]
    #[serde(alias = "max")]
    MaxNorm,
    #[serde(alias = "l2")]
    Euclidean,
}

impl Norm {
    #[inline]
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Norm::MaxNorm => a
                .iter()
                .zip(b)
                .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs())),
            Norm::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Combine per-coordinate gaps (all nonnegative) into a distance.
    #[inline]
    pub(crate) fn combine(self, gaps: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::MaxNorm => gaps.fold(0.0_f64, f64::max),
            Norm::Euclidean => gaps.map(|g| g * g).sum::<f64>().sqrt(),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::MaxNorm => "max",
            Norm::Euclidean => "l2",
        })
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" | "max-norm" | "linf" => Ok(Norm::MaxNorm),
            "l2" | "euclidean" => Ok(Norm::Euclidean),
            other => Err(Error::InvalidParameter(format!("unknown norm '{other}'"))),
        }
    }
}

/// `ln Γ(m/2)` for a positive integer `m`, exact up to rounding of the
/// accumulated logs (recurrence from Γ(1) = 1 and Γ(1/2) = √π).
fn ln_gamma_half_integer(m: usize) -> f64 {
    debug_assert!(m >= 1);
    let (mut s, mut acc) = if m.is_multiple_of(2) {
        (1.0, 0.0)
    } else {
        (0.5, 0.5 * std::f64::consts::PI.ln())
    };
    let target = m as f64 / 2.0;
    while s < target {
        acc += s.ln();
        s += 1.0;
    }
    acc
}

/// Natural log of the volume of the unit ball in `d` dimensions.
pub fn log_unit_ball_volume(d: usize, norm: Norm) -> Result<f64> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(match norm {
        Norm::MaxNorm => d as f64 * std::f64::consts::LN_2,
        // (d/2) ln π − ln Γ(d/2 + 1)
        Norm::Euclidean => {
            0.5 * d as f64 * std::f64::consts::PI.ln() - ln_gamma_half_integer(d + 2)
        }
    })
}

/// `ln( c_{dx+dz} c_{dy+dz} / (c_{dx+dy+dz} c_{dz}) )`, the additive constant of
/// the coupled CMI estimator. Identically zero under the max-norm.
pub fn cmi_constant(dx: usize, dy: usize, dz: usize, norm: Norm) -> Result<f64> {
    if dx == 0 || dy == 0 || dz == 0 {
        return Err(Error::ZeroDimension);
    }
    if norm == Norm::MaxNorm {
        return Ok(0.0);
    }
    Ok(
        log_unit_ball_volume(dx + dz, norm)? + log_unit_ball_volume(dy + dz, norm)?
            - log_unit_ball_volume(dx + dy + dz, norm)?
            - log_unit_ball_volume(dz, norm)?,
    )
}

const DIGAMMA_ASYMPTOTIC_FROM: f64 = 6.0;

/// ψ(x) for x > 0.
///
/// Shifts x above 6 with ψ(x) = ψ(x+1) − 1/x, then applies the asymptotic
/// series ln x − 1/(2x) − Σ B₂ₙ/(2n x²ⁿ) truncated after eight terms.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "digamma needs a finite positive argument, got {x}"
        )));
    }
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < DIGAMMA_ASYMPTOTIC_FROM {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number coefficients B_2n / (2n), n = 1..=7
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32760.0 - inv2 * (1.0 / 12.0)))))));
    shift + x.ln() - 0.5 * inv - series
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ball_volume_examples() {
        assert!(close(
            log_unit_ball_volume(3, Norm::MaxNorm).unwrap(),
            3.0 * 2f64.ln(),
            1e-15
        ));
        assert!(close(
            log_unit_ball_volume(2, Norm::Euclidean).unwrap(),
            std::f64::consts::PI.ln(),
            1e-14
        ));
        assert!(close(
            log_unit_ball_volume(1, Norm::Euclidean).unwrap(),
            2f64.ln(),
            1e-14
        ));
        assert!(matches!(
            log_unit_ball_volume(0, Norm::Euclidean),
            Err(Error::ZeroDimension)
        ));
    }

    #[test]
    fn ball_volume_matches_gamma_function() {
        for d in 1..=10 {
            let direct = std::f64::consts::PI.powf(d as f64 / 2.0)
                / statrs::function::gamma::gamma(d as f64 / 2.0 + 1.0);
            let ours = log_unit_ball_volume(d, Norm::Euclidean).unwrap().exp();
            assert!((ours - direct).abs() <= 1e-12, "d={d}: {ours} vs {direct}");
        }
    }

    #[test]
    fn cmi_constant_examples() {
        assert_eq!(cmi_constant(1, 1, 1, Norm::MaxNorm).unwrap(), 0.0);
        assert_eq!(cmi_constant(2, 1, 1, Norm::MaxNorm).unwrap(), 0.0);
        let expected = (3.0 * std::f64::consts::PI / 8.0).ln();
        assert!(close(
            cmi_constant(1, 1, 1, Norm::Euclidean).unwrap(),
            expected,
            1e-13
        ));
        assert!(cmi_constant(0, 1, 1, Norm::MaxNorm).is_err());
    }

    #[test]
    fn cmi_constant_vanishes_under_max_norm() {
        for dx in 1..=5 {
            for dy in 1..=5 {
                for dz in 1..=5 {
                    assert_eq!(cmi_constant(dx, dy, dz, Norm::MaxNorm).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn digamma_examples() {
        assert!(close(digamma(1.0).unwrap(), -0.5772156649015329, 1e-10));
        assert!(close(digamma(2.0).unwrap(), 0.42278433509846713, 1e-10));
        // ψ(10) = −γ + Σ_{j=1}^{9} 1/j
        let oracle = -0.5772156649015329 + (1..10).map(|j| 1.0 / j as f64).sum::<f64>();
        assert!(close(oracle, 2.2517525891, 1e-10));
        assert!(close(digamma(10.0).unwrap(), oracle, 1e-10));
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
    }

    #[test]
    fn digamma_recurrence_on_grid() {
        let mut x = 0.1;
        while x < 50.0 {
            let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            assert!((lhs - 1.0 / x).abs() <= 1e-10, "x={x}");
            x += 0.173;
        }
    }

    #[test]
    fn digamma_matches_statrs() {
        for &x in &[0.3, 1.7, 5.99, 6.0, 7.5, 123.4, 20000.0] {
            let a = digamma(x).unwrap();
            let b = statrs::function::gamma::digamma(x);
            assert!((a - b).abs() < 1e-10, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn norms() {
        let a = [0.0, 0.0];
        let b = [3.0, -4.0];
        assert_eq!(Norm::MaxNorm.distance(&a, &b), 4.0);
        assert_eq!(Norm::Euclidean.distance(&a, &b), 5.0);
        assert_eq!("l2".parse::<Norm>().unwrap(), Norm::Euclidean);
        assert_eq!("max".parse::<Norm>().unwrap(), Norm::MaxNorm);
    }
}
