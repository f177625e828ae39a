//! Pairwise directed-dependence scores over a time series and their AUC
//! against a known adjacency.
//!
//! The edge `i → j` is scored by `I(x_i(t−1); x_j(t) | x_j(t−1))`, with plain
//! CMI (RDI) or with uniform-potential qCMI (uRDI).

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{cmi_knn, qcmi_knn, EstimatorConfig};
use crate::par;
use crate::potentials::{make_potential, PotentialKind, PotentialParams};
use crate::synthgen::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMethod {
    Rdi,
    Urdi,
}

impl fmt::Display for EdgeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeMethod::Rdi => "rdi",
            EdgeMethod::Urdi => "urdi",
        })
    }
}

impl FromStr for EdgeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rdi" => Ok(EdgeMethod::Rdi),
            "urdi" => Ok(EdgeMethod::Urdi),
            _ => Err(Error::Parse(format!(
                "unknown method {s:?} (expected rdi or urdi)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFailure {
    pub source: usize,
    pub target: usize,
    pub message: String,
}

/// Directed scores, `scores[i * n + j]` for `i → j`. The diagonal and failed
/// pairs are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub n: usize,
    pub scores: Vec<Option<f64>>,
    pub truth: Option<Vec<bool>>,
    pub failures: Vec<PairFailure>,
}

impl ScoreMatrix {
    pub fn new(n: usize, scores: Vec<Option<f64>>, truth: Option<Vec<bool>>) -> Result<Self> {
        if scores.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: scores.len(),
            });
        }
        if let Some(t) = &truth {
            if t.len() != n * n {
                return Err(Error::DimensionMismatch {
                    expected: n * n,
                    got: t.len(),
                });
            }
        }
        Ok(ScoreMatrix {
            n,
            scores,
            truth,
            failures: Vec::new(),
        })
    }

    pub fn score(&self, source: usize, target: usize) -> Option<f64> {
        self.scores[source * self.n + target]
    }

    pub fn map_scores(&self, f: impl Fn(f64) -> f64) -> ScoreMatrix {
        ScoreMatrix {
            scores: self.scores.iter().map(|s| s.map(&f)).collect(),
            ..self.clone()
        }
    }

    /// Off-diagonal pairs without a score.
    pub fn missing(&self) -> usize {
        self.off_diagonal()
            .filter(|&(i, j)| self.score(i, j).is_none())
            .count()
    }

    fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).filter(move |&j| j != i).map(move |j| (i, j)))
    }

    /// CSV `source,target,score,truth` over off-diagonal pairs; missing
    /// scores and unknown truth are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "source,target,score,truth")?;
        for (i, j) in self.off_diagonal() {
            let score = self.score(i, j).map(|s| s.to_string()).unwrap_or_default();
            let truth = match &self.truth {
                Some(t) => (t[i * self.n + j] as u8).to_string(),
                None => String::new(),
            };
            writeln!(out, "{i},{j},{score},{truth}")?;
        }
        Ok(())
    }
}

/// Score every ordered pair `i ≠ j` of `series`.
///
/// Pairs whose estimator fails are recorded in `failures` and left missing.
pub fn directed_scores(
    series: &TimeSeries,
    method: EdgeMethod,
    cfg: &EstimatorConfig,
) -> Result<ScoreMatrix> {
    let n = series.n_vars;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 variables, got {n}"
        )));
    }
    let lags = series.lag_pairs().count();
    if lags < 2 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: series.steps(),
        });
    }
    let score_pair = |i: usize, j: usize| -> Result<f64> {
        let data = series.lagged(i, j)?;
        let report = match method {
            EdgeMethod::Rdi => cmi_knn(&data, cfg)?,
            EdgeMethod::Urdi => {
                let q = make_potential(PotentialKind::Uniform, &data, &PotentialParams::default())?;
                qcmi_knn(&data, &q, cfg)?
            }
        };
        Ok(report.estimate)
    };
    let results = par::map_indexed(n * n, cfg.parallel, |p| {
        let (i, j) = (p / n, p % n);
        (i != j).then(|| score_pair(i, j))
    });

    let mut scores = vec![None; n * n];
    let mut failures = Vec::new();
    for (p, r) in results.into_iter().enumerate() {
        match r {
            Some(Ok(s)) if s.is_finite() => scores[p] = Some(s),
            Some(Ok(s)) => failures.push(PairFailure {
                source: p / n,
                target: p % n,
                message: format!("non-finite score {s}"),
            }),
            Some(Err(e)) => failures.push(PairFailure {
                source: p / n,
                target: p % n,
                message: e.to_string(),
            }),
            None => {}
        }
    }
    let mut m = ScoreMatrix::new(n, scores, series.truth.clone())?;
    m.failures = failures;
    Ok(m)
}

/// Probability that a random true edge outscores a random non-edge, ties
/// counting ½. Diagonal and missing pairs are skipped.
pub fn auc(m: &ScoreMatrix) -> Result<f64> {
    let truth = m
        .truth
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("score matrix has no truth".into()))?;
    let mut labelled: Vec<(f64, bool)> = m
        .off_diagonal()
        .filter_map(|(i, j)| m.score(i, j).map(|s| (s, truth[i * m.n + j])))
        .collect();
    let pos = labelled.iter().filter(|(_, t)| *t).count();
    let neg = labelled.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidParameter(format!(
            "AUC needs both edges and non-edges among scored pairs ({pos} edges, {neg} non-edges)"
        )));
    }
    labelled.sort_by(|a, b| a.0.total_cmp(&b.0));
    // twice the rank sum of the positives, with tied groups sharing the mean rank
    let mut twice_rank_sum = 0u64;
    let mut start = 0;
    while start < labelled.len() {
        let mut end = start + 1;
        while end < labelled.len() && labelled[end].0 == labelled[start].0 {
            end += 1;
        }
        let in_group = labelled[start..end].iter().filter(|(_, t)| *t).count() as u64;
        // ranks start+1 ..= end, mean (start + 1 + end) / 2
        twice_rank_sum += in_group * (start + 1 + end) as u64;
        start = end;
    }
    let (p, q) = (pos as u64, neg as u64);
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(twice_u as f64 / (2 * p * q) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use rand_distr::StandardNormal;

    fn matrix(scores: &[f64], truth: &[bool], n: usize) -> ScoreMatrix {
        let s = (0..n * n)
            .map(|p| (p / n != p % n).then(|| scores[p]))
            .collect();
        ScoreMatrix::new(n, s, Some(truth.to_vec())).unwrap()
    }

    #[test]
    fn auc_examples() {
        let truth = [false, true, false, false, false, true, true, false, false];
        let perfect = [0.0, 5.0, 1.0, 0.5, 0.0, 4.0, 6.0, 2.0, 0.0];
        let m = matrix(&perfect, &truth, 3);
        assert_eq!(auc(&m).unwrap(), 1.0);
        assert_eq!(auc(&m.map_scores(|s| -s)).unwrap(), 0.0);
        assert_eq!(auc(&m.map_scores(|_| 1.0)).unwrap(), 0.5);
    }

    #[test]
    fn auc_rejects_one_class() {
        let m = matrix(&[0.0; 4], &[false, true, true, false], 2);
        assert!(auc(&m).is_err());
        let none = ScoreMatrix::new(2, vec![None; 4], None).unwrap();
        assert!(auc(&none).is_err());
    }

    #[test]
    fn auc_skips_missing_pairs() {
        let truth = [false, true, false, false, false, true, false, false, false];
        let mut m = matrix(&[0.0, 3.0, 1.0, 2.0, 0.0, 3.0, 1.0, 9.0, 0.0], &truth, 3);
        assert!(auc(&m).unwrap() < 1.0);
        m.scores[7] = None;
        assert_eq!(auc(&m).unwrap(), 1.0);
        assert_eq!(m.missing(), 1);
    }

    proptest! {
        #[test]
        fn auc_properties(
            raw in prop::collection::vec(-20i32..20, 30),
            labels in prop::collection::vec(any::<bool>(), 30),
        ) {
            // 6 variables, 30 off-diagonal pairs
            let n = 6;
            let mut scores = vec![None; 36];
            let mut truth = vec![false; 36];
            let mut it = raw.iter().zip(&labels);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let (s, t) = it.next().unwrap();
                        scores[i * n + j] = Some(*s as f64);
                        truth[i * n + j] = *t;
                    }
                }
            }
            let m = ScoreMatrix::new(n, scores, Some(truth)).unwrap();
            prop_assume!(labels.iter().any(|&b| b) && labels.iter().any(|&b| !b));
            let a = auc(&m).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert_eq!(a + auc(&m.map_scores(|s| -s)).unwrap(), 1.0);
            prop_assert_eq!(a, auc(&m.map_scores(|s| s * s * s + 7.0)).unwrap());
            prop_assert_eq!(a, auc(&m.map_scores(|s| (s / 4.0).exp())).unwrap());
        }
    }

    fn chain(t: usize, seed: u64) -> TimeSeries {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(2 * t);
        let mut prev = 0.0;
        for _ in 0..t {
            let a: f64 = rng.sample(StandardNormal);
            let b = prev + 0.3 * rng.sample::<f64, _>(StandardNormal);
            values.extend([a, b]);
            prev = a;
        }
        TimeSeries::new(2, values, Some(vec![false, true, false, false]), vec![t]).unwrap()
    }

    #[test]
    fn chain_direction_is_recovered() {
        let ts = chain(2000, 3);
        for method in [EdgeMethod::Rdi, EdgeMethod::Urdi] {
            let m = directed_scores(&ts, method, &EstimatorConfig::default()).unwrap();
            let forward = m.score(0, 1).unwrap();
            let backward = m.score(1, 0).unwrap();
            assert!(
                forward > 0.5 && backward.abs() < 0.1,
                "{method}: {forward} {backward}"
            );
            assert!(m.failures.is_empty());
        }
    }

    #[test]
    fn noise_scores_near_zero() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..3 * 1500).map(|_| rng.sample(StandardNormal)).collect();
        let ts = TimeSeries::new(3, values, None, vec![1500]).unwrap();
        let m = directed_scores(&ts, EdgeMethod::Rdi, &EstimatorConfig::default()).unwrap();
        assert!(m.scores.iter().flatten().all(|s| s.abs() < 0.1));
        assert_eq!(m.scores.iter().flatten().count(), 6);
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        // a constant variable has degenerate uniform bounds
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let values: Vec<f64> = (0..200).flat_map(|_| [rng.random::<f64>(), 1.0]).collect();
        let ts = TimeSeries::new(2, values, None, vec![200]).unwrap();
        let m = directed_scores(&ts, EdgeMethod::Urdi, &EstimatorConfig::default()).unwrap();
        assert_eq!(m.missing(), m.failures.len());
        assert!(!m.failures.is_empty());
    }

    #[test]
    fn csv_lists_off_diagonal_pairs() {
        let m = matrix(&[0.0, 1.5, 2.0, 0.0], &[false, true, false, false], 2);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "source,target,score,truth\n0,1,1.5,1\n1,0,2,0\n"
        );
    }

    #[test]
    fn method_parsing() {
        assert_eq!("uRDI".parse::<EdgeMethod>().unwrap(), EdgeMethod::Urdi);
        assert!("granger".parse::<EdgeMethod>().is_err());
    }
}
