//! Seeded synthetic data for the benchmark experiments.
//!
//! Every generator is a pure function of its parameters and a `u64` seed,
//! drawn through ChaCha20 so output is identical across platforms.

use std::io::{BufRead, Write};

use nalgebra::Matrix6;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Beta, Distribution, Normal, Uniform};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Identifier of the random generator, recorded in reports.
pub const RNG_ALGORITHM: &str = "chacha20";

/// Noise levels of the two Beta/Gaussian runs.
pub const BETA_GAUSSIAN_SIGMAS: [f64; 2] = [0.3, 1.0];

/// Number of variables in the linear-decay system (6 coupled + 7 noise).
pub const LINEAR_DECAY_VARS: usize = 13;
const COUPLED: usize = 6;

/// Nonzero pattern of the 6×6 coupling matrix; row `j` lists the drivers of `x_j`.
const TEMPLATE: [[bool; COUPLED]; COUPLED] = [
    [true, false, false, false, true, false],
    [true, true, false, false, false, true],
    [false, true, true, false, false, false],
    [false, true, false, true, false, false],
    [false, false, true, true, true, false],
    [true, true, false, false, false, true],
];

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// `Y = (X + Z + W) mod 1` with `X, Z = U^degree`, `U ~ U(0,1)`, and `W ~ U(0, width)`.
pub fn gen_mod1(n: usize, degree: u32, width: f64, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if degree == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    if !(width > 0.0 && width < 1.0) {
        return Err(invalid(format!(
            "noise width must lie in (0, 1), got {width}"
        )));
    }
    let mut rng = rng(seed);
    let (mut x, mut y, mut z) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for _ in 0..n {
        let xv = rng.random::<f64>().powi(degree as i32);
        let zv = rng.random::<f64>().powi(degree as i32);
        let w = width * rng.random::<f64>();
        x.push(xv);
        z.push(zv);
        y.push((xv + zv + w).rem_euclid(1.0));
    }
    Dataset::from_columns(x, y, z)
}

/// `Y = (X + Z + W) mod 1` with `X, Z ~ Beta(alpha, beta)` and `W ~ N(0, sigma²)`.
pub fn gen_beta_gaussian(
    n: usize,
    alpha: f64,
    beta: f64,
    sigma: f64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let input =
        Beta::new(alpha, beta).map_err(|e| invalid(format!("beta({alpha}, {beta}): {e}")))?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| invalid(e.to_string()))?;
    let mut rng = rng(seed);
    let (mut x, mut y, mut z) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for _ in 0..n {
        let xv = input.sample(&mut rng);
        let zv = input.sample(&mut rng);
        let w = noise.sample(&mut rng);
        x.push(xv);
        z.push(zv);
        y.push((xv + zv + w).rem_euclid(1.0));
    }
    Dataset::from_columns(x, y, z)
}

/// Append `m` all-zero samples.
pub fn inflate_zeros(data: &Dataset, m: usize) -> Dataset {
    if m == 0 {
        return data.clone();
    }
    let (dx, dy, dz) = data.dims();
    let zeros = Dataset::new(
        vec![0.0; m * dx],
        dx,
        vec![0.0; m * dy],
        dy,
        vec![0.0; m * dz],
        dz,
    )
    .expect("zero block is well formed");
    data.concat(&zeros).expect("dimensions agree")
}

/// True `I(X;Y|Z)` of [`gen_mod1`] at `degree = 1`, and its uniform-potential
/// qCMI at any degree: `−ln width`.
pub fn mod1_true_cmi(width: f64) -> f64 {
    -width.ln()
}

/// Uniform-potential qCMI of [`gen_beta_gaussian`]: minus the entropy of a
/// normal `N(0, sigma²)` wrapped onto `[0, 1)`, by quadrature.
pub fn wrapped_normal_qcmi(sigma: f64) -> f64 {
    let m = 20_000;
    let terms = (8.0 * sigma).ceil() as i64 + 1;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let mut h = 0.0;
    for i in 0..m {
        let y = (i as f64 + 0.5) / m as f64;
        let p: f64 = (-terms..=terms)
            .map(|k| {
                let u = (y + k as f64) / sigma;
                norm * (-0.5 * u * u).exp()
            })
            .sum();
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    -h / m as f64
}

/// Multivariate time series, possibly several concatenated runs of one
/// process.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub n_vars: usize,
    /// Row-major `steps × n_vars`.
    pub values: Vec<f64>,
    /// `truth[i * n_vars + j]` is true iff `x_i` drives `x_j`.
    pub truth: Option<Vec<bool>>,
    /// Lengths of the concatenated runs; they sum to the number of rows.
    pub run_lengths: Vec<usize>,
}

impl TimeSeries {
    pub fn new(
        n_vars: usize,
        values: Vec<f64>,
        truth: Option<Vec<bool>>,
        run_lengths: Vec<usize>,
    ) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::ZeroDimension);
        }
        if !values.len().is_multiple_of(n_vars) {
            return Err(Error::DimensionMismatch {
                expected: n_vars,
                got: values.len() % n_vars,
            });
        }
        let steps = values.len() / n_vars;
        if run_lengths.iter().sum::<usize>() != steps || run_lengths.contains(&0) {
            return Err(invalid(
                "run lengths must be positive and sum to the number of steps",
            ));
        }
        if let Some(t) = &truth {
            if t.len() != n_vars * n_vars {
                return Err(Error::DimensionMismatch {
                    expected: n_vars * n_vars,
                    got: t.len(),
                });
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / n_vars });
        }
        Ok(TimeSeries {
            n_vars,
            values,
            truth,
            run_lengths,
        })
    }

    pub fn steps(&self) -> usize {
        self.values.len() / self.n_vars
    }

    pub fn value(&self, t: usize, var: usize) -> f64 {
        self.values[t * self.n_vars + var]
    }

    pub fn drives(&self, i: usize, j: usize) -> Option<bool> {
        self.truth.as_ref().map(|t| t[i * self.n_vars + j])
    }

    /// Consecutive `(t−1, t)` row pairs that lie inside one run.
    pub fn lag_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut start = 0;
        self.run_lengths.iter().flat_map(move |&len| {
            let s = start;
            start += len;
            (s + 1..s + len).map(|t| (t - 1, t))
        })
    }

    /// The lagged triple `X = x_i(t−1)`, `Y = x_j(t)`, `Z = x_j(t−1)`.
    pub fn lagged(&self, i: usize, j: usize) -> Result<Dataset> {
        if i >= self.n_vars || j >= self.n_vars {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                n: self.n_vars,
            });
        }
        let (mut x, mut y, mut z) = (Vec::new(), Vec::new(), Vec::new());
        for (prev, t) in self.lag_pairs() {
            x.push(self.value(prev, i));
            y.push(self.value(t, j));
            z.push(self.value(prev, j));
        }
        Dataset::from_columns(x, y, z)
    }

    /// CSV with header `t,v0,..`; `t` restarts at 0 for every run.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (0..self.n_vars).map(|v| format!("v{v}")).collect();
        writeln!(out, "t,{}", header.join(","))?;
        let mut row = 0;
        for &len in &self.run_lengths {
            for t in 0..len {
                write!(out, "{t}")?;
                for v in &self.values[row * self.n_vars..(row + 1) * self.n_vars] {
                    write!(out, ",{v}")?;
                }
                writeln!(out)?;
                row += 1;
            }
        }
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv); a `t` of 0 after the first
    /// row starts a new run. Truth is left empty.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().filter(|l| match l {
            Ok(s) => !s.trim().is_empty() && !s.starts_with('#'),
            Err(_) => true,
        });
        let header = lines.next().ok_or(Error::EmptyDataset)??;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first() != Some(&"t") || cols.len() < 2 {
            return Err(Error::Parse(format!(
                "expected header t,v0,.. but found {header:?}"
            )));
        }
        let n_vars = cols.len() - 1;
        let mut values = Vec::new();
        let mut run_lengths: Vec<usize> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != n_vars + 1 {
                return Err(Error::Parse(format!(
                    "row {}: expected {} fields, got {}",
                    lineno + 1,
                    n_vars + 1,
                    fields.len()
                )));
            }
            let t: usize = fields[0].parse().map_err(|e| {
                Error::Parse(format!("row {}: bad step {:?}: {e}", lineno + 1, fields[0]))
            })?;
            match run_lengths.last_mut() {
                Some(len) if t != 0 => *len += 1,
                _ => run_lengths.push(1),
            }
            for f in &fields[1..] {
                values.push(
                    f.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("row {}: {f:?}: {e}", lineno + 1)))?,
                );
            }
        }
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        TimeSeries::new(n_vars, values, None, run_lengths)
    }

    /// Adjacency as `n_vars` lines of comma-separated 0/1; row = source.
    pub fn write_adjacency<W: Write>(&self, mut out: W) -> Result<()> {
        let truth = self
            .truth
            .as_ref()
            .ok_or_else(|| invalid("series has no ground truth"))?;
        for row in truth.chunks(self.n_vars) {
            let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_adjacency<R: BufRead>(input: R) -> Result<Vec<bool>> {
        let mut out = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            for f in line.split(',') {
                out.push(match f.trim() {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    other => return Err(Error::Parse(format!("adjacency entry {other:?}"))),
                });
            }
        }
        Ok(out)
    }

    pub fn with_truth(mut self, truth: Vec<bool>) -> Result<Self> {
        if truth.len() != self.n_vars * self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars * self.n_vars,
                got: truth.len(),
            });
        }
        self.truth = Some(truth);
        Ok(self)
    }
}

/// Draw the coupling matrix from the template with `U(0.75, 1.25)` entries
/// and scale it by `1 / (5 ρ(A))`, `ρ` the spectral radius.
fn coupling_matrix(rng: &mut ChaCha20Rng) -> Matrix6<f64> {
    let entry = Uniform::new(0.75, 1.25).expect("valid range");
    let mut a = Matrix6::zeros();
    for (j, row) in TEMPLATE.iter().enumerate() {
        for (i, &on) in row.iter().enumerate() {
            if on {
                a[(j, i)] = entry.sample(rng);
            }
        }
    }
    let radius = a
        .complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    a / (5.0 * radius)
}

/// One run of the linear-decay system: [`gen_linear_decay_runs`] with a
/// single run.
pub fn gen_linear_decay(steps: usize, sigma: f64, seed: u64) -> Result<TimeSeries> {
    gen_linear_decay_runs(steps, 1, sigma, seed)
}

/// `runs` concatenated runs of `steps` rows each, sharing one coupling
/// matrix. Variables 0..6 follow `x(t) = A x(t−1)`; variables 6..13 are
/// i.i.d. `N(0, sigma²)`. Every variable starts from `U(0.5, 2)`.
pub fn gen_linear_decay_runs(
    steps: usize,
    runs: usize,
    sigma: f64,
    seed: u64,
) -> Result<TimeSeries> {
    if steps < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: steps,
        });
    }
    if runs == 0 {
        return Err(invalid("need at least one run"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let mut rng = rng(seed);
    let a = coupling_matrix(&mut rng);
    let init = Uniform::new(0.5, 2.0).expect("valid range");
    let noise = Normal::new(0.0, sigma).map_err(|e| invalid(e.to_string()))?;
    let n = LINEAR_DECAY_VARS;
    let mut values = Vec::with_capacity(steps * runs * n);
    for _ in 0..runs {
        let mut state: Vec<f64> = (0..n).map(|_| init.sample(&mut rng)).collect();
        values.extend_from_slice(&state);
        for _ in 1..steps {
            let coupled = a * nalgebra::Vector6::from_column_slice(&state[..COUPLED]);
            state[..COUPLED].copy_from_slice(coupled.as_slice());
            for v in &mut state[COUPLED..] {
                *v = noise.sample(&mut rng);
            }
            values.extend_from_slice(&state);
        }
    }
    let mut truth = vec![false; n * n];
    for (j, row) in TEMPLATE.iter().enumerate() {
        for (i, &on) in row.iter().enumerate() {
            truth[i * n + j] = on;
        }
    }
    TimeSeries::new(n, values, Some(truth), vec![steps; runs])
}
