//! Replacement input distributions `q(X,Z)`.
//!
//! | kind             | instantiation | density                                  |
//! |------------------|---------------|------------------------------------------|
//! | uniform          | uCMI          | `1/volume` inside a box, 0 outside        |
//! | gaussian         | nCMI          | independent normals per coordinate        |
//! | product-marginal | iCMI          | `f̂_X(x) · f̂_Z(z)` from marginal KDEs      |
//! | factual          | plain CMI     | joint KDE `f̂_XZ(x,z)`                     |
//! | custom-grid      | user supplied | piecewise-constant table on a grid        |
//!
//! Custom grids are read from CSV:
//!
//! ```text
//! bounds,lo0,hi0,lo1,hi1,...
//! c0,c1,...,density
//! 0.25,0.25,1.5
//! ...
//! ```
//!
//! Each data row is a cell centre. The cell centres along each coordinate
//! must form a grid; cell edges sit halfway between neighbouring centres and
//! at the declared bounds. Missing cells have density 0.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::density::{bandwidth_rule, KdeModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Uniform,
    Gaussian,
    #[serde(alias = "product")]
    ProductMarginal,
    Factual,
    CustomGrid,
}

impl std::str::FromStr for PotentialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uniform" => PotentialKind::Uniform,
            "gaussian" | "normal" => PotentialKind::Gaussian,
            "product" | "product-marginal" => PotentialKind::ProductMarginal,
            "factual" => PotentialKind::Factual,
            "grid" | "custom-grid" => PotentialKind::CustomGrid,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown potential '{other}'"
                )))
            }
        })
    }
}

/// Optional per-kind parameters. Anything left `None` is derived from data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    /// Uniform box as `(lo, hi)` per (X,Z) coordinate.
    pub bounds: Option<Vec<(f64, f64)>>,
    pub means: Option<Vec<f64>>,
    pub std_devs: Option<Vec<f64>>,
    /// KDE bandwidth for data-fitted kinds; defaults to the bandwidth rule.
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Grid {
    bounds: Vec<(f64, f64)>,
    /// Sorted cell centres per coordinate.
    centres: Vec<Vec<f64>>,
    /// Row-major over `centres`, last coordinate fastest.
    values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum Potential {
    Uniform {
        bounds: Vec<(f64, f64)>,
        log_volume: f64,
    },
    Gaussian {
        means: Vec<f64>,
        std_devs: Vec<f64>,
    },
    ProductMarginal {
        dx: usize,
        x: KdeModel,
        z: KdeModel,
    },
    Factual {
        joint: KdeModel,
    },
    CustomGrid(Grid),
}

fn check_bounds(bounds: &[(f64, f64)]) -> Result<()> {
    for (dim, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::DegenerateBounds { dim, lo, hi });
        }
    }
    Ok(())
}

fn empirical_bounds(points: &[f64], dim: usize) -> Vec<(f64, f64)> {
    (0..dim)
        .map(|d| {
            points
                .iter()
                .skip(d)
                .step_by(dim)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                })
        })
        .collect()
}

/// The bandwidth the importance weights use for a dataset unless overridden.
pub(crate) fn resolve_bandwidth(data: &Dataset, bandwidth: Option<f64>) -> Result<f64> {
    match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => Ok(h),
        Some(h) => Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {h}"
        ))),
        None => {
            let (dx, _, dz) = data.dims();
            bandwidth_rule(data.len(), dx, dz)
        }
    }
}

impl Potential {
    pub fn uniform(bounds: Vec<(f64, f64)>) -> Result<Self> {
        check_bounds(&bounds)?;
        let log_volume = bounds.iter().map(|(lo, hi)| (hi - lo).ln()).sum();
        Ok(Potential::Uniform { bounds, log_volume })
    }

    pub fn gaussian(means: Vec<f64>, std_devs: Vec<f64>) -> Result<Self> {
        if means.len() != std_devs.len() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                got: std_devs.len(),
            });
        }
        if let Some(s) = std_devs.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "standard deviation must be positive, got {s}"
            )));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("non-finite mean".into()));
        }
        Ok(Potential::Gaussian { means, std_devs })
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Potential::Uniform { .. } => PotentialKind::Uniform,
            Potential::Gaussian { .. } => PotentialKind::Gaussian,
            Potential::ProductMarginal { .. } => PotentialKind::ProductMarginal,
            Potential::Factual { .. } => PotentialKind::Factual,
            Potential::CustomGrid(_) => PotentialKind::CustomGrid,
        }
    }

    /// Number of (X,Z) coordinates the potential is defined over.
    pub fn dim(&self) -> usize {
        match self {
            Potential::Uniform { bounds, .. } => bounds.len(),
            Potential::Gaussian { means, .. } => means.len(),
            Potential::ProductMarginal { x, z, .. } => x.dim() + z.dim(),
            Potential::Factual { joint } => joint.dim(),
            Potential::CustomGrid(g) => g.bounds.len(),
        }
    }

    /// True when the potential has mass everywhere on the real line, so it
    /// cannot be bounded by a multiple of a compactly supported data density.
    pub fn has_unbounded_support(&self) -> bool {
        matches!(self, Potential::Gaussian { .. })
    }

    /// Density at the concatenated point `(x, z)`.
    pub fn density_xz(&self, xz: &[f64]) -> Result<f64> {
        if xz.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: xz.len(),
            });
        }
        Ok(match self {
            Potential::Uniform { bounds, log_volume } => {
                if xz
                    .iter()
                    .zip(bounds)
                    .all(|(v, (lo, hi))| lo <= v && v <= hi)
                {
                    (-log_volume).exp()
                } else {
                    0.0
                }
            }
            Potential::Gaussian { means, std_devs } => {
                let mut log_d = 0.0;
                for ((v, m), s) in xz.iter().zip(means).zip(std_devs) {
                    let u = (v - m) / s;
                    log_d += -0.5 * u * u - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
                }
                log_d.exp()
            }
            Potential::ProductMarginal { dx, x, z } => {
                x.density(&xz[..*dx], None).unwrap_or(0.0)
                    * z.density(&xz[*dx..], None).unwrap_or(0.0)
            }
            Potential::Factual { joint } => joint.density(xz, None).unwrap_or(0.0),
            Potential::CustomGrid(g) => g.density(xz),
        })
    }

    /// Density at `(x, z)` given as separate blocks.
    pub fn density(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        let xz: Vec<f64> = x.iter().chain(z).copied().collect();
        self.density_xz(&xz)
    }

    /// Bounding box of the support, when it is compact.
    pub fn support_bounds(&self) -> Option<&[(f64, f64)]> {
        match self {
            Potential::Uniform { bounds, .. } => Some(bounds),
            Potential::CustomGrid(g) => Some(&g.bounds),
            _ => None,
        }
    }

    /// Load a custom-grid potential (format in the module docs).
    pub fn read_grid_csv<R: BufRead>(input: R) -> Result<Self> {
        Grid::read_csv(input).map(Potential::CustomGrid)
    }
}

impl Grid {
    pub fn new(bounds: Vec<(f64, f64)>, cells: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        check_bounds(&bounds)?;
        let dim = bounds.len();
        let mut centres: Vec<Vec<f64>> = vec![Vec::new(); dim];
        for (c, v) in &cells {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            if !(*v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "grid density must be finite and >= 0, got {v}"
                )));
            }
            for (d, &x) in c.iter().enumerate() {
                let (lo, hi) = bounds[d];
                if !(lo <= x && x <= hi) {
                    return Err(Error::InvalidParameter(format!(
                        "cell centre {x} outside bounds in dim {d}"
                    )));
                }
                centres[d].push(x);
            }
        }
        for cs in &mut centres {
            cs.sort_by(f64::total_cmp);
            cs.dedup();
            if cs.is_empty() {
                return Err(Error::EmptyDataset);
            }
        }
        let mut values = vec![0.0; centres.iter().map(Vec::len).product()];
        for (c, v) in &cells {
            let mut flat = 0;
            for (d, x) in c.iter().enumerate() {
                let idx = centres[d]
                    .binary_search_by(|p| p.total_cmp(x))
                    .expect("centre present");
                flat = flat * centres[d].len() + idx;
            }
            values[flat] = *v;
        }
        Ok(Grid {
            bounds,
            centres,
            values,
        })
    }

    fn density(&self, p: &[f64]) -> f64 {
        let mut flat = 0;
        for ((&v, &(lo, hi)), cs) in p.iter().zip(&self.bounds).zip(&self.centres) {
            if !(lo <= v && v <= hi) {
                return 0.0;
            }
            // nearest centre == the cell whose edges are the midpoints
            let above = cs.partition_point(|&c| c < v);
            let idx = if above == 0 {
                0
            } else if above == cs.len() {
                cs.len() - 1
            } else if v - cs[above - 1] <= cs[above] - v {
                above - 1
            } else {
                above
            };
            flat = flat * cs.len() + idx;
        }
        self.values[flat]
    }

    fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input
            .lines()
            .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let parse = |f: &str, what: &str| -> Result<f64> {
            f.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad {what} '{f}'")))
        };
        let first = lines.next().ok_or(Error::EmptyDataset)??;
        let mut fields = first.split(',');
        if fields.next().map(str::trim) != Some("bounds") {
            return Err(Error::Parse(
                "grid CSV must start with a 'bounds,...' line".into(),
            ));
        }
        let b: Vec<f64> = fields.map(|f| parse(f, "bound")).collect::<Result<_>>()?;
        if b.is_empty() || !b.len().is_multiple_of(2) {
            return Err(Error::Parse("bounds line needs lo,hi pairs".into()));
        }
        let bounds: Vec<(f64, f64)> = b.chunks(2).map(|p| (p[0], p[1])).collect();
        let dim = bounds.len();
        let _header = lines.next().ok_or(Error::EmptyDataset)??;
        let mut cells = Vec::new();
        for l in lines {
            let l = l?;
            let vals: Vec<f64> = l
                .split(',')
                .map(|f| parse(f, "grid value"))
                .collect::<Result<_>>()?;
            if vals.len() != dim + 1 {
                return Err(Error::Parse(format!(
                    "grid row needs {} fields, got {}",
                    dim + 1,
                    vals.len()
                )));
            }
            cells.push((vals[..dim].to_vec(), vals[dim]));
        }
        Grid::new(bounds, cells)
    }
}

/// Build a potential of the given kind for `data`'s (X,Z) coordinates.
pub fn make_potential(
    kind: PotentialKind,
    data: &Dataset,
    params: &PotentialParams,
) -> Result<Potential> {
    let (dx, _, dz) = data.dims();
    let dim = dx + dz;
    let xz = data.xz();
    let needs_data = |ok: bool| if ok { Ok(()) } else { Err(Error::EmptyDataset) };
    match kind {
        PotentialKind::Uniform => {
            let bounds = match &params.bounds {
                Some(b) => b.clone(),
                None => {
                    needs_data(!data.is_empty())?;
                    empirical_bounds(&xz, dim)
                }
            };
            if bounds.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: bounds.len(),
                });
            }
            Potential::uniform(bounds)
        }
        PotentialKind::Gaussian => {
            let n = data.len() as f64;
            let means = match &params.means {
                Some(m) => m.clone(),
                None => {
                    needs_data(!data.is_empty())?;
                    (0..dim)
                        .map(|d| xz.iter().skip(d).step_by(dim).sum::<f64>() / n)
                        .collect()
                }
            };
            let std_devs = match &params.std_devs {
                Some(s) => s.clone(),
                None => {
                    needs_data(data.len() >= 2)?;
                    (0..dim)
                        .map(|d| {
                            let var = xz
                                .iter()
                                .skip(d)
                                .step_by(dim)
                                .map(|v| (v - means[d]).powi(2))
                                .sum::<f64>()
                                / (n - 1.0);
                            var.sqrt()
                        })
                        .collect()
                }
            };
            if means.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: means.len(),
                });
            }
            Potential::gaussian(means, std_devs)
        }
        PotentialKind::ProductMarginal => {
            needs_data(!data.is_empty())?;
            let h = resolve_bandwidth(data, params.bandwidth)?;
            Ok(Potential::ProductMarginal {
                dx,
                x: KdeModel::new(data.x_block(), dx, h)?,
                z: KdeModel::new(data.z_block(), dz, h)?,
            })
        }
        PotentialKind::Factual => {
            needs_data(!data.is_empty())?;
            let h = resolve_bandwidth(data, params.bandwidth)?;
            Ok(Potential::Factual {
                joint: KdeModel::new(&xz, dim, h)?,
            })
        }
        PotentialKind::CustomGrid => Err(Error::InvalidParameter(
            "custom-grid potentials are loaded with Potential::read_grid_csv".into(),
        )),
    }
}

/// Free-function form of [`Potential::density`].
pub fn potential_density(p: &Potential, x: &[f64], z: &[f64]) -> Result<f64> {
    p.density(x, z)
}
