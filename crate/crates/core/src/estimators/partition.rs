//! Histogram (partitioning) qCMI baseline.

use std::collections::BTreeMap;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::potentials::Potential;

/// Bins per coordinate so that cells hold about 100 samples on average:
/// `⌊(N/100)^(1/D)⌋` with `D = dx + dy + dz`.
pub fn default_bins(n: usize, total_dims: usize) -> usize {
    ((n as f64 / 100.0).powf(1.0 / total_dims as f64)).floor() as usize
}

struct Axis {
    lo: f64,
    width: f64,
    bins: usize,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, bins: usize) -> Axis {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
            (l.min(v), h.max(v))
        });
        Axis {
            lo,
            width: (hi - lo) / bins as f64,
            bins,
        }
    }

    fn bin(&self, v: f64) -> u32 {
        if self.width <= 0.0 {
            return 0;
        }
        (((v - self.lo) / self.width).floor() as usize).min(self.bins - 1) as u32
    }

    fn edges(&self, b: u32) -> (f64, f64) {
        let lo = self.lo + b as f64 * self.width;
        (lo, lo + self.width)
    }
}

/// Discrete qCMI of the equal-width histogram of the data.
///
/// Empirical cell masses of (X,Z) are replaced by `q`'s masses on the same
/// cells (restricted to cells that contain data and renormalised), the
/// conditional `p(Y | X,Z)` is kept from the counts, and the discrete CMI of
/// the resulting table is returned in nats.
pub fn qcmi_partition(data: &Dataset, q: &Potential, bins: Option<usize>) -> Result<f64> {
    let (dx, dy, dz) = data.dims();
    let total_dims = dx + dy + dz;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if q.dim() != dx + dz {
        return Err(Error::DimensionMismatch {
            expected: dx + dz,
            got: q.dim(),
        });
    }
    let b = bins.unwrap_or_else(|| default_bins(data.len(), total_dims));
    if b < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 bins per dimension, got {b}"
        )));
    }
    let n = data.len();
    let xz = data.xz();
    let yb = data.y_block();
    let xz_axes: Vec<Axis> = (0..dx + dz)
        .map(|d| Axis::fit(xz.iter().skip(d).step_by(dx + dz).copied(), b))
        .collect();
    let y_axes: Vec<Axis> = (0..dy)
        .map(|d| Axis::fit(yb.iter().skip(d).step_by(dy).copied(), b))
        .collect();

    // (xz cell, y cell) -> count, and xz cell -> count
    let mut joint: BTreeMap<(Vec<u32>, Vec<u32>), f64> = BTreeMap::new();
    let mut xz_counts: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for i in 0..n {
        let cx: Vec<u32> = xz[i * (dx + dz)..(i + 1) * (dx + dz)]
            .iter()
            .zip(&xz_axes)
            .map(|(&v, a)| a.bin(v))
            .collect();
        let cy: Vec<u32> = data
            .y(i)
            .iter()
            .zip(&y_axes)
            .map(|(&v, a)| a.bin(v))
            .collect();
        *xz_counts.entry(cx.clone()).or_default() += 1.0;
        *joint.entry((cx, cy)).or_default() += 1.0;
    }

    // q mass of each occupied (X,Z) cell
    let mut q_mass: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for cell in xz_counts.keys() {
        q_mass.insert(cell.clone(), cell_mass(q, cell, &xz_axes)?);
    }
    let total: f64 = q_mass.values().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter(
            "potential puts no mass on any occupied cell".into(),
        ));
    }

    let mut p_z: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    let mut p_yz: BTreeMap<(Vec<u32>, Vec<u32>), f64> = BTreeMap::new();
    let mut cells = Vec::with_capacity(joint.len());
    for ((cx, cy), count) in &joint {
        let p_xz = q_mass[cx] / total;
        let p = p_xz * count / xz_counts[cx];
        if p == 0.0 {
            continue;
        }
        let cz = cx[dx..].to_vec();
        *p_z.entry(cz.clone()).or_default() += p;
        *p_yz.entry((cy.clone(), cz.clone())).or_default() += p;
        cells.push((p, p_xz, cy, cz));
    }
    let mut cmi = 0.0;
    for (p, p_xz, cy, cz) in cells {
        let pz = p_z[&cz];
        let pyz = p_yz[&(cy.clone(), cz)];
        cmi += p * ((p * pz) / (p_xz * pyz)).ln();
    }
    Ok(cmi)
}

fn cell_mass(q: &Potential, cell: &[u32], axes: &[Axis]) -> Result<f64> {
    let edges: Vec<(f64, f64)> = cell.iter().zip(axes).map(|(&c, a)| a.edges(c)).collect();
    if let Potential::Uniform { bounds, .. } = q {
        // exact overlap of the cell with the uniform box
        let mut frac = 1.0;
        for ((lo, hi), (qlo, qhi)) in edges.iter().zip(bounds) {
            if hi > lo {
                frac *= (hi.min(*qhi) - lo.max(*qlo)).max(0.0) / (qhi - qlo);
            } else if lo < qlo || lo > qhi {
                frac = 0.0;
            }
        }
        return Ok(frac);
    }
    let centre: Vec<f64> = edges.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let volume: f64 = edges
        .iter()
        .map(|(lo, hi)| if hi > lo { hi - lo } else { 1.0 })
        .product();
    Ok(q.density_xz(&centre)? * volume)
}
