//! Exact k-nearest-neighbour radii and fixed-radius (weighted) counts.
//!
//! [`PointIndex`] is a static kd-tree over a point cloud. Queries are always
//! centred on one of the indexed samples, and that sample is never counted
//! as its own neighbour. Results are identical to a brute-force scan: node
//! pruning only skips boxes that provably contain no qualifying point.

use crate::error::{Error, Result};
use crate::geometry::Norm;

const LEAF_SIZE: usize = 12;
const NO_CHILD: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    end: usize,
    left: usize,
    right: usize,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.left == NO_CHILD
    }
}

/// Static kd-tree over `n` points of dimension `dim`.
#[derive(Debug, Clone)]
pub struct PointIndex {
    dim: usize,
    norm: Norm,
    /// Coordinates in tree order, row-major.
    coords: Vec<f64>,
    /// Tree position -> sample id.
    order: Vec<usize>,
    /// Sample id -> tree position.
    position: Vec<usize>,
    nodes: Vec<Node>,
    /// Per node: `dim` lower bounds followed by `dim` upper bounds.
    bounds: Vec<f64>,
}

/// Per-sample weights laid out for a specific [`PointIndex`], with subtree
/// sums so fully-contained nodes are added in one step.
#[derive(Debug, Clone)]
pub struct TreeWeights {
    by_position: Vec<f64>,
    node_sums: Vec<f64>,
}

impl PointIndex {
    /// Build an index over `points` (row-major, `dim` columns).
    pub fn new(points: &[f64], dim: usize, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if !points.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: points.len() % dim,
            });
        }
        let n = points.len() / dim;
        if let Some(row) = (0..n).find(|&r| {
            points[r * dim..(r + 1) * dim]
                .iter()
                .any(|v| !v.is_finite())
        }) {
            return Err(Error::NonFinite { row });
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut index = PointIndex {
            dim,
            norm,
            coords: Vec::new(),
            order: Vec::new(),
            position: Vec::new(),
            nodes: Vec::new(),
            bounds: Vec::new(),
        };
        if n > 0 {
            index.build(points, &mut order, 0, n);
        }
        index.coords = order
            .iter()
            .flat_map(|&id| points[id * dim..(id + 1) * dim].iter().copied())
            .collect();
        let mut position = vec![0; n];
        for (pos, &id) in order.iter().enumerate() {
            position[id] = pos;
        }
        index.order = order;
        index.position = position;
        Ok(index)
    }

    fn build(&mut self, points: &[f64], order: &mut [usize], start: usize, end: usize) -> usize {
        let dim = self.dim;
        let node_id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            left: NO_CHILD,
            right: NO_CHILD,
        });
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &id in &order[start..end] {
            for d in 0..dim {
                let v = points[id * dim + d];
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
            }
        }
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);

        if end - start <= LEAF_SIZE {
            return node_id;
        }
        let (split_dim, _) =
            (0..dim)
                .map(|d| (d, hi[d] - lo[d]))
                .fold((0, f64::NEG_INFINITY), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                });
        // coincident points are still split by index so that a query centred
        // inside a large duplicate block only scans one leaf
        let mid = (start + end) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a * dim + split_dim]
                .total_cmp(&points[b * dim + split_dim])
                .then(a.cmp(&b))
        });
        let left = self.build(points, order, start, mid);
        let right = self.build(points, order, mid, end);
        self.nodes[node_id].left = left;
        self.nodes[node_id].right = right;
        node_id
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    /// Coordinates of sample `id`.
    pub fn point(&self, id: usize) -> &[f64] {
        let pos = self.position[id];
        &self.coords[pos * self.dim..(pos + 1) * self.dim]
    }

    fn point_at(&self, pos: usize) -> &[f64] {
        &self.coords[pos * self.dim..(pos + 1) * self.dim]
    }

    fn node_bounds(&self, node: usize) -> (&[f64], &[f64]) {
        let base = node * 2 * self.dim;
        (
            &self.bounds[base..base + self.dim],
            &self.bounds[base + self.dim..base + 2 * self.dim],
        )
    }

    /// Smallest possible distance from `q` to a point inside the node box.
    fn min_dist(&self, node: usize, q: &[f64]) -> f64 {
        let (lo, hi) = self.node_bounds(node);
        self.norm.combine(
            q.iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&l, &h))| (l - v).max(v - h).max(0.0)),
        )
    }

    /// Largest possible distance from `q` to a point inside the node box.
    fn max_dist(&self, node: usize, q: &[f64]) -> f64 {
        let (lo, hi) = self.node_bounds(node);
        self.norm.combine(
            q.iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&l, &h))| (v - l).abs().max((h - v).abs())),
        )
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: id,
                n: self.len(),
            });
        }
        Ok(())
    }

    /// Distance from sample `id` to its `k`-th nearest other sample.
    ///
    /// Equidistant points share the radius: the result ρ satisfies
    /// `#{j ≠ id : d < ρ} ≤ k − 1` and `#{j ≠ id : d ≤ ρ} ≥ k`.
    pub fn kth_distance(&self, id: usize, k: usize) -> Result<f64> {
        self.check_id(id)?;
        if k == 0 || k >= self.len() {
            return Err(Error::InvalidK { k, n: self.len() });
        }
        let q = self.point(id);
        let self_pos = self.position[id];
        // ascending list of the k smallest distances seen so far
        let mut best: Vec<f64> = Vec::with_capacity(k + 1);
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            if best.len() == k && self.min_dist(node, q) >= best[k - 1] {
                continue;
            }
            let nd = &self.nodes[node];
            if nd.is_leaf() {
                for pos in nd.start..nd.end {
                    if pos == self_pos {
                        continue;
                    }
                    let d = self.norm.distance(q, self.point_at(pos));
                    if best.len() < k || d < best[k - 1] {
                        let at = best.partition_point(|&b| b <= d);
                        best.insert(at, d);
                        best.truncate(k);
                    }
                }
            } else {
                let (l, r) = (nd.left, nd.right);
                let (dl, dr) = (self.min_dist(l, q), self.min_dist(r, q));
                // nearer child on top of the stack
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        Ok(best[k - 1])
    }

    /// Lay out per-sample weights (indexed by sample id) for this tree.
    pub fn tree_weights(&self, weights: &[f64]) -> Result<TreeWeights> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: weights.len(),
            });
        }
        let by_position: Vec<f64> = self.order.iter().map(|&id| weights[id]).collect();
        let mut node_sums = vec![0.0; self.nodes.len()];
        // children always have larger ids than their parent
        for node in (0..self.nodes.len()).rev() {
            let nd = &self.nodes[node];
            node_sums[node] = if nd.is_leaf() {
                by_position[nd.start..nd.end].iter().sum()
            } else {
                node_sums[nd.left] + node_sums[nd.right]
            };
        }
        Ok(TreeWeights {
            by_position,
            node_sums,
        })
    }

    /// Sum of weights (or count, when `weights` is `None`) of samples
    /// `j ≠ id` with `d(j, id) < radius` (`strict`) or `≤ radius`.
    ///
    /// A strict query with `radius == 0` would always be empty; it instead
    /// counts the samples coinciding with `id` (distance exactly zero).
    pub fn count_within(
        &self,
        id: usize,
        radius: f64,
        weights: Option<&TreeWeights>,
        strict: bool,
    ) -> Result<f64> {
        self.check_id(id)?;
        if !(radius >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius must be >= 0, got {radius}"
            )));
        }
        if let Some(w) = weights {
            if w.by_position.len() != self.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.len(),
                    got: w.by_position.len(),
                });
            }
        }
        let strict = strict && radius > 0.0;
        let inside = |d: f64| if strict { d < radius } else { d <= radius };
        let q = self.point(id);
        let self_pos = self.position[id];
        let mut total = 0.0;
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            if !inside(self.min_dist(node, q)) {
                continue;
            }
            let nd = &self.nodes[node];
            let holds_self = (nd.start..nd.end).contains(&self_pos);
            if !holds_self && inside(self.max_dist(node, q)) {
                total += match weights {
                    Some(w) => w.node_sums[node],
                    None => (nd.end - nd.start) as f64,
                };
                continue;
            }
            if nd.is_leaf() {
                for pos in nd.start..nd.end {
                    if pos != self_pos && inside(self.norm.distance(q, self.point_at(pos))) {
                        total += weights.map_or(1.0, |w| w.by_position[pos]);
                    }
                }
            } else {
                stack.push(nd.right);
                stack.push(nd.left);
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(values: &[f64]) -> PointIndex {
        PointIndex::new(values, 1, Norm::MaxNorm).unwrap()
    }

    fn brute_kth(points: &[f64], dim: usize, norm: Norm, id: usize, k: usize) -> f64 {
        let n = points.len() / dim;
        let q = &points[id * dim..(id + 1) * dim];
        let mut d: Vec<f64> = (0..n)
            .filter(|&j| j != id)
            .map(|j| norm.distance(q, &points[j * dim..(j + 1) * dim]))
            .collect();
        d.sort_by(f64::total_cmp);
        d[k - 1]
    }

    fn brute_count(
        points: &[f64],
        dim: usize,
        norm: Norm,
        id: usize,
        r: f64,
        w: Option<&[f64]>,
        strict: bool,
    ) -> f64 {
        let n = points.len() / dim;
        let q = &points[id * dim..(id + 1) * dim];
        let strict = strict && r > 0.0;
        (0..n)
            .filter(|&j| j != id)
            .filter(|&j| {
                let d = norm.distance(q, &points[j * dim..(j + 1) * dim]);
                if strict {
                    d < r
                } else {
                    d <= r
                }
            })
            .map(|j| w.map_or(1.0, |w| w[j]))
            .sum()
    }

    #[test]
    fn kth_distance_examples() {
        let idx = line(&[0.0, 1.0, 3.0]);
        assert_eq!(idx.kth_distance(0, 1).unwrap(), 1.0);
        assert_eq!(idx.kth_distance(0, 2).unwrap(), 3.0);
        assert!(matches!(
            idx.kth_distance(0, 3),
            Err(Error::InvalidK { .. })
        ));
        assert!(idx.kth_distance(0, 0).is_err());
        let dup = line(&[2.5; 5]);
        assert_eq!(dup.kth_distance(0, 2).unwrap(), 0.0);
    }

    #[test]
    fn count_within_examples() {
        let idx = line(&[0.0, 1.0, 3.0]);
        assert_eq!(idx.count_within(0, 3.0, None, true).unwrap(), 1.0);
        assert_eq!(idx.count_within(0, 3.0, None, false).unwrap(), 2.0);

        let idx = line(&[0.0, 0.0, 0.0, 5.0]);
        let w = idx.tree_weights(&[1.0, 0.5, 2.0, 7.0]).unwrap();
        assert_eq!(idx.count_within(0, 0.0, Some(&w), true).unwrap(), 2.5);
        assert!(idx.count_within(0, -1.0, None, true).is_err());
    }

    #[test]
    fn many_duplicates_are_handled() {
        let mut pts = vec![0.0; 3 * 500];
        pts.extend((0..60).map(|i| i as f64 * 0.37 + 1.0));
        let idx = PointIndex::new(&pts, 3, Norm::MaxNorm).unwrap();
        assert_eq!(idx.kth_distance(7, 5).unwrap(), 0.0);
        assert_eq!(idx.count_within(7, 0.0, None, true).unwrap(), 499.0);
        assert_eq!(idx.count_within(7, 0.0, None, false).unwrap(), 499.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            PointIndex::new(&[0.0, f64::NAN, 1.0], 1, Norm::MaxNorm),
            Err(Error::NonFinite { row: 1 })
        ));
    }

    fn cloud() -> impl Strategy<Value = (Vec<f64>, usize, bool)> {
        (1usize..=5, 2usize..=300, any::<bool>()).prop_flat_map(|(dim, n, grid)| {
            // grid data forces many exact ties
            let coord = if grid {
                (0i32..6).prop_map(|v| v as f64 * 0.25).boxed()
            } else {
                (-10.0f64..10.0).boxed()
            };
            (
                proptest::collection::vec(coord, dim * n),
                Just(dim),
                Just(grid),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn agrees_with_brute_force((pts, dim, _grid) in cloud(), euclid in any::<bool>(), k_raw in 1usize..8, strict in any::<bool>(), rscale in 0.0f64..2.0) {
            let norm = if euclid { Norm::Euclidean } else { Norm::MaxNorm };
            let n = pts.len() / dim;
            let idx = PointIndex::new(&pts, dim, norm).unwrap();
            let weights: Vec<f64> = (0..n).map(|j| ((j * 7 % 11) as f64) * 0.125).collect();
            let tw = idx.tree_weights(&weights).unwrap();
            let k = k_raw.min(n - 1);
            for id in (0..n).step_by((n / 17).max(1)) {
                let rho = idx.kth_distance(id, k).unwrap();
                prop_assert_eq!(rho, brute_kth(&pts, dim, norm, id, k));
                for r in [rho, rho * rscale, 0.0] {
                    prop_assert_eq!(idx.count_within(id, r, None, strict).unwrap(),
                        brute_count(&pts, dim, norm, id, r, None, strict));
                    // dyadic weights keep every partial sum exact
                    prop_assert_eq!(idx.count_within(id, r, Some(&tw), strict).unwrap(),
                        brute_count(&pts, dim, norm, id, r, Some(&weights), strict));
                }
            }
        }

        #[test]
        fn counts_monotone_in_radius((pts, dim, _grid) in cloud(), r1 in 0.0f64..5.0, r2 in 0.0f64..5.0) {
            let idx = PointIndex::new(&pts, dim, Norm::MaxNorm).unwrap();
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            for id in 0..idx.len().min(20) {
                let strict_lo = idx.count_within(id, lo, None, true).unwrap();
                let strict_hi = idx.count_within(id, hi, None, true).unwrap();
                let loose_hi = idx.count_within(id, hi, None, false).unwrap();
                prop_assert!(strict_lo <= strict_hi);
                prop_assert!(strict_hi <= loose_hi);
            }
        }

        #[test]
        fn translation_invariant((pts, dim, _grid) in cloud(), shift in -1000i32..1000, k_raw in 1usize..6) {
            // values are multiples of 2^-k, so integer shifts are exact
            let pts: Vec<f64> = pts.iter().map(|v| (v * 1024.0).round() / 1024.0).collect();
            let moved: Vec<f64> = pts.iter().map(|v| v + shift as f64).collect();
            let a = PointIndex::new(&pts, dim, Norm::MaxNorm).unwrap();
            let b = PointIndex::new(&moved, dim, Norm::MaxNorm).unwrap();
            let k = k_raw.min(a.len() - 1);
            for id in 0..a.len() {
                let ra = a.kth_distance(id, k).unwrap();
                prop_assert_eq!(ra.to_bits(), b.kth_distance(id, k).unwrap().to_bits());
                prop_assert_eq!(a.count_within(id, ra, None, true).unwrap(), b.count_within(id, ra, None, true).unwrap());
            }
        }
    }
}
