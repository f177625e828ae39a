//! Joint samples of `(X, Y, Z)` and their CSV form.
//!
//! CSV layout: a header `x0,..,x{dx-1},y0,..,z0,..` followed by one row per
//! sample. Block dimensions are recovered from the header.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// `N` samples split into X, Y and Z blocks, each stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    dx: usize,
    dy: usize,
    dz: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

impl Dataset {
    pub fn new(
        x: Vec<f64>,
        dx: usize,
        y: Vec<f64>,
        dy: usize,
        z: Vec<f64>,
        dz: usize,
    ) -> Result<Self> {
        if dx == 0 || dy == 0 || dz == 0 {
            return Err(Error::ZeroDimension);
        }
        if !x.len().is_multiple_of(dx) {
            return Err(Error::DimensionMismatch {
                expected: dx,
                got: x.len() % dx,
            });
        }
        let n = x.len() / dx;
        for (block, d) in [(&y, dy), (&z, dz)] {
            if block.len() != n * d {
                return Err(Error::DimensionMismatch {
                    expected: n * d,
                    got: block.len(),
                });
            }
        }
        let ds = Dataset {
            n,
            dx,
            dy,
            dz,
            x,
            y,
            z,
        };
        if let Some(row) = (0..n).find(|&i| ds.row(i).any(|v| !v.is_finite())) {
            return Err(Error::NonFinite { row });
        }
        Ok(ds)
    }

    /// One-dimensional blocks from three equally long columns.
    pub fn from_columns(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        Self::new(x, 1, y, 1, z, 1)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `(dx, dy, dz)`
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.dx, self.dy, self.dz)
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.dx..(i + 1) * self.dx]
    }

    pub fn y(&self, i: usize) -> &[f64] {
        &self.y[i * self.dy..(i + 1) * self.dy]
    }

    pub fn z(&self, i: usize) -> &[f64] {
        &self.z[i * self.dz..(i + 1) * self.dz]
    }

    /// All coordinates of sample `i` in x, y, z order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.x(i).iter().chain(self.y(i)).chain(self.z(i)).copied()
    }

    fn stack(&self, blocks: &[Block]) -> Vec<f64> {
        let mut out =
            Vec::with_capacity(self.n * blocks.iter().map(|b| self.block_dim(*b)).sum::<usize>());
        for i in 0..self.n {
            for b in blocks {
                out.extend_from_slice(match b {
                    Block::X => self.x(i),
                    Block::Y => self.y(i),
                    Block::Z => self.z(i),
                });
            }
        }
        out
    }

    fn block_dim(&self, b: Block) -> usize {
        match b {
            Block::X => self.dx,
            Block::Y => self.dy,
            Block::Z => self.dz,
        }
    }

    /// Joint points `(x, y, z)`, row-major.
    pub fn xyz(&self) -> Vec<f64> {
        self.stack(&[Block::X, Block::Y, Block::Z])
    }

    /// Points `(x, z)`, row-major.
    pub fn xz(&self) -> Vec<f64> {
        self.stack(&[Block::X, Block::Z])
    }

    /// Points `(y, z)`, row-major.
    pub fn yz(&self) -> Vec<f64> {
        self.stack(&[Block::Y, Block::Z])
    }

    pub fn z_block(&self) -> &[f64] {
        &self.z
    }

    pub fn x_block(&self) -> &[f64] {
        &self.x
    }

    pub fn y_block(&self) -> &[f64] {
        &self.y
    }

    /// Sample ids sorted by their coordinates (lexicographic, total order).
    ///
    /// Identical rows are indistinguishable, so the canonical dataset
    /// [`Dataset::permuted`]`(&order)` does not depend on the input row order.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| {
            self.row(a)
                .zip(self.row(b))
                .map(|(u, v)| u.total_cmp(&v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        order
    }

    /// New dataset whose sample `i` is this dataset's sample `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Dataset {
        let pick = |src: &[f64], d: usize| -> Vec<f64> {
            order
                .iter()
                .flat_map(|&i| src[i * d..(i + 1) * d].iter().copied())
                .collect()
        };
        Dataset {
            n: order.len(),
            dx: self.dx,
            dy: self.dy,
            dz: self.dz,
            x: pick(&self.x, self.dx),
            y: pick(&self.y, self.dy),
            z: pick(&self.z, self.dz),
        }
    }

    /// Append another dataset with the same block dimensions.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.dims() != other.dims() {
            return Err(Error::InvalidParameter(format!(
                "block dimensions differ: {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        let join = |a: &[f64], b: &[f64]| a.iter().chain(b).copied().collect::<Vec<_>>();
        Ok(Dataset {
            n: self.n + other.n,
            dx: self.dx,
            dy: self.dy,
            dz: self.dz,
            x: join(&self.x, &other.x),
            y: join(&self.y, &other.y),
            z: join(&self.z, &other.z),
        })
    }

    /// Apply `f(block, coordinate, value)` to every entry.
    pub fn map_values(&self, f: impl Fn(char, usize, f64) -> f64) -> Result<Dataset> {
        let map = |src: &[f64], d: usize, tag: char| -> Vec<f64> {
            src.iter()
                .enumerate()
                .map(|(i, &v)| f(tag, i % d, v))
                .collect()
        };
        Dataset::new(
            map(&self.x, self.dx, 'x'),
            self.dx,
            map(&self.y, self.dy, 'y'),
            self.dy,
            map(&self.z, self.dz, 'z'),
            self.dz,
        )
    }

    pub fn header(&self) -> Vec<String> {
        let names = |p: char, d: usize| (0..d).map(move |i| format!("{p}{i}"));
        names('x', self.dx)
            .chain(names('y', self.dy))
            .chain(names('z', self.dz))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.header().join(","))?;
        let mut line = String::new();
        for i in 0..self.n {
            line.clear();
            for (c, v) in self.row(i).enumerate() {
                if c > 0 {
                    line.push(',');
                }
                // `{}` on f64 is the shortest round-tripping representation
                line.push_str(&format!("{v}"));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Dataset> {
        let mut lines = input.lines();
        let header = loop {
            match lines.next() {
                Some(l) => {
                    let l = l?;
                    if !l.trim().is_empty() && !l.starts_with('#') {
                        break l;
                    }
                }
                None => return Err(Error::EmptyDataset),
            }
        };
        let cols: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut blocks = Vec::with_capacity(cols.len());
        for c in &cols {
            let tag = c.chars().next().unwrap_or(' ');
            if !matches!(tag, 'x' | 'y' | 'z') || c[1..].parse::<usize>().is_err() {
                return Err(Error::Parse(format!(
                    "unexpected column '{c}', want x0.., y0.., z0.."
                )));
            }
            blocks.push(tag);
        }
        let count = |t: char| blocks.iter().filter(|&&b| b == t).count();
        let (dx, dy, dz) = (count('x'), count('y'), count('z'));
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut z = Vec::new();
        for (lineno, l) in lines.enumerate() {
            let l = l?;
            if l.trim().is_empty() || l.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != cols.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 2,
                    cols.len(),
                    fields.len()
                )));
            }
            for (tag, f) in blocks.iter().zip(fields) {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad number '{f}'", lineno + 2)))?;
                match tag {
                    'x' => x.push(v),
                    'y' => y.push(v),
                    _ => z.push(v),
                }
            }
        }
        if x.is_empty() && dx > 0 {
            return Err(Error::EmptyDataset);
        }
        Dataset::new(x, dx, y, dy, z, dz)
    }
}

#[derive(Clone, Copy)]
enum Block {
    X,
    Y,
    Z,
}
