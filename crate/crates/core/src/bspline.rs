//! B-spline bases over clamped knot vectors and dense sampling of atom
//! families on a grid.
//!
//! Basis functions are indexed from 0, so `B_{m,j}` in the usual 1-based
//! notation is index `j - 1` here. The order-1 functions are indicators of
//! `[y_j, y_{j+1})`, except that the last non-degenerate interval is closed
//! at `d`. Recursion terms whose knot denominator vanishes contribute 0.

use std::io::{self, Write};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::partition::{ExtendedPartition, Partition, PartitionError};

/// Singular values below `max * RANK_RTOL` do not count toward the rank.
pub const RANK_RTOL: f64 = 1e-10;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum BsplineError {
    #[error("basis index {index} out of range for {len} functions")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("abscissa {x} lies outside [{c}, {d}]")]
    XOutOfDomain { x: f64, c: f64, d: f64 },

    #[error("sampling grid must be non-empty and sorted")]
    BadGrid,

    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Evaluates the single basis function `index` of order `ext.order()` at `x`
/// directly from the order recursion.
pub fn eval_bspline(ext: &ExtendedPartition, index: usize, x: f64) -> Result<f64, BsplineError> {
    let m = ext.order();
    let len = m + ext.interior_count();
    if index >= len {
        return Err(BsplineError::IndexOutOfRange { index, len });
    }
    let (c, d) = (ext.start(), ext.end());
    if !(c..=d).contains(&x) {
        return Err(BsplineError::XOutOfDomain { x, c, d });
    }
    let y = ext.knots();
    let last = last_open_interval(y, m);
    // values[i] holds B_{k, index + i} for the current order k
    let mut values: Vec<f64> = (index..index + m)
        .map(|i| {
            let inside = y[i] <= x && x < y[i + 1];
            let at_end = x == d && i == last;
            if inside || at_end {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for k in 2..=m {
        for i in 0..=(m - k) {
            let j = index + i;
            values[i] = ratio(x - y[j], y[j + k - 1] - y[j]) * values[i]
                + ratio(y[j + k] - x, y[j + k] - y[j + 1]) * values[i + 1];
        }
    }
    Ok(values[0])
}

/// Index of the last non-degenerate knot interval `[y_i, y_{i+1})`.
fn last_open_interval(y: &[f64], order: usize) -> usize {
    y.len() - order - 1
}

#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// A family of functions on `[c, d]` that can be sampled column by column.
pub trait AtomFamily {
    fn atom_count(&self) -> usize;

    fn domain(&self) -> (f64, f64);

    /// Calls `sink(atom, value)` for (at least) every atom that is nonzero
    /// at `x`. `x` is assumed to lie in the domain.
    fn for_each_nonzero(&self, x: f64, sink: &mut dyn FnMut(usize, f64));
}

/// The B-spline basis of `S_m(Δ)` over the clamped extension of `Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasis {
    ext: ExtendedPartition,
}

impl SplineBasis {
    pub fn new(partition: &Partition, order: usize) -> Result<Self, BsplineError> {
        Ok(SplineBasis {
            ext: partition.clamped_extension(order)?,
        })
    }

    pub fn extended(&self) -> &ExtendedPartition {
        &self.ext
    }

    pub fn order(&self) -> usize {
        self.ext.order()
    }

    /// `m + N`, the dimension of the spline space.
    pub fn len(&self) -> usize {
        self.ext.order() + self.ext.interior_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Support `[y_j, y_{j+m}]` of basis function `index`.
    pub fn support(&self, index: usize) -> (f64, f64) {
        let y = self.ext.knots();
        (y[index], y[index + self.order()])
    }

    pub fn eval(&self, index: usize, x: f64) -> Result<f64, BsplineError> {
        eval_bspline(&self.ext, index, x)
    }

    /// Evaluates the `m` basis functions that can be nonzero at `x`.
    ///
    /// Returns the index of the first of them; `out[..m]` receives the
    /// values. All order-`k` values are built from the order-`k-1` ones.
    pub fn eval_local(&self, x: f64, out: &mut [f64]) -> usize {
        let m = self.order();
        let y = self.ext.knots();
        let last = last_open_interval(y, m);
        // y[span] <= x < y[span + 1], clamped into the valid range
        let span = (y.partition_point(|&t| t <= x).max(1) - 1).clamp(m - 1, last);
        let out = &mut out[..m];
        out.fill(0.0);
        out[m - 1] = 1.0;
        // out[m - k ..] holds B_{k, span-k+1 ..= span}
        for k in 2..=m {
            let first = span + 1 - k;
            for slot in (m - k)..m {
                let i = first + slot - (m - k);
                let left = if slot > m - k {
                    ratio(x - y[i], y[i + k - 1] - y[i]) * out[slot]
                } else {
                    0.0
                };
                let right = if slot + 1 < m {
                    ratio(y[i + k] - x, y[i + k] - y[i + 1]) * out[slot + 1]
                } else {
                    0.0
                };
                out[slot] = left + right;
            }
        }
        span + 1 - m
    }

    /// Values of all `m + N` basis functions at `x`.
    pub fn eval_all(&self, x: f64) -> Result<Vec<f64>, BsplineError> {
        let (c, d) = self.domain();
        if !(c..=d).contains(&x) {
            return Err(BsplineError::XOutOfDomain { x, c, d });
        }
        let mut all = vec![0.0; self.len()];
        let mut local = vec![0.0; self.order()];
        let first = self.eval_local(x, &mut local);
        all[first..first + local.len()].copy_from_slice(&local);
        Ok(all)
    }
}

impl AtomFamily for SplineBasis {
    fn atom_count(&self) -> usize {
        self.len()
    }

    fn domain(&self) -> (f64, f64) {
        (self.ext.start(), self.ext.end())
    }

    fn for_each_nonzero(&self, x: f64, sink: &mut dyn FnMut(usize, f64)) {
        let mut local = [0.0; 16];
        let mut heap;
        let buf: &mut [f64] = if self.order() <= local.len() {
            &mut local[..]
        } else {
            heap = vec![0.0; self.order()];
            &mut heap[..]
        };
        let first = self.eval_local(x, buf);
        for (i, &v) in buf[..self.order()].iter().enumerate() {
            if v != 0.0 {
                sink(first + i, v);
            }
        }
    }
}

/// Pointwise evaluations of an atom family: one row per grid point, one
/// column per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMatrix {
    grid: Vec<f64>,
    values: DMatrix<f64>,
}

impl SampledMatrix {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    /// Count of singular values above `max * RANK_RTOL`.
    pub fn rank(&self) -> usize {
        numerical_rank(&self.values)
    }

    /// Writes `x,atom0,atom1,...` rows, one per grid point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "x")?;
        for j in 0..self.values.ncols() {
            write!(out, ",atom{j}")?;
        }
        writeln!(out)?;
        for (r, x) in self.grid.iter().enumerate() {
            write!(out, "{x}")?;
            for v in self.values.row(r).iter() {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn numerical_rank(matrix: &DMatrix<f64>) -> usize {
    if matrix.is_empty() {
        return 0;
    }
    let sv = matrix.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > max * RANK_RTOL).count()
}

/// Samples every atom of `family` on `grid`.
pub fn sample<F: AtomFamily + ?Sized>(family: &F, grid: &[f64]) -> Result<SampledMatrix, BsplineError> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(BsplineError::BadGrid);
    }
    let (c, d) = family.domain();
    if let Some(&x) = grid.iter().find(|x| !(c..=d).contains(*x)) {
        return Err(BsplineError::XOutOfDomain { x, c, d });
    }
    let mut values = DMatrix::zeros(grid.len(), family.atom_count());
    for (r, &x) in grid.iter().enumerate() {
        family.for_each_nonzero(x, &mut |j, v| values[(r, j)] = v);
    }
    Ok(SampledMatrix {
        grid: grid.to_vec(),
        values,
    })
}
