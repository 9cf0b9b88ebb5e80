//! Knot partitions of a compact interval `[c, d]`.
//!
//! A [`Partition`] is the strictly increasing sequence
//! `c = x_0 < x_1 < ... < x_N < x_{N+1} = d`. `N` is the number of interior
//! knots and the spline space of order `m` over the partition has dimension
//! `m + N`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used when checking that a step divides an interval.
const DIVISIBILITY_TOL: f64 = 1e-9;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PartitionError {
    #[error("a partition needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("partition points must be finite and strictly increasing (violated at index {index})")]
    NonIncreasing { index: usize },

    #[error("interval length {length} is not an integer multiple of step {step}")]
    NonDivisible { length: f64, step: f64 },

    #[error("subpartition count {count} must lie in [1, {max}]")]
    BadCount { count: usize, max: usize },

    #[error("partitions do not share endpoints: [{0}, {1}] vs [{2}, {3}]")]
    EndpointMismatch(f64, f64, f64, f64),

    #[error("cannot take the union of zero partitions")]
    EmptyUnion,

    #[error("order and subdivision level must be at least 1")]
    ZeroParameter,
}

/// Strictly increasing knot sequence on `[c, d]`, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Partition {
    points: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Partition {
    type Error = PartitionError;

    fn try_from(points: Vec<f64>) -> Result<Self, Self::Error> {
        Partition::new(points)
    }
}

impl From<Partition> for Vec<f64> {
    fn from(p: Partition) -> Self {
        p.points
    }
}

impl Partition {
    pub fn new(points: Vec<f64>) -> Result<Self, PartitionError> {
        if points.len() < 2 {
            return Err(PartitionError::TooFewPoints(points.len()));
        }
        if let Some(index) = points.iter().position(|x| !x.is_finite()) {
            return Err(PartitionError::NonIncreasing { index });
        }
        if let Some(i) = points.windows(2).position(|w| w[0] >= w[1]) {
            return Err(PartitionError::NonIncreasing { index: i + 1 });
        }
        Ok(Partition { points })
    }

    /// Equidistant partition with interior knots `c + j*step`.
    pub fn uniform(c: f64, d: f64, step: f64) -> Result<Self, PartitionError> {
        let pieces = integer_ratio(d - c, step)?;
        let mut points: Vec<f64> = (0..pieces).map(|j| c + j as f64 * step).collect();
        points.push(d);
        Partition::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Interior knots `x_1, ..., x_N`.
    pub fn interior(&self) -> &[f64] {
        &self.points[1..self.points.len() - 1]
    }

    /// Number of interior knots `N`.
    pub fn interior_count(&self) -> usize {
        self.points.len() - 2
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Splits the interior knots into `n` interleaved subpartitions.
    ///
    /// Subpartition `j` (0-based) keeps `c`, `d` and every `x_k` with
    /// `k mod n == j`, where `k` is the 1-based interior index. With `N = 10`
    /// and `n = 3` this gives `{c, x3, x6, x9, d}`, `{c, x1, x4, x7, x10, d}`
    /// and `{c, x2, x5, x8, d}`.
    pub fn round_robin(&self, n: usize) -> Result<Vec<Partition>, PartitionError> {
        let max = self.interior_count() + 1;
        if n == 0 || n > max {
            return Err(PartitionError::BadCount { count: n, max });
        }
        let mut subs: Vec<Vec<f64>> = vec![vec![self.start()]; n];
        for (i, &x) in self.interior().iter().enumerate() {
            subs[(i + 1) % n].push(x);
        }
        subs.into_iter()
            .map(|mut pts| {
                pts.push(self.end());
                Partition::new(pts)
            })
            .collect()
    }

    /// Sorted union of the knot sets. Knots are merged on exact equality.
    pub fn union(parts: &[Partition]) -> Result<Partition, PartitionError> {
        let first = parts.first().ok_or(PartitionError::EmptyUnion)?;
        let (c, d) = (first.start(), first.end());
        let mut points = Vec::with_capacity(parts.iter().map(Partition::len).sum());
        for p in parts {
            if p.start() != c || p.end() != d {
                return Err(PartitionError::EndpointMismatch(c, d, p.start(), p.end()));
            }
            points.extend_from_slice(&p.points);
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Partition::new(points)
    }

    /// Extended knot vector with `m` copies of each endpoint.
    pub fn clamped_extension(&self, order: usize) -> Result<ExtendedPartition, PartitionError> {
        if order == 0 {
            return Err(PartitionError::ZeroParameter);
        }
        let mut knots = Vec::with_capacity(2 * order + self.interior_count());
        knots.extend(std::iter::repeat_n(self.start(), order));
        knots.extend_from_slice(self.interior());
        knots.extend(std::iter::repeat_n(self.end(), order));
        Ok(ExtendedPartition { knots, order })
    }

    /// Inserts `level - 1` equally spaced knots into every gap.
    pub fn subdivide(&self, level: usize) -> Result<Partition, PartitionError> {
        if level == 0 {
            return Err(PartitionError::ZeroParameter);
        }
        if level == 1 {
            return Ok(self.clone());
        }
        let mut points = Vec::with_capacity((self.len() - 1) * level + 1);
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            points.push(a);
            let gap = (b - a) / level as f64;
            points.extend((1..level).map(|t| a + t as f64 * gap));
        }
        points.push(self.end());
        Partition::new(points)
    }
}

/// Number of steps of length `step` in `length`, if it is a positive integer.
pub(crate) fn integer_ratio(length: f64, step: f64) -> Result<usize, PartitionError> {
    let err = PartitionError::NonDivisible { length, step };
    if !(length > 0.0 && step > 0.0) || !length.is_finite() || !step.is_finite() {
        return Err(err);
    }
    let ratio = length / step;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > DIVISIBILITY_TOL * ratio.max(1.0) {
        return Err(err);
    }
    Ok(rounded as usize)
}

/// Knot vector `y_1 <= ... <= y_{2m+N}` carrying a partition's interior
/// knots at positions `m+1 ..= m+N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPartition {
    knots: Vec<f64>,
    order: usize,
}

impl ExtendedPartition {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn interior_count(&self) -> usize {
        self.knots.len() - 2 * self.order
    }

    pub fn start(&self) -> f64 {
        self.knots[self.order - 1]
    }

    pub fn end(&self) -> f64 {
        self.knots[self.knots.len() - self.order]
    }
}
