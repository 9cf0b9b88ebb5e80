//! Redundant B-spline dictionaries built by merging the bases of several
//! subpartitions whose union is the parent partition.
//!
//! The merged family spans exactly the spline space of the parent, yet holds
//! `n*m + sum_j N_j` atoms instead of `m + N`. Atoms from coarser
//! subpartitions have broader support than the parent basis functions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bspline::{self, AtomFamily, BsplineError, SplineBasis};
use crate::partition::{integer_ratio, Partition, PartitionError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DictionaryError {
    #[error("subpartitions do not union to the parent partition")]
    UnionMismatch,

    #[error("no subpartitions given")]
    NoSubpartitions,

    #[error(transparent)]
    Partition(#[from] PartitionError),

    #[error(transparent)]
    Bspline(#[from] BsplineError),
}

/// Position of an atom inside the dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomRef {
    /// Index of the source subpartition.
    pub subpartition: usize,
    /// Index within that subpartition's basis.
    pub index: usize,
}

#[derive(Debug, Clone)]
pub struct SplineDictionary {
    parent: Partition,
    subpartitions: Vec<Partition>,
    bases: Vec<SplineBasis>,
    /// offsets[j] is the global index of the first atom of basis j
    offsets: Vec<usize>,
    order: usize,
}

impl SplineDictionary {
    /// Concatenates the clamped bases of `subs` (subpartition-major,
    /// basis-index-minor). The union of `subs` must equal `parent` exactly.
    pub fn new(parent: &Partition, subs: Vec<Partition>, order: usize) -> Result<Self, DictionaryError> {
        if subs.is_empty() {
            return Err(DictionaryError::NoSubpartitions);
        }
        match Partition::union(&subs) {
            Ok(u) if &u == parent => {}
            Ok(_) | Err(PartitionError::EndpointMismatch(..)) => return Err(DictionaryError::UnionMismatch),
            Err(e) => return Err(e.into()),
        }
        let bases = subs
            .iter()
            .map(|s| SplineBasis::new(s, order))
            .collect::<Result<Vec<_>, _>>()?;
        let mut offsets = Vec::with_capacity(bases.len() + 1);
        let mut total = 0;
        for b in &bases {
            offsets.push(total);
            total += b.len();
        }
        offsets.push(total);
        Ok(SplineDictionary {
            parent: parent.clone(),
            subpartitions: subs,
            bases,
            offsets,
            order,
        })
    }

    /// Dictionary from the `n` interleaved subpartitions of `parent`.
    pub fn round_robin(parent: &Partition, n: usize, order: usize) -> Result<Self, DictionaryError> {
        Self::new(parent, parent.round_robin(n)?, order)
    }

    /// The plain B-spline basis of `S_m(parent)` as a one-subpartition
    /// dictionary.
    pub fn basis(parent: &Partition, order: usize) -> Result<Self, DictionaryError> {
        Self::new(parent, vec![parent.clone()], order)
    }

    /// Cardinal dictionary on the uniform partition of step `fine`, merged
    /// from the `coarse / fine` shifted partitions with knots
    /// `c + j0*fine + j*coarse`.
    pub fn cardinal(c: f64, d: f64, fine: f64, coarse: f64, order: usize) -> Result<Self, DictionaryError> {
        let pieces = integer_ratio(d - c, fine)?;
        let shifts = integer_ratio(coarse, fine)?;
        let parent = Partition::uniform(c, d, fine)?;
        // knot k of the fine grid belongs to shift k mod shifts; sharing the
        // parent's representation keeps the union exact
        let mut subs: Vec<Vec<f64>> = vec![vec![c]; shifts];
        for k in 1..pieces {
            subs[k % shifts].push(parent.points()[k]);
        }
        let subs = subs
            .into_iter()
            .map(|mut pts| {
                pts.push(d);
                Partition::new(pts)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(&parent, subs, order)
    }

    pub fn parent(&self) -> &Partition {
        &self.parent
    }

    pub fn subpartitions(&self) -> &[Partition] {
        &self.subpartitions
    }

    pub fn bases(&self) -> &[SplineBasis] {
        &self.bases
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn subpartition_count(&self) -> usize {
        self.bases.len()
    }

    pub fn len(&self) -> usize {
        self.offsets[self.bases.len()]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dimension `m + N` of the spanned spline space.
    pub fn space_dimension(&self) -> usize {
        self.order + self.parent.interior_count()
    }

    pub fn atom(&self, global: usize) -> Option<AtomRef> {
        if global >= self.len() {
            return None;
        }
        let subpartition = self.offsets.partition_point(|&o| o <= global) - 1;
        Some(AtomRef {
            subpartition,
            index: global - self.offsets[subpartition],
        })
    }

    pub fn atoms(&self) -> impl Iterator<Item = AtomRef> + '_ {
        self.bases
            .iter()
            .enumerate()
            .flat_map(|(subpartition, b)| (0..b.len()).map(move |index| AtomRef { subpartition, index }))
    }

    pub fn eval(&self, global: usize, x: f64) -> Result<f64, BsplineError> {
        let atom = self.atom(global).ok_or(BsplineError::IndexOutOfRange {
            index: global,
            len: self.len(),
        })?;
        self.bases[atom.subpartition].eval(atom.index, x)
    }

    pub fn support(&self, global: usize) -> Option<(f64, f64)> {
        self.atom(global).map(|a| self.bases[a.subpartition].support(a.index))
    }

    /// Numerical rank of the dictionary sampled on `grid`.
    pub fn span_rank(&self, grid: &[f64]) -> Result<usize, BsplineError> {
        Ok(bspline::sample(self, grid)?.rank())
    }

    pub fn metadata(&self) -> DictionaryMetadata {
        DictionaryMetadata {
            parent: self.parent.clone(),
            order: self.order,
            subpartitions: self.bases.len(),
            size: self.len(),
            atoms: self
                .atoms()
                .map(|a| {
                    let (lo, hi) = self.bases[a.subpartition].support(a.index);
                    AtomInfo {
                        subpartition: a.subpartition,
                        index: a.index,
                        support: [lo, hi],
                    }
                })
                .collect(),
        }
    }
}

impl AtomFamily for SplineDictionary {
    fn atom_count(&self) -> usize {
        self.len()
    }

    fn domain(&self) -> (f64, f64) {
        (self.parent.start(), self.parent.end())
    }

    fn for_each_nonzero(&self, x: f64, sink: &mut dyn FnMut(usize, f64)) {
        for (basis, &offset) in self.bases.iter().zip(&self.offsets) {
            basis.for_each_nonzero(x, &mut |j, v| sink(offset + j, v));
        }
    }
}

/// JSON description of a dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryMetadata {
    pub parent: Partition,
    pub order: usize,
    pub subpartitions: usize,
    pub size: usize,
    pub atoms: Vec<AtomInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomInfo {
    pub subpartition: usize,
    pub index: usize,
    pub support: [f64; 2],
}
