//! Non-uniform B-spline bases and redundant dictionaries on a compact
//! interval, knot partitions adapted to a sampled signal, and greedy sparse
//! approximation over the resulting dictionaries.
//!
//! ```
//! use splinedict::{Partition, SplineDictionary};
//!
//! let parent = Partition::uniform(0.0, 4.0, 0.5).unwrap();
//! let dict = SplineDictionary::round_robin(&parent, 3, 4).unwrap();
//! // n*m + sum of interior counts over the subpartitions
//! assert_eq!(dict.len(), 3 * 4 + parent.interior_count());
//! assert_eq!(dict.space_dimension(), 4 + 7);
//! ```

// `!(a < b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod bspline;
pub mod dictionary;
pub mod partition;
pub mod pursuit;
pub mod signalio;

pub use adapt::{adapt_partition, curvature_knots, CurvatureVariant, SampledSignal};
pub use bspline::{eval_bspline, sample, AtomFamily, SampledMatrix, SplineBasis};
pub use dictionary::{AtomRef, DictionaryMetadata, SplineDictionary};
pub use partition::{ExtendedPartition, Partition};
pub use pursuit::{
    boomp_prune, oomp, reconstruct, sparse_approximate, swap_refine, Decomposition, PursuitError, PursuitProblem,
    StageLog,
};
