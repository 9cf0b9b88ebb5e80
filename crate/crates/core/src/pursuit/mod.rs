//! Greedy sparse representation over a sampled dictionary.
//!
//! The pipeline has three stages:
//!
//! 1. forward selection with Optimized Orthogonal Matching Pursuit (OOMP):
//!    at every step pick the atom whose component orthogonal to the current
//!    selection, renormalized, has the largest inner product with the
//!    residual; stop once the residual norm is within tolerance;
//! 2. swapping refinement: exchange one selected atom for one unselected
//!    atom whenever that lowers the residual norm at the same sparsity;
//! 3. backward pruning (BOOMP): drop the atom whose removal costs least, for
//!    as long as the residual stays within the error reached by stage 1.
//!
//! Stages 2 and 3 alternate until no exchange improves the fit.
//!
//! All inner products are Euclidean on the sample grid. Columns are
//! normalized internally; coefficients are reported in the scale of the
//! original columns.

mod active_set;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapt::SampledSignal;
use crate::bspline::{AtomFamily, SampledMatrix};
use active_set::{norm, ActiveSet};

/// Atoms whose component orthogonal to the selection has a smaller norm
/// (after normalization) count as lying in the selected span.
pub const ORTH_MIN: f64 = 1e-10;

/// Swaps must lower the residual norm by at least this relative amount.
pub const SWAP_RTOL: f64 = 1e-9;

/// A selection step whose squared residual reduction is below
/// `(STALL_RTOL * ‖f‖)²` is treated as no progress.
const STALL_RTOL: f64 = 1e-13;

/// Relative tolerance when comparing a dictionary grid with a signal grid.
const GRID_RTOL: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PursuitError {
    #[error("dictionary has {rows} rows but the signal has {len} samples")]
    DimensionMismatch { rows: usize, len: usize },

    #[error("dictionary grid does not match the signal grid")]
    GridMismatch,

    #[error("dictionary has no columns")]
    EmptyDictionary,

    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),

    #[error("atom index {index} out of range for {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error(
        "selection stalled at {} atoms with residual {} above the tolerance",
        .decomposition.k(), .decomposition.residual_norm
    )]
    Stagnation { decomposition: Box<Decomposition> },
}

/// A sampled dictionary, a signal on the same grid, and an absolute bound
/// on the residual norm.
#[derive(Debug, Clone)]
pub struct PursuitProblem {
    rows: usize,
    /// Normalized columns, column-major.
    data: Vec<f64>,
    /// Half-open row range holding each column's nonzeros.
    ranges: Vec<(usize, usize)>,
    /// Euclidean norms of the original columns.
    norms: Vec<f64>,
    signal: Vec<f64>,
    signal_norm: f64,
    tol: f64,
}

impl PursuitProblem {
    pub fn new(atoms: &DMatrix<f64>, signal: Vec<f64>, tol: f64) -> Result<Self, PursuitError> {
        let (rows, cols) = atoms.shape();
        if rows != signal.len() {
            return Err(PursuitError::DimensionMismatch {
                rows,
                len: signal.len(),
            });
        }
        if cols == 0 {
            return Err(PursuitError::EmptyDictionary);
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(PursuitError::BadTolerance(tol));
        }
        let mut data = Vec::with_capacity(rows * cols);
        let mut ranges = Vec::with_capacity(cols);
        let mut norms = Vec::with_capacity(cols);
        for col in atoms.column_iter() {
            let s = col.norm();
            let lo = col.iter().position(|&v| v != 0.0).unwrap_or(0);
            let hi = col.iter().rposition(|&v| v != 0.0).map_or(0, |p| p + 1);
            if s > 0.0 {
                data.extend(col.iter().map(|v| v / s));
            } else {
                data.extend(std::iter::repeat_n(0.0, rows));
            }
            ranges.push((lo, hi.max(lo)));
            norms.push(s);
        }
        let signal_norm = norm(&signal);
        Ok(PursuitProblem {
            rows,
            data,
            ranges,
            norms,
            signal,
            signal_norm,
            tol,
        })
    }

    /// Problem for a dictionary sampled on the grid of `signal`.
    pub fn for_signal(atoms: &SampledMatrix, signal: &SampledSignal, tol: f64) -> Result<Self, PursuitError> {
        let grid = signal.grid();
        if atoms.grid().len() != grid.len() {
            return Err(PursuitError::DimensionMismatch {
                rows: atoms.grid().len(),
                len: grid.len(),
            });
        }
        let (c, d) = signal.interval();
        let scale = c.abs().max(d.abs()).max(d - c);
        if atoms
            .grid()
            .iter()
            .zip(&grid)
            .any(|(a, b)| (a - b).abs() > GRID_RTOL * scale)
        {
            return Err(PursuitError::GridMismatch);
        }
        Self::new(atoms.values(), signal.values().to_vec(), tol)
    }

    pub fn atom_count(&self) -> usize {
        self.norms.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn signal_norm(&self) -> f64 {
        self.signal_norm
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Norm of original column `j`.
    pub fn column_norm(&self, j: usize) -> f64 {
        self.norms[j]
    }

    /// Normalized column `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    fn dot_column(&self, j: usize, v: &[f64]) -> f64 {
        let (lo, hi) = self.ranges[j];
        active_set::dot(&self.column(j)[lo..hi], &v[lo..hi])
    }

    /// Residual of the least-squares fit of the signal on `atoms`, computed
    /// from a fresh factorization. Dependent atoms are skipped.
    pub fn subset_residual(&self, atoms: &[usize]) -> f64 {
        let mut set = ActiveSet::new(self);
        for &j in atoms {
            set.push(j);
        }
        let coeffs = set.coefficients();
        norm(&set.scratch_residual(&coeffs))
    }
}

/// Per-stage bookkeeping of [`sparse_approximate`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageLog {
    /// Atoms selected by forward OOMP.
    pub oomp_atoms: usize,
    /// Exchanges applied by swapping refinement.
    pub swaps: usize,
    /// Atoms removed by backward pruning.
    pub pruned: usize,
    /// Completed swap + prune rounds.
    pub rounds: usize,
}

/// Selected atoms with their least-squares coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Column indices, in the order they sit in the selection.
    pub atoms: Vec<usize>,
    /// Coefficients in the scale of the original (unnormalized) columns.
    pub coefficients: Vec<f64>,
    /// `‖f - Σ c_n a_n‖`, recomputed from the columns.
    pub residual_norm: f64,
    pub stage_log: StageLog,
}

impl Decomposition {
    pub fn empty(prob: &PursuitProblem) -> Self {
        Decomposition {
            atoms: Vec::new(),
            coefficients: Vec::new(),
            residual_norm: prob.signal_norm,
            stage_log: StageLog::default(),
        }
    }

    /// Sparsity `K`.
    pub fn k(&self) -> usize {
        self.atoms.len()
    }
}

fn snapshot(set: &ActiveSet<'_>, prob: &PursuitProblem, stage_log: StageLog) -> Decomposition {
    let x = set.coefficients();
    let residual_norm = norm(&set.scratch_residual(&x));
    let coefficients = set
        .selected()
        .iter()
        .zip(&x)
        .map(|(&j, &xi)| xi / prob.norms[j])
        .collect();
    Decomposition {
        atoms: set.selected().to_vec(),
        coefficients,
        residual_norm,
        stage_log,
    }
}

fn rebuild<'a>(dec: &Decomposition, prob: &'a PursuitProblem) -> Result<ActiveSet<'a>, PursuitError> {
    let mut set = ActiveSet::new(prob);
    for &j in &dec.atoms {
        if j >= prob.atom_count() {
            return Err(PursuitError::IndexOutOfRange {
                index: j,
                len: prob.atom_count(),
            });
        }
        set.push(j);
    }
    Ok(set)
}

enum Forward {
    Converged,
    Stalled,
}

/// OOMP selection on `set` until the residual norm is at most the
/// tolerance or no atom can lower it.
fn forward(set: &mut ActiveSet<'_>, prob: &PursuitProblem) -> Forward {
    let stall = (STALL_RTOL * prob.signal_norm).powi(2);
    loop {
        if set.residual_norm() <= prob.tol {
            return Forward::Converged;
        }
        let mut blocked: Vec<usize> = Vec::new();
        loop {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..prob.atom_count() {
                if set.contains(j) || blocked.contains(&j) {
                    continue;
                }
                let w = set.orth_sq(j);
                if !(w.sqrt() >= ORTH_MIN) {
                    continue;
                }
                let rho = set.rho(j);
                let score = rho * rho / w;
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((j, score));
                }
            }
            match best {
                Some((j, score)) if score > stall => {
                    if set.push(j) {
                        break;
                    }
                    blocked.push(j);
                }
                _ => return Forward::Stalled,
            }
        }
        if set.len().is_multiple_of(64) {
            set.refresh_orth();
        }
    }
}

/// Forward OOMP selection.
///
/// Returns the empty decomposition when the tolerance is already met by the
/// zero approximation. If every remaining atom lies numerically in the
/// selected span (or is orthogonal to the residual) before the tolerance is
/// met, the partial decomposition is returned inside
/// [`PursuitError::Stagnation`].
pub fn oomp(prob: &PursuitProblem) -> Result<Decomposition, PursuitError> {
    let mut set = ActiveSet::new(prob);
    let outcome = forward(&mut set, prob);
    let log = StageLog {
        oomp_atoms: set.len(),
        ..StageLog::default()
    };
    let dec = snapshot(&set, prob, log);
    match outcome {
        Forward::Converged => Ok(dec),
        Forward::Stalled => Err(PursuitError::Stagnation {
            decomposition: Box::new(dec),
        }),
    }
}

/// Steepest-descent exchange search. Applies the best strictly improving
/// (selected, unselected) exchange per step; returns the number applied.
fn swap_pass(set: &mut ActiveSet<'_>, prob: &PursuitProblem) -> usize {
    let mut swaps = 0;
    loop {
        let k = set.len();
        let res = set.residual_norm();
        if k == 0 || res == 0.0 {
            return swaps;
        }
        let res_sq = res * res;
        // exchanges must bring the squared norm below this
        let target_sq = (res * (1.0 - SWAP_RTOL)).powi(2);
        let dual = set.dual_info();
        let candidates: Vec<usize> = (0..prob.atom_count())
            .filter(|&j| !set.contains(j) && prob.norms[j] > 0.0)
            .collect();
        if candidates.is_empty() {
            return swaps;
        }
        // beta[i][u] = <b_i, a_{candidates[u]}> * dual_norms[i]  (row i of R⁻¹ C)
        let mut best: Option<(usize, usize, f64)> = None;
        let mut t_row = vec![0.0; candidates.len()];
        for i in 0..k {
            t_row.fill(0.0);
            for l in i..k {
                let ril = dual.rinv[i][l];
                if ril == 0.0 {
                    continue;
                }
                let crow = set.c_row(l);
                for (t, &j) in t_row.iter_mut().zip(&candidates) {
                    *t += ril * crow[j];
                }
            }
            let dn = dual.dual_norms[i];
            let phi = dual.removal_weight(i);
            for (u, &j) in candidates.iter().enumerate() {
                let beta = t_row[u] / dn;
                let denom = set.orth_sq(j) + beta * beta;
                if !(denom.sqrt() >= ORTH_MIN) {
                    continue;
                }
                let num = set.rho(j) + phi * beta;
                let new_sq = res_sq + phi * phi - num * num / denom;
                if new_sq < target_sq && best.is_none_or(|(_, _, b)| new_sq < b) {
                    best = Some((i, j, new_sq));
                }
            }
        }
        let Some((pos, j, _)) = best else {
            return swaps;
        };
        let saved = set.clone();
        let removed = set.remove(pos);
        if !set.push(j) || !(set.residual_norm() < res * (1.0 - SWAP_RTOL)) {
            // predicted gain not realized numerically
            *set = saved;
            let _ = removed;
            return swaps;
        }
        swaps += 1;
    }
}

/// Removes atoms while the least-squares residual stays within `budget`.
fn prune_pass(set: &mut ActiveSet<'_>, budget: f64) -> usize {
    let mut pruned = 0;
    while set.len() > 0 {
        let dual = set.dual_info();
        let res = set.residual_norm();
        let mut best: Option<(usize, f64)> = None;
        for pos in 0..set.len() {
            let phi = dual.removal_weight(pos);
            let cost = phi * phi;
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((pos, cost));
            }
        }
        let (pos, cost) = best.expect("non-empty selection");
        if (res * res + cost).sqrt() > budget * (1.0 + 1e-12) {
            break;
        }
        let saved = set.clone();
        set.remove(pos);
        let coeffs = set.coefficients();
        if norm(&set.scratch_residual(&coeffs)) > budget {
            *set = saved;
            break;
        }
        pruned += 1;
    }
    pruned
}

/// Swapping refinement at fixed sparsity.
pub fn swap_refine(dec: &Decomposition, prob: &PursuitProblem) -> Result<Decomposition, PursuitError> {
    let mut set = rebuild(dec, prob)?;
    let swaps = swap_pass(&mut set, prob);
    let log = StageLog {
        swaps: dec.stage_log.swaps + swaps,
        ..dec.stage_log.clone()
    };
    Ok(snapshot(&set, prob, log))
}

/// Backward pruning: removes atoms while the residual norm stays at or
/// below `budget`.
pub fn boomp_prune(dec: &Decomposition, prob: &PursuitProblem, budget: f64) -> Result<Decomposition, PursuitError> {
    let mut set = rebuild(dec, prob)?;
    let pruned = prune_pass(&mut set, budget);
    let log = StageLog {
        pruned: dec.stage_log.pruned + pruned,
        ..dec.stage_log.clone()
    };
    Ok(snapshot(&set, prob, log))
}

/// Full pipeline: OOMP, then alternating swap refinement and backward
/// pruning (with the OOMP residual as budget) until a refinement round
/// applies no exchange.
pub fn sparse_approximate(prob: &PursuitProblem) -> Result<Decomposition, PursuitError> {
    let mut set = ActiveSet::new(prob);
    let outcome = forward(&mut set, prob);
    let mut log = StageLog {
        oomp_atoms: set.len(),
        ..StageLog::default()
    };
    let first = snapshot(&set, prob, log.clone());
    if let Forward::Stalled = outcome {
        return Err(PursuitError::Stagnation {
            decomposition: Box::new(first),
        });
    }
    let budget = first.residual_norm;
    loop {
        let swaps = swap_pass(&mut set, prob);
        log.swaps += swaps;
        log.pruned += prune_pass(&mut set, budget);
        log.rounds += 1;
        if swaps == 0 {
            break;
        }
    }
    Ok(snapshot(&set, prob, log))
}

/// Evaluates `Σ c_n atom_n(x)` at every grid point.
pub fn reconstruct<F: AtomFamily + ?Sized>(
    dec: &Decomposition,
    family: &F,
    grid: &[f64],
) -> Result<Vec<f64>, PursuitError> {
    let len = family.atom_count();
    let mut weights = vec![0.0; len];
    for (&j, &c) in dec.atoms.iter().zip(&dec.coefficients) {
        if j >= len {
            return Err(PursuitError::IndexOutOfRange { index: j, len });
        }
        weights[j] += c;
    }
    Ok(grid
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            family.for_each_nonzero(x, &mut |j, v| acc += weights[j] * v);
            acc
        })
        .collect())
}
