//! Incrementally maintained QR factorization of the selected atoms.
//!
//! With `A_Γ = Q R`, the set keeps `C = Qᵀ A` for *every* dictionary column,
//! so that `R` is the selected-column slice of `C`. Alongside it the set
//! tracks the residual `r = f - Q Qᵀ f`, `ρ_j = <r, a_j>` and the squared
//! norm `w_j` of the part of each atom orthogonal to the selected span.
//! Removing an atom retriangularizes with Givens rotations applied to the
//! rows of `C` and the columns of `Q`.

use super::{PursuitProblem, ORTH_MIN};

/// Orthogonality defect above which another Gram-Schmidt pass is run.
const REORTH_DEFECT: f64 = 1e-8;

#[derive(Debug, Clone)]
pub(crate) struct ActiveSet<'a> {
    prob: &'a PursuitProblem,
    selected: Vec<usize>,
    in_set: Vec<bool>,
    q: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    qf: Vec<f64>,
    residual: Vec<f64>,
    rho: Vec<f64>,
    w: Vec<f64>,
}

/// Quantities derived from `R⁻¹` that score removals and exchanges.
pub(crate) struct DualInfo {
    /// Row-major upper-triangular `R⁻¹`.
    pub rinv: Vec<Vec<f64>>,
    /// Least-squares coefficients in normalized scale, `R⁻¹ Qᵀ f`.
    pub coeffs: Vec<f64>,
    /// `‖row i of R⁻¹‖ = 1 / ‖component of a_i orthogonal to the others‖`.
    pub dual_norms: Vec<f64>,
}

impl DualInfo {
    /// `<f, b_i>` for the unit vector `b_i` in the selected span that is
    /// orthogonal to every selected atom but `i`; removing atom `i` adds
    /// its square to the squared residual norm.
    pub fn removal_weight(&self, pos: usize) -> f64 {
        self.coeffs[pos] / self.dual_norms[pos]
    }
}

impl<'a> ActiveSet<'a> {
    pub fn new(prob: &'a PursuitProblem) -> Self {
        let n = prob.atom_count();
        let residual = prob.signal.clone();
        let mut set = ActiveSet {
            prob,
            selected: Vec::new(),
            in_set: vec![false; n],
            q: Vec::new(),
            c: Vec::new(),
            qf: Vec::new(),
            residual,
            rho: vec![0.0; n],
            w: prob.norms.iter().map(|&s| if s > 0.0 { 1.0 } else { 0.0 }).collect(),
        };
        set.refresh_rho();
        set
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.in_set[j]
    }

    pub fn residual_norm(&self) -> f64 {
        norm(&self.residual)
    }

    pub fn rho(&self, j: usize) -> f64 {
        self.rho[j]
    }

    /// Squared norm of the part of atom `j` orthogonal to the selection.
    pub fn orth_sq(&self, j: usize) -> f64 {
        self.w[j].max(0.0)
    }

    pub fn c_row(&self, i: usize) -> &[f64] {
        &self.c[i]
    }

    fn refresh_rho(&mut self) {
        for j in 0..self.prob.atom_count() {
            self.rho[j] = self.prob.dot_column(j, &self.residual);
        }
    }

    /// Appends atom `j`. Returns `false`, leaving the set untouched, when
    /// `j` lies numerically in the selected span.
    pub fn push(&mut self, j: usize) -> bool {
        if self.in_set[j] || self.prob.norms[j] == 0.0 {
            return false;
        }
        let k = self.selected.len();
        let mut v = vec![0.0; self.prob.rows];
        let (lo, hi) = self.prob.ranges[j];
        v[lo..hi].copy_from_slice(&self.prob.column(j)[lo..hi]);
        let mut g: Vec<f64> = (0..k).map(|i| self.c[i][j]).collect();
        for (gi, qi) in g.iter().zip(&self.q) {
            axpy(-gi, qi, &mut v);
        }
        // second (and, if needed, third) classical Gram-Schmidt pass
        for _ in 0..2 {
            let g2: Vec<f64> = self.q.iter().map(|qi| dot(qi, &v)).collect();
            for ((gi, g2i), qi) in g.iter_mut().zip(&g2).zip(&self.q) {
                axpy(-g2i, qi, &mut v);
                *gi += g2i;
            }
            let vn = norm(&v);
            let defect = g2.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if vn == 0.0 || defect <= REORTH_DEFECT * vn.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        let vn = norm(&v);
        if !(vn >= ORTH_MIN) {
            self.w[j] = 0.0;
            return false;
        }
        v.iter_mut().for_each(|x| *x /= vn);

        let row: Vec<f64> = (0..self.prob.atom_count())
            .map(|jj| if jj == j { vn } else { self.prob.dot_column(jj, &v) })
            .collect();
        for (i, gi) in g.iter().enumerate() {
            self.c[i][j] = *gi;
        }
        let qr = dot(&v, &self.residual);
        axpy(-qr, &v, &mut self.residual);
        for (jj, &cj) in row.iter().enumerate() {
            self.w[jj] -= cj * cj;
        }
        self.w[j] = 0.0;
        self.q.push(v);
        self.c.push(row);
        self.qf.push(qr);
        self.selected.push(j);
        self.in_set[j] = true;
        self.refresh_rho();
        true
    }

    /// Removes the atom at position `pos` of the selection.
    pub fn remove(&mut self, pos: usize) -> usize {
        let k = self.selected.len();
        let atom = self.selected.remove(pos);
        self.in_set[atom] = false;
        // columns pos.. of R = C[:, selected] are now upper Hessenberg
        for i in pos..k - 1 {
            let col = self.selected[i];
            let (a, b) = (self.c[i][col], self.c[i + 1][col]);
            let h = a.hypot(b);
            if h == 0.0 {
                continue;
            }
            let (cs, sn) = (a / h, b / h);
            let (upper, lower) = self.c.split_at_mut(i + 1);
            rotate(cs, sn, &mut upper[i], &mut lower[0]);
            let (upper, lower) = self.q.split_at_mut(i + 1);
            rotate(cs, sn, &mut upper[i], &mut lower[0]);
            let (f0, f1) = (self.qf[i], self.qf[i + 1]);
            self.qf[i] = cs * f0 + sn * f1;
            self.qf[i + 1] = -sn * f0 + cs * f1;
            self.c[i + 1][col] = 0.0;
        }
        let q_last = self.q.pop().expect("non-empty selection");
        let c_last = self.c.pop().expect("non-empty selection");
        let f_last = self.qf.pop().expect("non-empty selection");
        axpy(f_last, &q_last, &mut self.residual);
        for (wj, cj) in self.w.iter_mut().zip(&c_last) {
            *wj += cj * cj;
        }
        for &s in &self.selected {
            self.w[s] = 0.0;
        }
        self.refresh_rho();
        atom
    }

    /// Recomputes `w` from `C`, removing drift from incremental updates.
    pub fn refresh_orth(&mut self) {
        for j in 0..self.prob.atom_count() {
            self.w[j] = if self.in_set[j] || self.prob.norms[j] == 0.0 {
                0.0
            } else {
                1.0 - self.c.iter().map(|row| row[j] * row[j]).sum::<f64>()
            };
        }
    }

    #[inline]
    fn r_entry(&self, i: usize, k: usize) -> f64 {
        self.c[i][self.selected[k]]
    }

    /// Least-squares coefficients (normalized scale) by back-substitution.
    pub fn coefficients(&self) -> Vec<f64> {
        let k = self.selected.len();
        let mut x = self.qf.clone();
        for i in (0..k).rev() {
            let tail: f64 = (i + 1..k).map(|l| self.r_entry(i, l) * x[l]).sum();
            x[i] = (x[i] - tail) / self.r_entry(i, i);
        }
        x
    }

    pub fn dual_info(&self) -> DualInfo {
        let k = self.selected.len();
        let mut rinv = vec![Vec::new(); k];
        for i in (0..k).rev() {
            let d = self.r_entry(i, i);
            let mut row = vec![0.0; k];
            for l in i + 1..k {
                let ril = self.r_entry(i, l);
                if ril != 0.0 {
                    axpy(-ril, &rinv[l][l..], &mut row[l..]);
                }
            }
            row.iter_mut().for_each(|x| *x /= d);
            row[i] = 1.0 / d;
            rinv[i] = row;
        }
        let coeffs = rinv
            .iter()
            .enumerate()
            .map(|(i, row)| dot(&row[i..], &self.qf[i..]))
            .collect();
        let dual_norms = rinv.iter().map(|row| norm(row)).collect();
        DualInfo {
            rinv,
            coeffs,
            dual_norms,
        }
    }

    /// Residual of the least-squares fit recomputed from the raw columns.
    pub fn scratch_residual(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut r = self.prob.signal.clone();
        for (&j, &x) in self.selected.iter().zip(coeffs) {
            let (lo, hi) = self.prob.ranges[j];
            axpy(-x, &self.prob.column(j)[lo..hi], &mut r[lo..hi]);
        }
        r
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
fn rotate(cs: f64, sn: f64, a: &mut [f64], b: &mut [f64]) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (u, v) = (*x, *y);
        *x = cs * u + sn * v;
        *y = -sn * u + cs * v;
    }
}
