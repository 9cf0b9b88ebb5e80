#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use splinedict::Partition;

/// Random partition of `[c, d]` with `interior` distinct interior knots.
pub fn random_partition<R: Rng>(rng: &mut R, c: f64, d: f64, interior: usize) -> Partition {
    loop {
        let mut pts: Vec<f64> = (0..interior).map(|_| rng.gen_range(c..d)).collect();
        pts.push(c);
        pts.push(d);
        pts.sort_by(f64::total_cmp);
        // keep knots from crowding so the sampled rank test stays meaningful
        let min_gap = (d - c) / (8.0 * (interior + 1) as f64);
        if pts.windows(2).all(|w| w[1] - w[0] > min_gap) {
            return Partition::new(pts).unwrap();
        }
    }
}

pub fn linspace(c: f64, d: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| {
            if k + 1 == len {
                d
            } else {
                c + (d - c) * k as f64 / (len - 1) as f64
            }
        })
        .collect()
}

/// Largest relative least-squares residual `‖A x - b‖ / ‖b‖` over the
/// columns `b` of `targets`, solved by SVD.
pub fn max_lstsq_residual(basis: &DMatrix<f64>, targets: &DMatrix<f64>) -> f64 {
    let svd = basis.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd.solve(targets, smax * 1e-12).unwrap();
    let fit = basis * x;
    (0..targets.ncols())
        .map(|j| {
            let b = targets.column(j);
            (fit.column(j) - b).norm() / b.norm().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// Samples of the truncated-power spanning family `1, x, ..., x^{m-1}`,
/// `(x - x_i)_+^{m-1}` on `grid`. Abscissas are mapped to `[0, 1]` first to
/// keep the monomials well scaled; the span is unchanged.
pub fn truncated_powers(p: &Partition, order: usize, grid: &[f64]) -> DMatrix<f64> {
    let (c, d) = (p.start(), p.end());
    let s = |x: f64| (x - c) / (d - c);
    let cols = order + p.interior_count();
    DMatrix::from_fn(grid.len(), cols, |r, j| {
        let x = s(grid[r]);
        if j < order {
            x.powi(j as i32)
        } else {
            let knot = s(p.interior()[j - order]);
            if x > knot {
                (x - knot).powi(order as i32 - 1)
            } else {
                0.0
            }
        }
    })
}

/// Gaussian dictionary with `atoms` columns of length `rows` (random
/// column scales) and a signal planted on `planted` of them plus noise of
/// norm about `noise`.
pub fn planted_instance<R: Rng>(
    rng: &mut R,
    rows: usize,
    atoms: usize,
    planted: usize,
    noise: f64,
) -> (DMatrix<f64>, Vec<f64>, Vec<usize>) {
    use rand_distr::{Distribution, StandardNormal};
    let mut a = DMatrix::from_fn(rows, atoms, |_, _| StandardNormal.sample(rng));
    for mut col in a.column_iter_mut() {
        let scale = rng.gen_range(0.2..5.0);
        col *= scale;
    }
    let support = rand::seq::index::sample(rng, atoms, planted).into_vec();
    let mut f = vec![0.0; rows];
    for &j in &support {
        let mag: f64 = rng.gen_range(0.5..2.0) / a.column(j).norm();
        let coef = if rng.gen_bool(0.5) { mag } else { -mag };
        for r in 0..rows {
            f[r] += coef * a[(r, j)];
        }
    }
    let e: Vec<f64> = (0..rows).map(|_| StandardNormal.sample(rng)).collect();
    let en = e.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
    for (fr, er) in f.iter_mut().zip(&e) {
        *fr += noise * er / en;
    }
    (a, f, support)
}

/// Least squares on the chosen columns through the normal equations.
pub fn normal_equations(a: &DMatrix<f64>, f: &[f64], cols: &[usize]) -> (Vec<f64>, f64) {
    let sub = a.select_columns(cols);
    let b = nalgebra::DVector::from_column_slice(f);
    let gram = sub.transpose() * &sub;
    let rhs = sub.transpose() * &b;
    let x = gram.cholesky().expect("independent columns").solve(&rhs);
    let res = (&b - &sub * &x).norm();
    (x.iter().cloned().collect(), res)
}

/// Smallest least-squares residual over all `k`-subsets of the columns.
pub fn best_subset_residual(a: &DMatrix<f64>, f: &[f64], k: usize) -> f64 {
    let b = nalgebra::DVector::from_column_slice(f);
    if k == 0 {
        return b.norm();
    }
    let n = a.ncols();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    loop {
        let sub = a.select_columns(&idx);
        let svd = sub.clone().svd(true, true);
        let x = svd.solve(&b, 1e-13 * svd.singular_values.max()).unwrap();
        best = best.min((&b - &sub * x).norm());
        // next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for t in i + 1..k {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Plain matching pursuit (no orthogonalization): returns how many
/// distinct atoms it touched before the residual reached `tol`.
pub fn matching_pursuit_atoms(a: &DMatrix<f64>, f: &[f64], tol: f64) -> usize {
    let cols: Vec<nalgebra::DVector<f64>> = a.column_iter().map(|c| c.normalize()).collect();
    let mut r = nalgebra::DVector::from_column_slice(f);
    let mut used = std::collections::BTreeSet::new();
    for _ in 0..100_000 {
        if r.norm() <= tol {
            break;
        }
        let (j, ip) = cols
            .iter()
            .enumerate()
            .map(|(j, c)| (j, c.dot(&r)))
            .fold(
                (0usize, 0.0f64),
                |best, cur| if cur.1.abs() > best.1.abs() { cur } else { best },
            );
        r -= &cols[j] * ip;
        used.insert(j);
    }
    used.len()
}
