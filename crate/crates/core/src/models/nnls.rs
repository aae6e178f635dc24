//! Lawson–Hanson active-set solver for `min ‖A x − b‖₂ subject to x ≥ 0`.

use std::marker::PhantomData;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Least squares restricted to `cols` by Householder QR. Returns `None` when
/// the selected columns are numerically rank deficient.
fn lstsq_columns<T: Scalar>(a: &Matrix<T>, b: &[T], cols: &[usize]) -> Option<Vec<T>> {
    let m = a.rows();
    let q = cols.len();
    if q == 0 {
        return Some(Vec::new());
    }
    if q > m {
        return None;
    }
    let mut r: Vec<Vec<T>> = cols.iter().map(|&j| a.column(j)).collect();
    let col_norms: Vec<T> = r.iter().map(|c| norm(c)).collect();
    let mut rhs = b.to_vec();
    let rank_tol = T::epsilon() * T::of(100.0) * T::of_usize(m).sqrt();

    for j in 0..q {
        let alpha_norm = norm(&r[j][j..]);
        if alpha_norm <= rank_tol * col_norms[j] || alpha_norm == T::zero() {
            return None;
        }
        let alpha = if r[j][j] > T::zero() { -alpha_norm } else { alpha_norm };
        let mut v: Vec<T> = r[j][j..].to_vec();
        v[0] -= alpha;
        let vv: T = v.iter().map(|&x| x * x).sum();
        if vv > T::zero() {
            let two = T::of(2.0);
            let reflect = |x: &mut [T]| {
                let s = two * v.iter().zip(x.iter()).map(|(&a, &b)| a * b).sum::<T>() / vv;
                for (xi, &vi) in x.iter_mut().zip(&v) {
                    *xi -= s * vi;
                }
            };
            for col in r.iter_mut().skip(j) {
                reflect(&mut col[j..]);
            }
            reflect(&mut rhs[j..]);
        }
    }

    let mut z = vec![T::zero(); q];
    for i in (0..q).rev() {
        let mut s = rhs[i];
        for k in (i + 1)..q {
            s -= r[k][i] * z[k];
        }
        z[i] = s / r[i][i];
    }
    Some(z)
}

/// Non-negative least squares by the Lawson–Hanson active-set method.
///
/// Each cycle moves the coordinate with the largest positive dual
/// `wⱼ = [Aᵀ(b − A x)]ⱼ` into the passive set, solves the unconstrained problem
/// on that set, and steps back toward feasibility whenever a passive
/// coordinate would turn non-positive. A candidate whose column is dependent
/// on the passive set, or whose solution coefficient is not positive, is
/// skipped for that cycle.
#[derive(Clone, Copy, Debug)]
pub struct NnlsSolver<T> {
    /// Cycle cap as a multiple of the column count.
    pub cycle_factor: usize,
    _scalar: PhantomData<T>,
}

impl<T> Default for NnlsSolver<T> {
    fn default() -> Self {
        Self {
            cycle_factor: 3,
            _scalar: PhantomData,
        }
    }
}

impl<T: Scalar> NnlsSolver<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&self, a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
        let (m, p) = (a.rows(), a.cols());
        if m == 0 || p == 0 {
            return Err(Error::Shape(format!("design matrix is {m}x{p}")));
        }
        if b.len() != m {
            return Err(Error::Shape(format!("target has {} entries, design has {m} rows", b.len())));
        }
        if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("design or target contains NaN or infinity".into()));
        }

        let dual_tol = T::epsilon() * T::of(10.0) * T::of_usize(m.max(p)) * a.frobenius_norm() * norm(b);
        let max_cycles = self.cycle_factor * p;
        let mut x = vec![T::zero(); p];
        let mut passive = vec![false; p];
        let mut cycles = 0;

        let dual = |x: &[T]| {
            let ax = a.mul_vec(x);
            let resid: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
            a.tr_mul_vec(&resid)
        };
        let passive_set = |passive: &[bool]| -> Vec<usize> { (0..p).filter(|&j| passive[j]).collect() };
        let scatter = |set: &[usize], z: &[T]| {
            let mut full = vec![T::zero(); p];
            for (&j, &v) in set.iter().zip(z) {
                full[j] = v;
            }
            full
        };

        let mut w = dual(&x);
        loop {
            let mut skipped = vec![false; p];
            let (t, z) = loop {
                let candidate = (0..p)
                    .filter(|&j| !passive[j] && !skipped[j] && w[j] > dual_tol)
                    .fold(None, |best: Option<usize>, j| match best {
                        Some(b) if w[b] >= w[j] => Some(b),
                        _ => Some(j),
                    });
                let Some(t) = candidate else {
                    return Ok(x);
                };
                let mut trial = passive.clone();
                trial[t] = true;
                let set = passive_set(&trial);
                match lstsq_columns(a, b, &set) {
                    Some(zs) => {
                        let z = scatter(&set, &zs);
                        if z[t] > T::zero() {
                            break (t, z);
                        }
                        skipped[t] = true;
                    }
                    None => skipped[t] = true,
                }
            };

            cycles += 1;
            if cycles > max_cycles {
                return Err(Error::Convergence {
                    cycles: max_cycles,
                    best: x.iter().map(|v| v.as_f64()).collect(),
                });
            }
            passive[t] = true;

            let mut z = z;
            loop {
                let set = passive_set(&passive);
                if set.iter().all(|&j| z[j] > T::zero()) {
                    x = z;
                    break;
                }
                let mut alpha = T::infinity();
                let mut hit = None;
                for &j in &set {
                    if z[j] <= T::zero() {
                        let step = x[j] / (x[j] - z[j]);
                        if step < alpha {
                            alpha = step;
                            hit = Some(j);
                        }
                    }
                }
                let alpha = alpha.min(T::one());
                for (xj, &zj) in x.iter_mut().zip(&z) {
                    *xj += alpha * (zj - *xj);
                }
                let zero_tol = T::epsilon() * T::of(10.0);
                for &j in &set {
                    if Some(j) == hit || x[j] <= zero_tol * (T::one() + z[j].abs()) {
                        passive[j] = false;
                        x[j] = T::zero();
                    }
                }
                let set = passive_set(&passive);
                z = match lstsq_columns(a, b, &set) {
                    Some(zs) => scatter(&set, &zs),
                    None => {
                        return Err(Error::Numeric("passive columns became dependent".into()));
                    }
                };
            }
            w = dual(&x);
        }
    }
}

/// Solves with the default cycle cap of `3 p`.
pub fn nnls<T: Scalar>(design: &Matrix<T>, target: &[T]) -> Result<Vec<T>> {
    NnlsSolver::default().solve(design, target)
}

/// Largest KKT violation scaled by `‖b‖`: for passive coordinates `|gⱼ|`, for
/// zero coordinates `max(0, −gⱼ)`, where `g = Aᵀ(A x − b)`.
pub fn kkt_violation<T: Scalar>(a: &Matrix<T>, b: &[T], x: &[T]) -> T {
    let ax = a.mul_vec(x);
    let r: Vec<T> = ax.iter().zip(b).map(|(&p, &t)| p - t).collect();
    let g = a.tr_mul_vec(&r);
    let scale = norm(b).max(T::min_positive_value());
    g.iter()
        .zip(x)
        .map(|(&gj, &xj)| if xj > T::zero() { gj.abs() } else { (-gj).max(T::zero()) })
        .fold(T::zero(), T::max)
        / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_clamps_negative() {
        let a = Matrix::<f64>::identity(2);
        assert_eq!(nnls(&a, &[3.0, -1.0]).unwrap(), vec![3.0, 0.0]);
    }

    #[test]
    fn single_column_mean() {
        let a = Matrix::from_rows(&[[1.0f64], [1.0]]).unwrap();
        let x = nnls(&a, &[1.0, 3.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn f32_solution() {
        let a = Matrix::from_rows(&[[1.0f32, 0.0], [0.0, 2.0], [1.0, 1.0]]).unwrap();
        let x = nnls(&a, &[1.0, 4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_input() {
        let a = Matrix::from_rows(&[[f64::NAN]]).unwrap();
        assert!(matches!(nnls(&a, &[1.0]), Err(Error::Numeric(_))));
        let a = Matrix::<f64>::identity(2);
        assert!(matches!(nnls(&a, &[1.0]), Err(Error::Shape(_))));
        let empty = Matrix::<f64>::zeros(0, 2);
        assert!(matches!(nnls(&empty, &[]), Err(Error::Shape(_))));
    }

    #[test]
    fn underdetermined_system() {
        let a = Matrix::from_rows(&[[1.0f64, 2.0, 0.5, 2.0]]).unwrap();
        let x = nnls(&a, &[100.0]).unwrap();
        let fit = a.mul_vec(&x)[0];
        assert!((fit - 100.0).abs() < 1e-9);
        assert!(x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn duplicate_columns() {
        let a = Matrix::from_rows(&[[1.0f64, 1.0, 0.0], [2.0, 2.0, 1.0], [3.0, 3.0, 0.0]]).unwrap();
        let b = [2.0, 5.0, 6.0];
        let x = nnls(&a, &b).unwrap();
        assert!(kkt_violation(&a, &b, &x) < 1e-8);
    }

    #[test]
    fn zero_target() {
        let a = Matrix::from_rows(&[[1.0f64, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(nnls(&a, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn kkt_holds(
            m in 1usize..12,
            p in 1usize..6,
            seed in prop::collection::vec(-10.0f64..10.0, 72),
            rhs in prop::collection::vec(-10.0f64..10.0, 12),
        ) {
            let a = Matrix::from_row_major(m, p, seed[..m * p].to_vec()).unwrap();
            let b = &rhs[..m];
            let x = nnls(&a, b).unwrap();
            prop_assert!(x.iter().all(|&v| v >= 0.0));
            prop_assert!(kkt_violation(&a, b, &x) <= 1e-8);
        }
    }
}
