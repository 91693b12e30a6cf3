//! Cyclic Jacobi eigendecomposition for small dense symmetric matrices.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen<T, const N: usize> {
    /// Eigenvalues, descending. Equal values keep their diagonal order.
    pub values: [T; N],
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: [[T; N]; N],
    pub sweeps: usize,
    pub converged: bool,
}

/// Diagonalizes the symmetric matrix `a` by cyclic Jacobi rotations.
///
/// Stops once the off-diagonal Frobenius norm falls below `tol` times the
/// full Frobenius norm (floored at the type's epsilon), or after
/// `max_sweeps` sweeps.
pub fn jacobi_eigen<T: Scalar, const N: usize>(
    mut a: [[T; N]; N],
    tol: T,
    max_sweeps: usize,
) -> SymmetricEigen<T, N> {
    let mut v = [[T::zero(); N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }

    let tol = tol.max(T::epsilon());
    let frob = a.iter().flatten().fold(T::zero(), |s, &x| s + x * x).sqrt();
    let off = |a: &[[T; N]; N]| {
        let mut s = T::zero();
        for p in 0..N {
            for q in p + 1..N {
                s = s + a[p][q] * a[p][q];
            }
        }
        (s + s).sqrt()
    };

    let mut sweeps = 0;
    let mut converged = frob == T::zero() || off(&a) <= tol * frob;
    while !converged && sweeps < max_sweeps {
        sweeps += 1;
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[p][q];
                if apq == T::zero() {
                    continue;
                }
                let two = T::one() + T::one();
                let theta = (a[q][q] - a[p][p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = T::zero();
                a[q][p] = T::zero();

                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off(&a) <= tol * frob;
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    // stable: ties keep ascending original index
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap_or(std::cmp::Ordering::Equal));

    SymmetricEigen {
        values: order.map(|i| a[i][i]),
        vectors: order.map(|i| std::array::from_fn(|k| v[k][i])),
        sweeps,
        converged,
    }
}
