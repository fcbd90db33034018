//! Small dense helpers for Hermitian matrices stored row-major.

use num_complex::Complex;

use crate::num::Real;

/// Eigenvalues of a Hermitian `dim × dim` matrix, ascending.
///
/// The complex matrix `A + iB` is embedded as the real symmetric matrix
/// `[[A, -B], [B, A]]`, whose spectrum is that of the original with every
/// eigenvalue doubled; cyclic Jacobi rotations then diagonalize it.
pub(crate) fn hermitian_eigenvalues<T: Real>(dim: usize, m: &[Complex<T>]) -> Vec<T> {
    assert_eq!(m.len(), dim * dim);
    let n = 2 * dim;
    let mut a = vec![T::zero(); n * n];
    for i in 0..dim {
        for j in 0..dim {
            let z = m[i * dim + j];
            // symmetrize so small Hermiticity defects do not stall the sweep
            let w = m[j * dim + i].conj();
            let re = (z.re + w.re) / T::of(2.0);
            let im = (z.im + w.im) / T::of(2.0);
            a[i * n + j] = re;
            a[(i + dim) * n + (j + dim)] = re;
            a[i * n + (j + dim)] = -im;
            a[(i + dim) * n + j] = im;
        }
    }
    jacobi_symmetric(n, &mut a);
    let mut eig: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    eig.into_iter().step_by(2).collect()
}

fn jacobi_symmetric<T: Real>(n: usize, a: &mut [T]) {
    let tol = T::epsilon() * T::of(0.5);
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let diag: T = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum();
        if off <= tol * tol * (diag + off) || off == T::zero() {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
}
