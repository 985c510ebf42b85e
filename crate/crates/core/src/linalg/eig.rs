//! Hermitian eigendecomposition by cyclic Jacobi rotations.
//!
//! Deterministic and robust at the dimensions this crate targets (≤ 64, with
//! occasional larger Gram matrices). Not intended for large-scale work.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::scalar::{Scalar, Tolerances};

/// Eigendecomposition `H = V diag(λ) V†` with λ ascending and V unitary.
#[derive(Debug, Clone)]
pub struct HermitianEig<T> {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<T>,
    /// Orthonormal eigenvectors as matrix columns, ordered like the values.
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Scalar> HermitianEig<T> {
    /// Eigenvector for the i-th eigenvalue as a column slice copy.
    pub fn eigenvector(&self, i: usize) -> Vec<Complex<T>> {
        (0..self.eigenvectors.rows())
            .map(|r| self.eigenvectors[(r, i)])
            .collect()
    }
}

/// Eigendecomposition of a Hermitian matrix with default tolerances.
pub fn hermitian_eig<T: Scalar>(h: &ComplexMatrix<T>) -> Result<HermitianEig<T>> {
    hermitian_eig_with(h, &Tolerances::default())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Cyclic sweeps over all off-diagonal pivots; converges when the largest
/// off-diagonal magnitude drops below `jacobi_off_diagonal` relative to the
/// input scale, and fails after `jacobi_max_sweeps` sweeps.
pub fn hermitian_eig_with<T: Scalar>(
    h: &ComplexMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<HermitianEig<T>> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let dev = h.hermiticity_deviation();
    if dev > tol.hermiticity {
        return Err(Error::NotHermitian {
            deviation: dev.to_f64_lossy(),
        });
    }
    let n = h.rows();
    if n == 0 {
        return Ok(HermitianEig {
            eigenvalues: vec![],
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }

    let mut a = h.clone();
    let mut v = ComplexMatrix::<T>::identity(n);
    let scale = h.max_abs();
    let threshold = tol.jacobi_off_diagonal * if scale > T::one() { scale } else { T::one() };

    let mut converged = scale.is_zero();
    for _ in 0..tol.jacobi_max_sweeps {
        if off_diagonal_max(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q, threshold);
            }
        }
    }
    if !converged && off_diagonal_max(&a) > threshold {
        return Err(Error::EigNoConvergence {
            sweeps: tol.jacobi_max_sweeps,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));

    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_max<T: Scalar>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut max = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = a[(i, j)].norm();
            if m > max {
                max = m;
            }
        }
    }
    max
}

/// Zero the (p, q) entry of `a` with a unitary plane rotation, accumulating
/// the rotation into `v`.
fn rotate<T: Scalar>(
    a: &mut ComplexMatrix<T>,
    v: &mut ComplexMatrix<T>,
    p: usize,
    q: usize,
    threshold: T,
) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= threshold {
        return;
    }
    let phase = apq / Complex::new(mag, T::zero());
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let two = T::one() + T::one();
    let tau = (aqq - app) / (two * mag);
    let t = if tau.is_zero() {
        T::one()
    } else {
        let sign = if tau < T::zero() { -T::one() } else { T::one() };
        sign / (tau.abs() + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    // Columns p, q of the rotation in the (p, q) plane:
    //   U[p,p] = c          U[p,q] = s·phase
    //   U[q,p] = -s·conj(phase)   U[q,q] = c
    let cc = Complex::new(c, T::zero());
    let sp = phase.scale(s);
    let n = a.rows();

    // A <- U† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk.scale(c) - sp * aqk;
        a[(q, k)] = sp.conj() * apk + aqk.scale(c);
    }
    // A <- A U
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp.scale(c) - sp.conj() * akq;
        a[(k, q)] = sp * akp + akq.scale(c);
    }
    // V <- V U
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * cc - sp.conj() * vkq;
        v[(k, q)] = sp * vkp + vkq * cc;
    }

    // Clean up rounding residue on entries the rotation annihilates.
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
}

/// `V diag(λ) V†` for checks and reconstructions.
pub fn reconstruct<T: Scalar>(eig: &HermitianEig<T>) -> ComplexMatrix<T> {
    let v = &eig.eigenvectors;
    let n = v.rows();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)].scale(eig.eigenvalues[j]));
    &scaled * &v.adjoint()
}
