//! Dense complex linear algebra kernel: tensor products, partial traces,
//! Hermitian eigendecomposition, Schmidt forms, and distance measures.
//!
//! Designed for dimensions ≲ 64 (with tensor constructions up to
//! [`MAX_TENSOR_DIM`]); everything is a pure function over immutable values.

mod density;
mod eig;
mod matrix;
mod schmidt;
mod vector;

pub use density::DensityOperator;
pub use eig::{hermitian_eig, hermitian_eig_with, reconstruct, HermitianEig};
pub use matrix::{ComplexMatrix, MAX_TENSOR_DIM};
pub use schmidt::{schmidt_decompose, schmidt_decompose_with, SchmidtForm};
pub use vector::StateVector;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Kronecker product of two matrices.
pub fn tensor_product<T: Scalar>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    a.kron(b)
}

/// Trace out every factor not listed in `keep`, returning the reduced state
/// on the kept factors (in their original order).
///
/// `dims` lists the factor dimensions, most significant first, and must
/// multiply to the state dimension.
pub fn partial_trace<T: Scalar>(
    rho: &DensityOperator<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<DensityOperator<T>> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::BadFactorization {
            dim: rho.dim(),
            product: total,
        });
    }
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &k in &keep {
        if k >= dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index: k,
                count: dims.len(),
            });
        }
    }

    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();

    // Per-index keys: flat index within the kept factors and within the
    // traced factors. Entries contribute when their traced keys coincide.
    let mut keep_key = vec![0usize; total];
    let mut trace_key = vec![0usize; total];
    for (idx, (kk, tk)) in keep_key.iter_mut().zip(trace_key.iter_mut()).enumerate() {
        let mut rest = idx;
        let mut kept = 0usize;
        let mut traced = 0usize;
        for (f, &d) in dims.iter().enumerate() {
            let stride: usize = dims[f + 1..].iter().product();
            let digit = rest / stride;
            rest %= stride;
            if keep.binary_search(&f).is_ok() {
                kept = kept * d + digit;
            } else {
                traced = traced * d + digit;
            }
        }
        *kk = kept;
        *tk = traced;
    }

    let m = rho.matrix();
    let mut out = vec![Complex::<T>::zero(); out_dim * out_dim];
    for i in 0..total {
        for j in 0..total {
            if trace_key[i] == trace_key[j] {
                let slot = keep_key[i] * out_dim + keep_key[j];
                out[slot] = out[slot] + m[(i, j)];
            }
        }
    }
    // Trace-preserving positive map of a valid state; spectral revalidation
    // is unnecessary (and prohibitive at large input dimensions).
    Ok(DensityOperator::from_valid(ComplexMatrix::new(
        out_dim, out_dim, out,
    )?))
}

/// Trace distance `½·Σ|eig(ρ − σ)|`, in `[0, 1]`.
pub fn trace_distance<T: Scalar>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let diff = rho.matrix() - sigma.matrix();
    let eig = hermitian_eig(&diff)?;
    let half = T::real(0.5);
    let sum: T = eig.eigenvalues.iter().map(|l| l.abs()).sum();
    let d = half * sum;
    Ok(if d > T::one() { T::one() } else { d })
}

/// Uhlmann fidelity `F(ρ, σ) = (Tr √(√ρ σ √ρ))²`, in `[0, 1]`.
pub fn fidelity<T: Scalar>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let eig = hermitian_eig(rho.matrix())?;
    let n = rho.dim();
    let v = &eig.eigenvectors;
    let sqrt_rho = {
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| {
            let l = eig.eigenvalues[j];
            let r = if l > T::zero() { l.sqrt() } else { T::zero() };
            v[(i, j)].scale(r)
        });
        &scaled * &v.adjoint()
    };
    let inner = &(&sqrt_rho * sigma.matrix()) * &sqrt_rho;
    // Symmetrize away rounding before the spectral call.
    let sym = (&inner + &inner.adjoint()).scale_re(T::real(0.5));
    let inner_eig = hermitian_eig(&sym)?;
    let root_sum: T = inner_eig
        .eigenvalues
        .iter()
        .map(|&l| if l > T::zero() { l.sqrt() } else { T::zero() })
        .sum();
    let f = root_sum * root_sum;
    Ok(if f > T::one() { T::one() } else { f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn pure(amps: &[f64]) -> DensityOperator<f64> {
        DensityOperator::from_pure(&StateVector::from_real(amps).unwrap())
    }

    #[test]
    fn partial_trace_of_product_state_factors() {
        // ρ_A ⊗ ρ_B with ρ_A a pure qutrit state, ρ_B maximally mixed.
        let a = pure(&[1.0, 2.0, -1.0]);
        let b = DensityOperator::<f64>::maximally_mixed(2);
        let joint = DensityOperator::from_valid(tensor_product(a.matrix(), b.matrix()).unwrap());
        let reduced = partial_trace(&joint, &[3, 2], &[0]).unwrap();
        assert!(reduced.matrix().max_abs_diff(a.matrix()) < 1e-12);
        let reduced_b = partial_trace(&joint, &[3, 2], &[1]).unwrap();
        assert!(reduced_b.matrix().max_abs_diff(b.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let psi = StateVector::<f64>::from_real(&[0.5, -0.25, 0.75, 0.1, 0.0, 0.33]).unwrap();
        let rho = DensityOperator::from_pure(&psi);
        let reduced = partial_trace(&rho, &[3, 2], &[1]).unwrap();
        assert!((reduced.matrix().trace() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_dimension_checks() {
        let rho = DensityOperator::<f64>::maximally_mixed(6);
        assert!(matches!(
            partial_trace(&rho, &[4, 2], &[0]).unwrap_err(),
            Error::BadFactorization { .. }
        ));
        assert!(matches!(
            partial_trace(&rho, &[3, 2], &[]).unwrap_err(),
            Error::EmptyKeepSet
        ));
        assert!(matches!(
            partial_trace(&rho, &[3, 2], &[2]).unwrap_err(),
            Error::SubsystemOutOfRange { .. }
        ));
    }

    #[test]
    fn trace_distance_extremes() {
        let zero = pure(&[1.0, 0.0]);
        let one = pure(&[0.0, 1.0]);
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_plus_vs_mixed() {
        // Eigenvalues of the difference are ±1/2, so the distance is 1/2.
        let plus = pure(&[1.0, 1.0]);
        let mixed = DensityOperator::<f64>::maximally_mixed(2);
        assert!((trace_distance(&plus, &mixed).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_agrees_with_pure_overlap() {
        let a = pure(&[1.0, 0.0]);
        let b = pure(&[1.0, 1.0]);
        assert!((fidelity(&a, &b).unwrap() - 0.5).abs() < 1e-10);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn three_factor_partial_trace() {
        // |0⟩⊗|+⟩⊗|1⟩: tracing out the ends leaves |+⟩⟨+|.
        let zero = StateVector::<f64>::basis(2, 0).unwrap();
        let plus = StateVector::<f64>::from_real(&[1.0, 1.0]).unwrap();
        let one = StateVector::<f64>::basis(2, 1).unwrap();
        let psi = zero.tensor(&plus).unwrap().tensor(&one).unwrap();
        let rho = DensityOperator::from_pure(&psi);
        let mid = partial_trace(&rho, &[2, 2, 2], &[1]).unwrap();
        assert!(
            mid.matrix()
                .max_abs_diff(DensityOperator::from_pure(&plus).matrix())
                < 1e-12
        );
    }
}
