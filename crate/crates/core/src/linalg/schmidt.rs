//! Biorthogonal (Schmidt) decomposition of bipartite pure states.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig_with;
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::vector::StateVector;
use crate::scalar::{Scalar, Tolerances};

/// `|ψ⟩ = Σᵢ cᵢ |uᵢ⟩|vᵢ⟩` with nonincreasing coefficients and orthonormal
/// vector families on each factor.
#[derive(Debug, Clone)]
pub struct SchmidtForm<T> {
    /// Nonincreasing, nonnegative; squares sum to 1.
    pub coefficients: Vec<T>,
    /// Orthonormal vectors in factor A.
    pub left_vectors: Vec<StateVector<T>>,
    /// Orthonormal vectors in factor B.
    pub right_vectors: Vec<StateVector<T>>,
}

impl<T: Scalar> SchmidtForm<T> {
    /// Rebuild the bipartite state `Σᵢ cᵢ |uᵢ⟩|vᵢ⟩`.
    pub fn reconstruct(&self) -> StateVector<T> {
        let dim_a = self.left_vectors[0].dim();
        let dim_b = self.right_vectors[0].dim();
        let mut amplitudes = vec![Complex::<T>::zero(); dim_a * dim_b];
        for ((coeff, u), v) in self
            .coefficients
            .iter()
            .zip(&self.left_vectors)
            .zip(&self.right_vectors)
        {
            for (i, a) in u.amplitudes().iter().enumerate() {
                for (j, b) in v.amplitudes().iter().enumerate() {
                    amplitudes[i * dim_b + j] = amplitudes[i * dim_b + j] + (a * b).scale(*coeff);
                }
            }
        }
        StateVector::from_parts(amplitudes)
    }

    /// Number of retained Schmidt terms.
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }
}

/// Schmidt decomposition with default tolerances.
pub fn schmidt_decompose<T: Scalar>(
    psi: &StateVector<T>,
    dim_a: usize,
    dim_b: usize,
) -> Result<SchmidtForm<T>> {
    schmidt_decompose_with(psi, dim_a, dim_b, &Tolerances::default())
}

/// Schmidt decomposition via the eigendecomposition of `M†M`, where `M` is
/// `psi` reshaped to `dim_a x dim_b`.
///
/// Output is deterministic: each pair is phase-fixed so the first significant
/// left amplitude is real positive, and degenerate coefficient groups are
/// ordered lexicographically by left-vector amplitudes.
pub fn schmidt_decompose_with<T: Scalar>(
    psi: &StateVector<T>,
    dim_a: usize,
    dim_b: usize,
    tol: &Tolerances<T>,
) -> Result<SchmidtForm<T>> {
    if psi.dim() != dim_a * dim_b {
        return Err(Error::BadFactorization {
            dim: psi.dim(),
            product: dim_a * dim_b,
        });
    }
    let m = ComplexMatrix::from_fn(dim_a, dim_b, |i, j| psi.amplitudes()[i * dim_b + j]);
    let gram = &m.adjoint() * &m;
    let eig = hermitian_eig_with(&gram, tol)?;

    let mut triples: Vec<(T, StateVector<T>, StateVector<T>)> = Vec::new();
    // Ascending eigenvalues; walk from the top so coefficients come out
    // nonincreasing.
    for idx in (0..dim_b).rev() {
        let lambda = eig.eigenvalues[idx];
        let coeff = if lambda > T::zero() {
            lambda.sqrt()
        } else {
            T::zero()
        };
        if coeff <= tol.schmidt_negligible {
            continue;
        }
        let v = eig.eigenvector(idx);
        let inv = T::one() / coeff;
        let mut u_amps = vec![Complex::<T>::zero(); dim_a];
        for (i, slot) in u_amps.iter_mut().enumerate() {
            let mut acc = Complex::zero();
            for j in 0..dim_b {
                acc = acc + m[(i, j)] * v[j];
            }
            *slot = acc.scale(inv);
        }
        let u = StateVector::from_parts(u_amps);
        // M = Σ σ u v† in matrix form, so the right Schmidt KET carries the
        // conjugate of the M†M eigenvector.
        let right = StateVector::from_parts(v.iter().map(|z| z.conj()).collect());
        let (u, right) = fix_pair_phase(u, right);
        triples.push((coeff, u, right));
    }

    sort_degenerate_groups(&mut triples, tol.schmidt_degeneracy);

    Ok(SchmidtForm {
        coefficients: triples.iter().map(|t| t.0).collect(),
        left_vectors: triples.iter().map(|t| t.1.clone()).collect(),
        right_vectors: triples.iter().map(|t| t.2.clone()).collect(),
    })
}

/// Rotate the pair so the first significant left amplitude is real positive;
/// the compensating phase goes on the right vector, leaving `c·u⊗v` fixed.
fn fix_pair_phase<T: Scalar>(
    u: StateVector<T>,
    v: StateVector<T>,
) -> (StateVector<T>, StateVector<T>) {
    let pivot = u.amplitudes().iter().find(|z| z.norm() > T::real(1e-8));
    match pivot {
        Some(z) => {
            let theta = z.im.atan2(z.re);
            (u.phased(-theta), v.phased(theta))
        }
        None => (u, v),
    }
}

/// Stable ordering inside groups of (near-)equal coefficients: lexicographic
/// on the left-vector amplitude tuples `(re, im)`.
fn sort_degenerate_groups<T: Scalar>(
    triples: &mut [(T, StateVector<T>, StateVector<T>)],
    degeneracy: T,
) {
    let mut start = 0;
    while start < triples.len() {
        let mut end = start + 1;
        while end < triples.len() && (triples[start].0 - triples[end].0).abs() <= degeneracy {
            end += 1;
        }
        triples[start..end].sort_by(|a, b| lex_cmp(&a.1, &b.1));
        start = end;
    }
}

fn lex_cmp<T: Scalar>(a: &StateVector<T>, b: &StateVector<T>) -> std::cmp::Ordering {
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        match x.re.partial_cmp(&y.re).expect("finite amplitudes") {
            std::cmp::Ordering::Equal => {}
            other => return other,
        }
        match x.im.partial_cmp(&y.im).expect("finite amplitudes") {
            std::cmp::Ordering::Equal => {}
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}
