//! Unit-norm state vectors.

use num_complex::Complex;
use num_traits::Zero;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, MAX_TENSOR_DIM};
use crate::scalar::{Scalar, Tolerances};

/// Normalized pure state (atomic event) on a finite-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Scalar> StateVector<T> {
    /// Build from amplitudes that must already be normalized.
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        Self::new_with(amplitudes, &Tolerances::default())
    }

    pub fn new_with(amplitudes: Vec<Complex<T>>, tol: &Tolerances<T>) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm = norm_of(&amplitudes);
        let dev = (norm - T::one()).abs();
        if dev > tol.unit_norm {
            return Err(Error::NotNormalized {
                deviation: dev.to_f64_lossy(),
            });
        }
        Ok(Self { amplitudes })
    }

    /// Normalize arbitrary amplitudes; fails on a vector of negligible norm.
    pub fn normalized(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let norm = norm_of(&amplitudes);
        if norm <= T::real(1e-14) {
            return Err(Error::ZeroNorm {
                norm: norm.to_f64_lossy(),
            });
        }
        let inv = T::one() / norm;
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z.scale(inv)).collect(),
        })
    }

    pub(crate) fn from_parts(amplitudes: Vec<Complex<T>>) -> Self {
        Self { amplitudes }
    }

    /// Computational basis ket `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut amplitudes = vec![Complex::zero(); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(Self { amplitudes })
    }

    /// Normalized vector with the given real amplitudes.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(
            amplitudes
                .iter()
                .map(|&x| Complex::new(T::real(x), T::zero()))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        norm_of(&self.amplitudes)
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!(
            self.dim(),
            other.dim(),
            "dimension mismatch in inner product"
        );
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`, clamped to 1 against rounding.
    pub fn overlap_squared(&self, other: &Self) -> T {
        let v = self.inner(other).norm_sqr();
        if v > T::one() {
            T::one()
        } else {
            v
        }
    }

    /// Outer product `|self⟩⟨other|`.
    pub fn outer(&self, other: &Self) -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(self.dim(), other.dim(), |i, j| {
            self.amplitudes[i] * other.amplitudes[j].conj()
        })
    }

    /// Tensor product `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dim = self.dim().saturating_mul(other.dim());
        if dim > MAX_TENSOR_DIM {
            return Err(Error::DimensionOverflow {
                dim,
                max: MAX_TENSOR_DIM,
            });
        }
        let mut amplitudes = Vec::with_capacity(dim);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(Self { amplitudes })
    }

    /// Multiply by a global phase `e^{iθ}`.
    pub(crate) fn phased(&self, theta: T) -> Self {
        let phase = Complex::from_polar(T::one(), theta);
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z * phase).collect(),
        }
    }

    /// Apply a square matrix and renormalize; fails when the image is null.
    pub fn apply(&self, m: &ComplexMatrix<T>) -> Result<Self> {
        assert_eq!(m.cols(), self.dim(), "dimension mismatch in apply");
        let mut out = vec![Complex::zero(); m.rows()];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex::zero();
            for j in 0..m.cols() {
                acc = acc + m[(i, j)] * self.amplitudes[j];
            }
            *slot = acc;
        }
        Self::normalized(out)
    }
}

fn norm_of<T: Scalar>(amplitudes: &[Complex<T>]) -> T {
    amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

impl<T: Scalar + Serialize> Serialize for StateVector<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // Column-vector matrix JSON keeps one interchange format everywhere.
        let column = ComplexMatrix::from_fn(self.dim(), 1, |i, _| self.amplitudes[i]);
        column.serialize(serializer)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for StateVector<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let column = ComplexMatrix::<T>::deserialize(deserializer)?;
        if column.cols() != 1 {
            return Err(D::Error::custom("state vector JSON must have cols = 1"));
        }
        StateVector::new(column.entries().to_vec()).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn rejects_unnormalized() {
        let err = StateVector::new(vec![c::<f64>(1.0, 0.0), c(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn basis_kets_are_orthonormal() {
        let e0 = StateVector::<f64>::basis(3, 0).unwrap();
        let e1 = StateVector::<f64>::basis(3, 1).unwrap();
        assert_eq!(e0.inner(&e0), c(1.0, 0.0));
        assert_eq!(e0.inner(&e1), c(0.0, 0.0));
    }

    #[test]
    fn basis_ket_tensor_product() {
        let zero = StateVector::<f64>::basis(2, 0).unwrap();
        let one = StateVector::<f64>::basis(2, 1).unwrap();
        let product = zero.tensor(&one).unwrap();
        assert_eq!(
            product.amplitudes(),
            StateVector::<f64>::basis(4, 1).unwrap().amplitudes()
        );
    }

    #[test]
    fn normalization_rescales() {
        let v = StateVector::<f64>::normalized(vec![c(3.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!((v.amplitudes()[0].re - 0.6).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_cannot_normalize() {
        let err = StateVector::<f64>::normalized(vec![c(0.0, 0.0); 2]).unwrap_err();
        assert!(matches!(err, Error::ZeroNorm { .. }));
    }
}
