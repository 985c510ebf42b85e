//! Density operators: unit-trace positive-semidefinite Hermitian matrices.

use num_complex::Complex;
use num_traits::One;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::eig::hermitian_eig_with;
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::vector::StateVector;
use crate::scalar::{Scalar, Tolerances};

/// Quantum state: the credence function assigning Born probabilities to
/// events. Valid instances are Hermitian, unit-trace, and positive
/// semidefinite within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Scalar> DensityOperator<T> {
    /// Validate a matrix as a density operator with default tolerances.
    ///
    /// The positivity check runs a full eigendecomposition, so this is an
    /// O(dim³)-per-sweep operation; use [`DensityOperator::from_pure`] for
    /// large pure states, which are valid by construction.
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::new_with(matrix, &Tolerances::default())
    }

    pub fn new_with(matrix: ComplexMatrix<T>, tol: &Tolerances<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let herm = matrix.hermiticity_deviation();
        if herm > tol.hermiticity {
            return Err(Error::NotHermitian {
                deviation: herm.to_f64_lossy(),
            });
        }
        let trace = matrix.trace();
        let trace_dev = (trace - Complex::one()).norm();
        if trace_dev > tol.unit_trace {
            return Err(Error::NotUnitTrace {
                deviation: trace_dev.to_f64_lossy(),
            });
        }
        let eig = hermitian_eig_with(&matrix, tol)?;
        if let Some(&min) = eig.eigenvalues.first() {
            if min < -tol.psd_floor {
                return Err(Error::NotPositiveSemidefinite {
                    min_eigenvalue: min.to_f64_lossy(),
                });
            }
        }
        Ok(Self { matrix })
    }

    /// Construct from a normalized pure state; valid without spectral checks.
    pub fn from_pure(psi: &StateVector<T>) -> Self {
        Self {
            matrix: psi.outer(psi),
        }
    }

    /// Construct from a matrix known to be valid (cheap checks only).
    pub(crate) fn from_valid(matrix: ComplexMatrix<T>) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    /// The maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::real(dim as f64);
        Self {
            matrix: ComplexMatrix::identity(dim).scale_re(w),
        }
    }

    /// Convex mixture `Σ wᵢ ρᵢ` of states on a common space.
    pub fn mixture(components: &[(T, DensityOperator<T>)]) -> Result<Self> {
        let tol = Tolerances::<T>::default();
        let dim = match components.first() {
            Some((_, rho)) => rho.dim(),
            None => return Err(Error::EmptyKeepSet),
        };
        let mut total = T::zero();
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        for (w, rho) in components {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: rho.dim(),
                });
            }
            if *w < -tol.additivity {
                return Err(Error::NegativeProbability {
                    label: "mixture weight".into(),
                    value: w.to_f64_lossy(),
                });
            }
            total = total + *w;
            matrix = &matrix + &rho.matrix.scale_re(*w);
        }
        let dev = (total - T::one()).abs();
        if dev > tol.additivity {
            return Err(Error::WeightsNotNormalized {
                deviation: dev.to_f64_lossy(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    /// Ascending eigenvalues of the state.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        Ok(hermitian_eig_with(&self.matrix, &Tolerances::default())?.eigenvalues)
    }

    /// Purity `Tr(ρ²)`.
    pub fn purity(&self) -> T {
        (&self.matrix * &self.matrix).trace().re
    }
}

impl<T: Scalar + Serialize> Serialize for DensityOperator<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for DensityOperator<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let matrix = ComplexMatrix::<T>::deserialize(deserializer)?;
        DensityOperator::new(matrix).map_err(D::Error::custom)
    }
}
