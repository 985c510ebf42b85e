//! Scalar abstraction and the centralized tolerance record.
//!
//! All numerical code in this crate is generic over the real scalar type
//! through [`Scalar`]; `f64` is the working precision and `f32` is supported
//! with proportionally looser default tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar underlying all matrices, vectors, and probabilities.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Convert an `f64` constant into this scalar type.
    fn real(value: f64) -> Self;

    /// `f64` view of this value, for formatting and cross-type checks.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn real(value: f64) -> Self {
        value
    }
}

impl Scalar for f32 {
    fn real(value: f64) -> Self {
        value as f32
    }
}

/// Complex number over the given scalar.
pub fn c<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::real(re), T::real(im))
}

/// Real complex number over the given scalar.
pub fn cr<T: Scalar>(re: f64) -> Complex<T> {
    Complex::new(T::real(re), T::zero())
}

/// Tolerance configuration shared by every validating constructor and check.
///
/// Defaults are stated at `f64` working precision; `Tolerances::<f64>::default()`
/// reproduces the documented constants exactly. For other scalars the
/// acceptance windows scale with the machine-epsilon ratio, while detection
/// thresholds (rank rounding, Gram independence, support cutoffs, additivity
/// and marginal agreement) scale with its square root so they stay between
/// the scalar's numerical noise and the O(1) structure they discriminate.
#[derive(Debug, Clone)]
pub struct Tolerances<T> {
    /// Max-entry deviation from `M = M†` accepted as Hermitian.
    pub hermiticity: T,
    /// Deviation of a density-operator trace from 1.
    pub unit_trace: T,
    /// Eigenvalues of a density operator must be `>= -psd_floor`.
    pub psd_floor: T,
    /// Deviation of a state-vector norm from 1.
    pub unit_norm: T,
    /// Max-entry deviation from `P² = P` accepted as idempotent.
    pub idempotency: T,
    /// Distance of a projector trace from the nearest integer rank.
    pub rank_round: T,
    /// Max-entry bound on `PᵢPⱼ` for distinct PVM elements.
    pub pvm_orthogonality: T,
    /// Max-entry bound on `ΣPᵢ − I` for a PVM.
    pub pvm_completeness: T,
    /// Max-entry distance for PVM element membership tests.
    pub pvm_membership: T,
    /// Raw Born values must lie in `[-band, 1 + band]` before clamping.
    pub probability_band: T,
    /// Allowed deviation of PVM probabilities from summing to 1.
    pub additivity: T,
    /// Max pairwise spread of a shared event's probability across contexts.
    pub context_agreement: T,
    /// Smallest Gram-matrix eigenvalue accepted as linearly independent.
    pub gram_independence: T,
    /// Events with probability below this cannot be conditioned on.
    pub zero_probability: T,
    /// Default eigenvalue cutoff for support projectors.
    pub support_cutoff: T,
    /// Off-diagonal convergence threshold of the Jacobi eigensolver,
    /// relative to the input's max-entry scale.
    pub jacobi_off_diagonal: T,
    /// Sweep cap for the Jacobi eigensolver.
    pub jacobi_max_sweeps: usize,
    /// Schmidt coefficients below this are dropped as numerically zero.
    pub schmidt_negligible: T,
    /// Schmidt coefficients closer than this are treated as degenerate.
    pub schmidt_degeneracy: T,
    /// Allowed deviation when an ensemble must mix back to its prior state.
    pub refinement: T,
    /// Frobenius distance moved by the PSD projection beyond which a
    /// tomographic reconstruction is flagged infeasible.
    pub reconstruction_infeasibility: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        let scale = T::epsilon().to_f64_lossy() / f64::EPSILON;
        let window = |x: f64| T::real(x * scale);
        let detect = |x: f64| T::real(x * scale.sqrt());
        Self {
            hermiticity: window(1e-12),
            unit_trace: window(1e-12),
            psd_floor: window(1e-10),
            unit_norm: window(1e-12),
            idempotency: window(1e-10),
            rank_round: detect(1e-8),
            pvm_orthogonality: detect(1e-10),
            pvm_completeness: detect(1e-10),
            pvm_membership: detect(1e-10),
            probability_band: detect(1e-10),
            additivity: detect(1e-9),
            context_agreement: detect(1e-10),
            gram_independence: detect(1e-8),
            zero_probability: window(1e-12),
            support_cutoff: detect(1e-8),
            jacobi_off_diagonal: window(1e-12),
            jacobi_max_sweeps: 100,
            schmidt_negligible: window(1e-12),
            schmidt_degeneracy: window(1e-10),
            refinement: detect(1e-9),
            reconstruction_infeasibility: T::real(0.5),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_defaults_are_unscaled() {
        let tol = Tolerances::<f64>::default();
        assert_eq!(tol.hermiticity, 1e-12);
        assert_eq!(tol.psd_floor, 1e-10);
        assert_eq!(tol.additivity, 1e-9);
        assert_eq!(tol.jacobi_max_sweeps, 100);
    }

    #[test]
    fn f32_defaults_loosen_with_epsilon() {
        let tol = Tolerances::<f32>::default();
        assert!(tol.hermiticity > 1e-12);
        assert!(tol.hermiticity < 1e-2);
    }
}
