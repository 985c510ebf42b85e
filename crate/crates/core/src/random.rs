//! Seeded, stream-separated random objects for tests, sampling, and demos.
//!
//! All randomness flows through `ChaCha8` with explicit `(seed, stream)`
//! addressing, so results are reproducible regardless of evaluation order or
//! parallel scheduling.

use num_complex::Complex;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::event_space::{Projector, Pvm};
use crate::linalg::{ComplexMatrix, DensityOperator, StateVector};
use crate::scalar::Scalar;

/// RNG addressed by `(seed, stream)`; distinct streams are independent.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `[0, 1)` from the top 53 bits of one `u64`.
pub fn unit_uniform<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    T::real((rng.next_u64() >> 11) as f64 * SCALE)
}

/// Standard normal draw (Box–Muller on two uniform draws).
pub fn standard_normal<T: Scalar>(rng: &mut ChaCha8Rng) -> T {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = (((rng.next_u64() >> 11) as f64) + 0.5) * SCALE;
    let u2 = ((rng.next_u64() >> 11) as f64) * SCALE;
    let r = (-2.0 * u1.ln()).sqrt();
    T::real(r * (2.0 * std::f64::consts::PI * u2).cos())
}

fn complex_normal<T: Scalar>(rng: &mut ChaCha8Rng) -> Complex<T> {
    Complex::new(standard_normal(rng), standard_normal(rng))
}

/// Haar-ish random pure state: normalized complex Gaussian amplitudes.
pub fn random_state_vector<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> StateVector<T> {
    loop {
        let amps: Vec<Complex<T>> = (0..dim).map(|_| complex_normal(rng)).collect();
        if let Ok(v) = StateVector::normalized(amps) {
            return v;
        }
    }
}

/// Full-rank random density operator `GG†/Tr(GG†)`.
pub fn random_density_operator<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> DensityOperator<T> {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let gg = &g * &g.adjoint();
    let trace = gg.trace().re;
    DensityOperator::new(gg.scale_re(T::one() / trace)).expect("Gram construction is PSD")
}

/// Random Hermitian matrix `(A + A†)/2` with Gaussian entries.
pub fn random_hermitian<T: Scalar>(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix<T> {
    let a = ComplexMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    (&a + &a.adjoint()).scale_re(T::real(0.5))
}

/// Random orthonormal basis by Gram–Schmidt on Gaussian vectors.
pub fn random_orthonormal_basis<T: Scalar>(
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<StateVector<T>> {
    let mut basis: Vec<StateVector<T>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let candidate = random_state_vector::<T>(dim, rng);
        let mut amps: Vec<Complex<T>> = candidate.amplitudes().to_vec();
        for b in &basis {
            let overlap = b.inner(&candidate);
            for (a, e) in amps.iter_mut().zip(b.amplitudes()) {
                *a = *a - overlap * e;
            }
        }
        if let Ok(v) = StateVector::normalized(amps) {
            basis.push(v);
        }
    }
    basis
}

/// Random rank-1 PVM from a random orthonormal basis.
pub fn random_pvm<T: Scalar>(
    dim: usize,
    label: impl Into<String>,
    rng: &mut ChaCha8Rng,
) -> Result<Pvm<T>> {
    let basis = random_orthonormal_basis::<T>(dim, rng);
    let elements: Vec<Projector<T>> = basis.iter().map(Projector::from_state).collect();
    let labels = (0..dim).map(|i| i.to_string()).collect();
    Pvm::new(label, elements, labels)
}

/// Sample an outcome index from a probability distribution.
pub fn sample_outcome<T: Scalar>(probs: &[T], rng: &mut ChaCha8Rng) -> usize {
    let u: T = unit_uniform(rng);
    let mut acc = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        acc = acc + p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
