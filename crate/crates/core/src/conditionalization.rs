//! Lüders updating, no-signaling verification, remote steering, and the
//! worked 3⊗2 steering example.
//!
//! Conditioning on an event at one wing of an entangled pair refines the
//! remote state (the steered ensemble mixes back to the unchanged reduced
//! state), while conditioning locally can escape the prior state's support —
//! the two behaviors this module makes checkable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::event_space::{born_probability_with, Projector, Pvm};
use crate::linalg::{
    partial_trace, schmidt_decompose_with, tensor_product, ComplexMatrix, DensityOperator,
    StateVector,
};
use crate::scalar::{Scalar, Tolerances};

/// Minimal-revision update `ρ → PρP / Tr(ρP)` on learning the event `P`.
///
/// Returns the posterior and the prior probability of the event. Fails when
/// the event's probability is below the zero threshold.
pub fn luders_update<T: Scalar>(
    rho: &DensityOperator<T>,
    p: &Projector<T>,
) -> Result<(DensityOperator<T>, T)> {
    luders_update_with(rho, p, &Tolerances::default())
}

pub fn luders_update_with<T: Scalar>(
    rho: &DensityOperator<T>,
    p: &Projector<T>,
    tol: &Tolerances<T>,
) -> Result<(DensityOperator<T>, T)> {
    let probability = born_probability_with(rho, p, tol)?;
    if probability <= tol.zero_probability {
        return Err(Error::ZeroProbabilityEvent {
            probability: probability.to_f64_lossy(),
        });
    }
    let sandwiched = &(p.matrix() * rho.matrix()) * p.matrix();
    let normalized = sandwiched.scale_re(T::one() / probability);
    let symmetrized = (&normalized + &normalized.adjoint()).scale_re(T::real(0.5));
    let posterior = DensityOperator::new_with(symmetrized, tol)?;
    Ok((posterior, probability))
}

/// Projector onto the eigenspaces of `rho` with eigenvalue above `cutoff`.
pub fn support_projector<T: Scalar>(rho: &DensityOperator<T>, cutoff: T) -> Result<Projector<T>> {
    let tol = Tolerances::default();
    let eig = crate::linalg::hermitian_eig_with(rho.matrix(), &tol)?;
    let dim = rho.dim();
    let mut matrix = ComplexMatrix::zeros(dim, dim);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            let v = StateVector::from_parts(eig.eigenvector(i));
            matrix = &matrix + &v.outer(&v);
        }
    }
    let matrix = (&matrix + &matrix.adjoint()).scale_re(T::real(0.5));
    Projector::new_with(matrix, &tol)
}

/// Ensemble at a remote system selected by conditioning on local outcomes:
/// weights are outcome probabilities and states the steered remote states.
#[derive(Debug, Clone, Serialize)]
pub struct SteeredEnsemble<T: Scalar + Serialize> {
    pub weights: Vec<T>,
    pub states: Vec<DensityOperator<T>>,
}

impl<T: Scalar + Serialize> SteeredEnsemble<T> {
    /// The mixture `Σ wᵢ ρᵢ`, which must reproduce the prior remote state.
    pub fn mixture(&self) -> Result<DensityOperator<T>> {
        let components: Vec<(T, DensityOperator<T>)> = self
            .weights
            .iter()
            .copied()
            .zip(self.states.iter().cloned())
            .collect();
        DensityOperator::mixture(&components)
    }
}

/// Condition a bipartite pure state on each outcome of a PVM on factor A and
/// collect the steered remote ensemble on factor B.
///
/// Outcomes with probability below the zero threshold select no remote state
/// and are omitted; the remaining weights still sum to 1.
pub fn remote_steering<T: Scalar + Serialize>(
    psi: &StateVector<T>,
    dim_a: usize,
    dim_b: usize,
    pvm_on_a: &Pvm<T>,
) -> Result<SteeredEnsemble<T>> {
    remote_steering_with(psi, dim_a, dim_b, pvm_on_a, &Tolerances::default())
}

pub fn remote_steering_with<T: Scalar + Serialize>(
    psi: &StateVector<T>,
    dim_a: usize,
    dim_b: usize,
    pvm_on_a: &Pvm<T>,
    tol: &Tolerances<T>,
) -> Result<SteeredEnsemble<T>> {
    if psi.dim() != dim_a * dim_b {
        return Err(Error::BadFactorization {
            dim: psi.dim(),
            product: dim_a * dim_b,
        });
    }
    if pvm_on_a.dim() != dim_a {
        return Err(Error::DimensionMismatch {
            left: pvm_on_a.dim(),
            right: dim_a,
        });
    }
    let rho = DensityOperator::from_pure(psi);
    let identity_b = ComplexMatrix::identity(dim_b);
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for element in pvm_on_a.elements() {
        let embedded_matrix = tensor_product(element.matrix(), &identity_b)?;
        let embedded = Projector::from_valid(embedded_matrix, element.rank() * dim_b);
        let probability = born_probability_with(&rho, &embedded, tol)?;
        if probability <= tol.zero_probability {
            continue;
        }
        let (posterior, _) = luders_update_with(&rho, &embedded, tol)?;
        let remote = partial_trace(&posterior, &[dim_a, dim_b], &[1])?;
        weights.push(probability);
        states.push(remote);
    }
    Ok(SteeredEnsemble { weights, states })
}

/// Largest deviation between the A-marginalized joint distribution and the
/// unconditional B distribution.
pub fn max_marginal_deviation<T: Scalar>(joint: &[Vec<T>], baseline: &[T]) -> T {
    let mut max = T::zero();
    for (b, &base) in baseline.iter().enumerate() {
        let marginal: T = joint.iter().map(|row| row[b]).sum();
        let dev = (marginal - base).abs();
        if dev > max {
            max = dev;
        }
    }
    max
}

/// Marginal statistics of one A-context against the unconditional B
/// distribution.
#[derive(Debug, Clone, Serialize)]
pub struct ContextMarginal<T> {
    pub context: String,
    /// `p(a, b)` indexed by A-outcome then B-outcome.
    pub joint: Vec<Vec<T>>,
    /// `Σ_a p(a, b)` per B-outcome.
    pub marginal_b: Vec<T>,
    pub max_deviation: T,
}

/// Outcome of a no-signaling check across A-contexts.
#[derive(Debug, Clone, Serialize)]
pub struct NoSignalingReport<T> {
    /// Unconditional B-outcome distribution from the reduced state.
    pub baseline_b: Vec<T>,
    pub contexts: Vec<ContextMarginal<T>>,
    pub max_deviation: T,
    pub pass: bool,
}

/// Verify that the B-outcome marginal is independent of which A-context is
/// measured: every context's marginal must match the reduced-state
/// distribution within the refinement tolerance.
pub fn no_signaling_check<T: Scalar>(
    psi: &StateVector<T>,
    dim_a: usize,
    dim_b: usize,
    pvms_on_a: &[Pvm<T>],
    pvm_on_b: &Pvm<T>,
) -> Result<NoSignalingReport<T>> {
    no_signaling_check_with(
        psi,
        dim_a,
        dim_b,
        pvms_on_a,
        pvm_on_b,
        &Tolerances::default(),
    )
}

pub fn no_signaling_check_with<T: Scalar>(
    psi: &StateVector<T>,
    dim_a: usize,
    dim_b: usize,
    pvms_on_a: &[Pvm<T>],
    pvm_on_b: &Pvm<T>,
    tol: &Tolerances<T>,
) -> Result<NoSignalingReport<T>> {
    if psi.dim() != dim_a * dim_b {
        return Err(Error::BadFactorization {
            dim: psi.dim(),
            product: dim_a * dim_b,
        });
    }
    if pvm_on_b.dim() != dim_b {
        return Err(Error::DimensionMismatch {
            left: pvm_on_b.dim(),
            right: dim_b,
        });
    }
    let rho = DensityOperator::from_pure(psi);
    let rho_b = partial_trace(&rho, &[dim_a, dim_b], &[1])?;
    let mut baseline_b = Vec::with_capacity(pvm_on_b.len());
    for q in pvm_on_b.elements() {
        baseline_b.push(born_probability_with(&rho_b, q, tol)?);
    }

    let mut contexts = Vec::with_capacity(pvms_on_a.len());
    let mut max_deviation = T::zero();
    for pvm_a in pvms_on_a {
        if pvm_a.dim() != dim_a {
            return Err(Error::DimensionMismatch {
                left: pvm_a.dim(),
                right: dim_a,
            });
        }
        let mut joint = Vec::with_capacity(pvm_a.len());
        for p in pvm_a.elements() {
            let mut row = Vec::with_capacity(pvm_on_b.len());
            for q in pvm_on_b.elements() {
                let product = tensor_product(p.matrix(), q.matrix())?;
                let event = Projector::from_valid(product, p.rank() * q.rank());
                row.push(born_probability_with(&rho, &event, tol)?);
            }
            joint.push(row);
        }
        let marginal_b: Vec<T> = (0..pvm_on_b.len())
            .map(|b| joint.iter().map(|row| row[b]).sum())
            .collect();
        let dev = max_marginal_deviation(&joint, &baseline_b);
        if dev > max_deviation {
            max_deviation = dev;
        }
        contexts.push(ContextMarginal {
            context: pvm_a.label().to_string(),
            joint,
            marginal_b,
            max_deviation: dev,
        });
    }
    let pass = max_deviation < tol.refinement;
    Ok(NoSignalingReport {
        baseline_b,
        contexts,
        max_deviation,
        pass,
    })
}

/// The explicit 3⊗2 remote-steering construction: an entangled state with
/// two equal-weight trine decompositions on the qubit factor.
///
/// The trine gauge is fixed as planar real unit vectors at angles
/// `{0, 2π/3, 4π/3}` in the `{|b₁⟩, |b₂⟩}` plane; the second trine is the
/// first rotated by `π/2`, and the primed A-basis is solved from the
/// requirement that both product expansions give the same state.
#[derive(Debug, Clone)]
pub struct SteeringExample<T> {
    /// The entangled 3⊗2 state, common to both decompositions.
    pub psi_ab: StateVector<T>,
    /// Orthonormal A-basis of the first decomposition.
    pub basis_a: [StateVector<T>; 3],
    /// Orthonormal A-basis of the second decomposition.
    pub basis_a_prime: [StateVector<T>; 3],
    /// First trine `{b₁, c, d}` on the B factor.
    pub trine_one: [StateVector<T>; 3],
    /// Second trine `{b₂, e, f}` on the B factor.
    pub trine_two: [StateVector<T>; 3],
    /// First vector spanning the support plane of the reduced A-state.
    pub g: StateVector<T>,
    /// Second vector spanning the support plane of the reduced A-state.
    pub h: StateVector<T>,
}

/// Build the concrete steering example.
pub fn build_steering_example<T: Scalar>() -> SteeringExample<T> {
    let half = 0.5_f64;
    let s3h = 3f64.sqrt() / 2.0;
    let trine_one = [
        StateVector::from_real(&[1.0, 0.0]).expect("unit"),
        StateVector::from_real(&[-half, s3h]).expect("unit"),
        StateVector::from_real(&[-half, -s3h]).expect("unit"),
    ];
    // Same trine rotated by π/2, so its first leg is |b₂⟩.
    let trine_two = [
        StateVector::from_real(&[0.0, 1.0]).expect("unit"),
        StateVector::from_real(&[-s3h, -half]).expect("unit"),
        StateVector::from_real(&[s3h, -half]).expect("unit"),
    ];

    let basis_a = [
        StateVector::basis(3, 0).expect("basis"),
        StateVector::basis(3, 1).expect("basis"),
        StateVector::basis(3, 2).expect("basis"),
    ];

    // ψ = (1/√3) Σᵢ |aᵢ⟩|tᵢ⟩ written directly in the product basis.
    let psi_ab = assemble_state(&trine_one);

    // The primed basis comes from the orthogonal map U taking the second
    // trine's isometry onto the first's: row condition tᵢ = Σⱼ U_ij t'ⱼ with
    // |a'ⱼ⟩ = Σᵢ U_ij |aᵢ⟩. Both trines sum to zero, so (1,1,1)/√3 completes
    // both column spans.
    let u = trine_transfer_matrix::<T>(&trine_one, &trine_two);
    let column = |j: usize| {
        StateVector::normalized((0..3).map(|i| u[(i, j)]).collect()).expect("unitary column")
    };
    let basis_a_prime = [column(0), column(1), column(2)];

    let inv_sqrt6 = 1.0 / 6f64.sqrt();
    let g = StateVector::from_real(&[2.0 * inv_sqrt6, -inv_sqrt6, -inv_sqrt6]).expect("unit");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = StateVector::from_real(&[0.0, s, -s]).expect("unit");

    SteeringExample {
        psi_ab,
        basis_a,
        basis_a_prime,
        trine_one,
        trine_two,
        g,
        h,
    }
}

fn assemble_state<T: Scalar>(trine: &[StateVector<T>; 3]) -> StateVector<T> {
    let w = T::real(1.0 / 3f64.sqrt());
    let mut amplitudes = Vec::with_capacity(6);
    for t in trine {
        for amp in t.amplitudes() {
            amplitudes.push(amp.scale(w));
        }
    }
    StateVector::normalized(amplitudes).expect("unit by construction")
}

/// Orthogonal 3×3 matrix `U = Q Q'ᵀ + q q'ᵀ` with `U Q' = Q`, where `Q`,
/// `Q'` are the √(2/3)-scaled 3×2 trine matrices and `q = q' = (1,1,1)/√3`.
fn trine_transfer_matrix<T: Scalar>(
    trine_one: &[StateVector<T>; 3],
    trine_two: &[StateVector<T>; 3],
) -> ComplexMatrix<T> {
    let scale = T::real((2.0f64 / 3.0).sqrt());
    let q = ComplexMatrix::from_fn(3, 2, |i, j| trine_one[i].amplitudes()[j].scale(scale));
    let q_prime = ComplexMatrix::from_fn(3, 2, |i, j| trine_two[i].amplitudes()[j].scale(scale));
    let mut u = &q * &q_prime.transpose();
    let third = num_complex::Complex::new(T::real(1.0 / 3.0), T::zero());
    for i in 0..3 {
        for j in 0..3 {
            u[(i, j)] = u[(i, j)] + third;
        }
    }
    u
}

/// Every check of the steering example in one serializable report.
///
/// Deviations are max-entry (or max-amplitude) distances from the exact
/// values; `failures` lists the names of checks that missed their bound.
#[derive(Debug, Clone, Serialize)]
pub struct SteeringReport<T: Scalar + Serialize> {
    /// Max amplitude difference between the two product expansions.
    pub decomposition_deviation: T,
    /// Largest deviation of any within-trine overlap from 1/4.
    pub trine_overlap_deviation: T,
    /// Largest deviation of either equal-weight trine mixture from I/2.
    pub trine_mixture_deviation: T,
    /// Deviation of the reduced B state from I/2.
    pub rho_b_deviation: T,
    pub schmidt_coefficients: Vec<T>,
    /// Largest deviation of a Schmidt coefficient from 1/√2.
    pub schmidt_coefficient_deviation: T,
    /// Distance between the left-vector plane projector and the (g, h) one.
    pub schmidt_plane_deviation: T,
    /// Deviation of the reduced A state from half the plane projector.
    pub rho_a_deviation: T,
    pub rho_a_support_rank: usize,
    /// Probability of the first unprimed outcome under the reduced A state.
    pub luders_probability: T,
    /// Probability the posterior still assigns to the support plane.
    pub plane_probability_after: T,
    /// Largest deviation of a steering weight from 1/3.
    pub steering_weights_deviation: T,
    /// Largest deviation of a steered state from its trine projector.
    pub steering_states_deviation: T,
    pub no_signaling: NoSignalingReport<T>,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl<T: Scalar + Serialize> SteeringExample<T> {
    /// Second product expansion `(1/√3) Σⱼ |a'ⱼ⟩|t'ⱼ⟩` as a state.
    pub fn psi_from_primed(&self) -> StateVector<T> {
        let w = T::real(1.0 / 3f64.sqrt());
        let mut amplitudes = vec![num_complex::Complex::<T>::new(T::zero(), T::zero()); 6];
        for (a, t) in self.basis_a_prime.iter().zip(&self.trine_two) {
            for (i, aa) in a.amplitudes().iter().enumerate() {
                for (j, tt) in t.amplitudes().iter().enumerate() {
                    amplitudes[i * 2 + j] = amplitudes[i * 2 + j] + (aa * tt).scale(w);
                }
            }
        }
        StateVector::normalized(amplitudes).expect("unit by construction")
    }

    /// PVM of the unprimed A-basis.
    pub fn pvm_a(&self) -> Result<Pvm<T>> {
        Pvm::from_basis(
            "A",
            &self.basis_a,
            vec!["a1".into(), "a2".into(), "a3".into()],
        )
    }

    /// PVM of the primed A-basis.
    pub fn pvm_a_prime(&self) -> Result<Pvm<T>> {
        Pvm::from_basis(
            "A'",
            &self.basis_a_prime,
            vec!["a1'".into(), "a2'".into(), "a3'".into()],
        )
    }

    /// PVM of the `{b₁, b₂}` basis on the B factor.
    pub fn pvm_b(&self) -> Result<Pvm<T>> {
        Pvm::from_basis(
            "B",
            &[self.trine_one[0].clone(), self.trine_two[0].clone()],
            vec!["b1".into(), "b2".into()],
        )
    }

    /// Run every check of the worked example and report the deviations.
    pub fn verify(&self) -> Result<SteeringReport<T>> {
        let tol = Tolerances::<T>::default();
        let mut failures: Vec<String> = Vec::new();
        let mut check = |name: &str, ok: bool| {
            if !ok {
                failures.push(name.to_string());
            }
        };

        let psi = &self.psi_ab;
        let psi_primed = self.psi_from_primed();
        let decomposition_deviation = psi
            .amplitudes()
            .iter()
            .zip(psi_primed.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), |acc, v| if v > acc { v } else { acc });
        check(
            "decompositions_agree",
            decomposition_deviation < T::real(1e-10),
        );

        let quarter = T::real(0.25);
        let mut trine_overlap_deviation = T::zero();
        let mut trine_mixture_deviation = T::zero();
        let half_identity = ComplexMatrix::<T>::identity(2).scale_re(T::real(0.5));
        for trine in [&self.trine_one, &self.trine_two] {
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let dev = (trine[i].overlap_squared(&trine[j]) - quarter).abs();
                    if dev > trine_overlap_deviation {
                        trine_overlap_deviation = dev;
                    }
                }
            }
            let mut mix = ComplexMatrix::<T>::zeros(2, 2);
            for t in trine.iter() {
                mix = &mix + &t.outer(t);
            }
            let mix = mix.scale_re(T::real(1.0 / 3.0));
            let dev = mix.max_abs_diff(&half_identity);
            if dev > trine_mixture_deviation {
                trine_mixture_deviation = dev;
            }
        }
        check("trine_overlaps", trine_overlap_deviation < T::real(1e-10));
        check("trine_mixtures", trine_mixture_deviation < T::real(1e-10));

        let rho = DensityOperator::from_pure(psi);
        let rho_b = partial_trace(&rho, &[3, 2], &[1])?;
        let rho_b_deviation = rho_b.matrix().max_abs_diff(&half_identity);
        check("rho_b_is_maximally_mixed", rho_b_deviation < T::real(1e-12));

        let schmidt = schmidt_decompose_with(psi, 3, 2, &tol)?;
        let target = T::real(std::f64::consts::FRAC_1_SQRT_2);
        let schmidt_coefficient_deviation = schmidt
            .coefficients
            .iter()
            .map(|&c| (c - target).abs())
            .fold(T::zero(), |acc, v| if v > acc { v } else { acc });
        check(
            "schmidt_coefficients",
            schmidt.rank() == 2 && schmidt_coefficient_deviation < T::real(1e-10),
        );

        let plane = Projector::from_vectors_with(&[self.g.clone(), self.h.clone()], &tol)?;
        let left_plane = Projector::from_vectors_with(&schmidt.left_vectors, &tol)?;
        let schmidt_plane_deviation = left_plane.matrix().max_abs_diff(plane.matrix());
        check(
            "schmidt_left_plane",
            schmidt_plane_deviation < T::real(1e-9),
        );

        let rho_a = partial_trace(&rho, &[3, 2], &[0])?;
        let rho_a_deviation = rho_a
            .matrix()
            .max_abs_diff(&plane.matrix().scale_re(T::real(0.5)));
        check("rho_a_is_half_plane", rho_a_deviation < T::real(1e-10));
        let support = support_projector(&rho_a, tol.support_cutoff)?;
        let rho_a_support_rank = support.rank();
        check("rho_a_support_rank", rho_a_support_rank == 2);

        let p_a1 = Projector::from_state(&self.basis_a[0]);
        let (posterior, luders_probability) = luders_update_with(&rho_a, &p_a1, &tol)?;
        check(
            "luders_probability",
            (luders_probability - T::real(1.0 / 3.0)).abs() < T::real(1e-9),
        );
        let plane_probability_after = born_probability_with(&posterior, &plane, &tol)?;
        check(
            "plane_probability_after",
            (plane_probability_after - T::real(2.0 / 3.0)).abs() < T::real(1e-9),
        );

        let third = T::real(1.0 / 3.0);
        let mut steering_weights_deviation = T::zero();
        let mut steering_states_deviation = T::zero();
        for (pvm, trine) in [
            (self.pvm_a()?, &self.trine_one),
            (self.pvm_a_prime()?, &self.trine_two),
        ] {
            let ensemble = remote_steering_with(psi, 3, 2, &pvm, &tol)?;
            check("steering_outcome_count", ensemble.weights.len() == 3);
            let mixture = ensemble.mixture()?;
            check(
                "steering_refinement",
                mixture.matrix().max_abs_diff(rho_b.matrix()) < tol.refinement,
            );
            for (i, (w, state)) in ensemble.weights.iter().zip(&ensemble.states).enumerate() {
                let wdev = (*w - third).abs();
                if wdev > steering_weights_deviation {
                    steering_weights_deviation = wdev;
                }
                let target = trine[i].outer(&trine[i]);
                let sdev = state.matrix().max_abs_diff(&target);
                if sdev > steering_states_deviation {
                    steering_states_deviation = sdev;
                }
            }
        }
        check(
            "steering_weights",
            steering_weights_deviation < T::real(1e-9),
        );
        check("steering_states", steering_states_deviation < T::real(1e-9));

        let no_signaling = no_signaling_check_with(
            psi,
            3,
            2,
            &[self.pvm_a()?, self.pvm_a_prime()?],
            &self.pvm_b()?,
            &tol,
        )?;
        check("no_signaling", no_signaling.pass);

        let pass = failures.is_empty();
        Ok(SteeringReport {
            decomposition_deviation,
            trine_overlap_deviation,
            trine_mixture_deviation,
            rho_b_deviation,
            schmidt_coefficients: schmidt.coefficients.clone(),
            schmidt_coefficient_deviation,
            schmidt_plane_deviation,
            rho_a_deviation,
            rho_a_support_rank,
            luders_probability,
            plane_probability_after,
            steering_weights_deviation,
            steering_states_deviation,
            no_signaling,
            failures,
            pass,
        })
    }

    /// Copy of the example with a different entangled state, for fault
    /// injection in test harnesses. The replacement must still be a valid
    /// state vector; the checks in [`SteeringExample::verify`] decide
    /// whether it is the right one.
    pub fn with_psi(&self, psi: StateVector<T>) -> Self {
        let mut out = self.clone();
        out.psi_ab = psi;
        out
    }
}
