//! Informationally complete observable sets, outcome statistics, state
//! reconstruction, the product (Kolmogorov) measure, and the
//! measure-and-prepare pipeline whose failure to clone demonstrates
//! information loss at desk scale.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::conditionalization::luders_update_with;
use crate::error::{Error, Result};
use crate::event_space::{born_probability_with, Projector, Pvm};
use crate::linalg::{
    hermitian_eig_with, trace_distance, ComplexMatrix, DensityOperator, StateVector,
};
use crate::random::{rng_for, sample_outcome, unit_uniform};
use crate::scalar::{Scalar, Tolerances};

/// Largest Hilbert-space dimension accepted by fiducial-set constructors.
pub const MAX_FIDUCIAL_DIM: usize = 16;

/// Atom cap for explicit product measures.
pub const MAX_PRODUCT_ATOMS: usize = 1 << 20;

/// A finite set of observables (PVMs) whose statistics determine the state.
#[derive(Debug, Clone)]
pub struct FiducialSet<T> {
    observables: Vec<Pvm<T>>,
    dim: usize,
}

impl<T: Scalar> FiducialSet<T> {
    /// Validate informational completeness: the elements must span the full
    /// d²-dimensional real space of Hermitian operators, checked through the
    /// rank of their Gram matrix under the trace inner product.
    pub fn new(observables: Vec<Pvm<T>>) -> Result<Self> {
        let dim = match observables.first() {
            Some(pvm) => pvm.dim(),
            None => return Err(Error::EmptyKeepSet),
        };
        for pvm in &observables {
            if pvm.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: pvm.dim(),
                });
            }
        }
        let rank = span_rank(&observables)?;
        if rank < dim * dim {
            return Err(Error::IncompleteFiducialSet {
                rank,
                required: dim * dim,
            });
        }
        Ok(Self { observables, dim })
    }

    pub fn observables(&self) -> &[Pvm<T>] {
        &self.observables
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }
}

/// Rank of the span of all PVM elements in Hermitian-operator space.
pub fn span_rank<T: Scalar>(observables: &[Pvm<T>]) -> Result<usize> {
    let elements: Vec<&Projector<T>> = observables
        .iter()
        .flat_map(|pvm| pvm.elements().iter())
        .collect();
    let n = elements.len();
    let gram = ComplexMatrix::from_fn(n, n, |i, j| {
        let prod = elements[i].matrix() * elements[j].matrix();
        Complex::new(prod.trace().re, T::zero())
    });
    let tol = Tolerances::<T>::default();
    let eig = hermitian_eig_with(&gram, &tol)?;
    let max = eig.eigenvalues.last().copied().unwrap_or(T::zero());
    let floor = tol.gram_independence * if max > T::one() { max } else { T::one() };
    Ok(eig.eigenvalues.iter().filter(|&&l| l > floor).count())
}

/// The qubit fiducial set: eigenbases of the three Pauli observables.
pub fn qubit_fiducial_set<T: Scalar>() -> FiducialSet<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus_x = StateVector::new(vec![crate::scalar::c(s, 0.0), crate::scalar::c(s, 0.0)]);
    let minus_x = StateVector::new(vec![crate::scalar::c(s, 0.0), crate::scalar::c(-s, 0.0)]);
    let plus_y = StateVector::new(vec![crate::scalar::c(s, 0.0), crate::scalar::c(0.0, s)]);
    let minus_y = StateVector::new(vec![crate::scalar::c(s, 0.0), crate::scalar::c(0.0, -s)]);
    let basis_x = [plus_x.expect("unit"), minus_x.expect("unit")];
    let basis_y = [plus_y.expect("unit"), minus_y.expect("unit")];
    let basis_z = [
        StateVector::basis(2, 0).expect("basis"),
        StateVector::basis(2, 1).expect("basis"),
    ];
    let labels = || vec!["+".to_string(), "-".to_string()];
    let observables = vec![
        Pvm::from_basis("sigma_x", &basis_x, labels()).expect("orthonormal"),
        Pvm::from_basis("sigma_y", &basis_y, labels()).expect("orthonormal"),
        Pvm::from_basis("sigma_z", &basis_z, labels()).expect("orthonormal"),
    ];
    FiducialSet::new(observables).expect("Pauli bases are informationally complete")
}

/// Fiducial set for dimension `d`: the computational basis plus, for every
/// pair `i < j`, the real and imaginary superposition bases.
pub fn general_fiducial_set<T: Scalar>(d: usize) -> Result<FiducialSet<T>> {
    if !(2..=MAX_FIDUCIAL_DIM).contains(&d) {
        return Err(Error::FiducialDimOutOfRange {
            dim: d,
            max: MAX_FIDUCIAL_DIM,
        });
    }
    let s = T::real(std::f64::consts::FRAC_1_SQRT_2);
    let mut observables = vec![Pvm::computational(d)];
    for i in 0..d {
        for j in (i + 1)..d {
            for (tag, phase) in [
                ("real", Complex::new(T::one(), T::zero())),
                ("imag", Complex::new(T::zero(), T::one())),
            ] {
                let mut basis = Vec::with_capacity(d);
                let mut plus = vec![Complex::<T>::zero(); d];
                plus[i] = Complex::new(s, T::zero());
                plus[j] = phase.scale(s);
                let mut minus = vec![Complex::<T>::zero(); d];
                minus[i] = Complex::new(s, T::zero());
                minus[j] = -phase.scale(s);
                basis.push(StateVector::new(plus)?);
                basis.push(StateVector::new(minus)?);
                let mut labels = vec!["+".to_string(), "-".to_string()];
                for k in 0..d {
                    if k != i && k != j {
                        basis.push(StateVector::basis(d, k)?);
                        labels.push(k.to_string());
                    }
                }
                observables.push(Pvm::from_basis(format!("{tag}_{i}_{j}"), &basis, labels)?);
            }
        }
    }
    FiducialSet::new(observables)
}

/// Where a probability table came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    /// Seeded empirical frequencies; `n` is the draw count per observable
    /// (for sampled statistics) or the total copy count (for the pipeline).
    Sampled {
        n: u64,
        seed: u64,
    },
}

/// Outcome distribution of one observable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableDistribution<T> {
    pub label: String,
    pub outcomes: Vec<String>,
    pub probs: Vec<T>,
    /// Raw counts when the distribution is empirical.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counts: Option<Vec<u64>>,
}

/// Statistics table `P_ρ`: one outcome distribution per fiducial observable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbabilityTable<T> {
    pub observables: Vec<ObservableDistribution<T>>,
    pub provenance: Provenance,
}

impl<T: Scalar> ProbabilityTable<T> {
    /// Validate shape and normalization of every distribution.
    pub fn validate(&self, tol: &Tolerances<T>) -> Result<()> {
        for obs in &self.observables {
            if obs.probs.len() != obs.outcomes.len() {
                return Err(Error::TableMismatch {
                    reason: format!(
                        "'{}' has {} probabilities for {} outcomes",
                        obs.label,
                        obs.probs.len(),
                        obs.outcomes.len()
                    ),
                });
            }
            let mut sum = T::zero();
            for &p in &obs.probs {
                if p < T::zero() {
                    return Err(Error::NegativeProbability {
                        label: obs.label.clone(),
                        value: p.to_f64_lossy(),
                    });
                }
                sum = sum + p;
            }
            if (sum - T::one()).abs() > tol.additivity {
                return Err(Error::DistributionNotNormalized {
                    label: obs.label.clone(),
                    sum: sum.to_f64_lossy(),
                });
            }
            if let Some(counts) = &obs.counts {
                if counts.len() != obs.probs.len() {
                    return Err(Error::TableMismatch {
                        reason: format!("'{}' count array shape mismatch", obs.label),
                    });
                }
            }
        }
        Ok(())
    }

    fn distribution(&self, label: &str) -> Option<&ObservableDistribution<T>> {
        self.observables.iter().find(|o| o.label == label)
    }
}

/// Exact Born statistics of every fiducial observable.
pub fn exact_statistics<T: Scalar>(
    rho: &DensityOperator<T>,
    f: &FiducialSet<T>,
) -> Result<ProbabilityTable<T>> {
    let tol = Tolerances::default();
    if rho.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: f.dim(),
        });
    }
    let mut observables = Vec::with_capacity(f.len());
    for pvm in f.observables() {
        let mut probs = Vec::with_capacity(pvm.len());
        for e in pvm.elements() {
            probs.push(born_probability_with(rho, e, &tol)?);
        }
        observables.push(ObservableDistribution {
            label: pvm.label().to_string(),
            outcomes: pvm.outcome_labels().to_vec(),
            probs,
            counts: None,
        });
    }
    Ok(ProbabilityTable {
        observables,
        provenance: Provenance::Exact,
    })
}

/// Empirical statistics: `n_per_observable` seeded draws from each
/// observable's exact distribution. Deterministic given the seed; each
/// observable reads its own RNG stream so the table does not depend on
/// evaluation order.
pub fn sampled_statistics<T: Scalar>(
    rho: &DensityOperator<T>,
    f: &FiducialSet<T>,
    n_per_observable: u64,
    seed: u64,
) -> Result<ProbabilityTable<T>> {
    if n_per_observable == 0 {
        return Err(Error::NoSamples);
    }
    let exact = exact_statistics(rho, f)?;
    let mut observables = Vec::with_capacity(f.len());
    for (index, obs) in exact.observables.into_iter().enumerate() {
        let mut rng = rng_for(seed, index as u64);
        let mut counts = vec![0u64; obs.probs.len()];
        for _ in 0..n_per_observable {
            counts[sample_outcome(&obs.probs, &mut rng)] += 1;
        }
        let inv = T::one() / T::real(n_per_observable as f64);
        let probs = counts.iter().map(|&c| T::real(c as f64) * inv).collect();
        observables.push(ObservableDistribution {
            label: obs.label,
            outcomes: obs.outcomes,
            probs,
            counts: Some(counts),
        });
    }
    Ok(ProbabilityTable {
        observables,
        provenance: Provenance::Sampled {
            n: n_per_observable,
            seed,
        },
    })
}

/// Result of a tomographic reconstruction.
#[derive(Debug, Clone, Serialize)]
pub struct Reconstruction<T: Scalar + Serialize> {
    pub state: DensityOperator<T>,
    /// Frobenius distance moved by the PSD-cone projection (plus trace
    /// renormalization) from the least-squares Hermitian solution.
    pub projection_distance: T,
    /// Set when the projection moved farther than the configured bound —
    /// the table was not close to any quantum state.
    pub infeasible: bool,
}

/// Reconstruct the state matching a probability table: least squares over an
/// orthonormal Hermitian operator basis, then projection to the PSD
/// unit-trace cone (negative eigenvalues clipped, trace renormalized).
pub fn reconstruct_state<T: Scalar + Serialize>(
    table: &ProbabilityTable<T>,
    f: &FiducialSet<T>,
) -> Result<Reconstruction<T>> {
    reconstruct_state_with(table, f, &Tolerances::default())
}

pub fn reconstruct_state_with<T: Scalar + Serialize>(
    table: &ProbabilityTable<T>,
    f: &FiducialSet<T>,
    tol: &Tolerances<T>,
) -> Result<Reconstruction<T>> {
    table.validate(tol)?;
    let d = f.dim();
    let basis = hermitian_basis::<T>(d);
    let m = basis.len();

    // Rows: one per (observable, outcome) pair present in the table.
    let mut design: Vec<Vec<T>> = Vec::new();
    let mut target: Vec<T> = Vec::new();
    for pvm in f.observables() {
        let obs = table
            .distribution(pvm.label())
            .ok_or_else(|| Error::TableMismatch {
                reason: format!("missing distribution for '{}'", pvm.label()),
            })?;
        if obs.probs.len() != pvm.len() {
            return Err(Error::TableMismatch {
                reason: format!("'{}' outcome count mismatch", pvm.label()),
            });
        }
        for (e, &p) in pvm.elements().iter().zip(&obs.probs) {
            let row = basis.iter().map(|b| (e.matrix() * b).trace().re).collect();
            design.push(row);
            target.push(p);
        }
    }

    // Normal equations N x = y with N = AᵀA, solved by spectral
    // pseudo-inverse; deficiency means the set does not span operator space.
    let normal = ComplexMatrix::from_fn(m, m, |i, j| {
        let mut acc = T::zero();
        for row in &design {
            acc = acc + row[i] * row[j];
        }
        Complex::new(acc, T::zero())
    });
    let rhs: Vec<T> = (0..m)
        .map(|i| {
            let mut acc = T::zero();
            for (row, &t) in design.iter().zip(&target) {
                acc = acc + row[i] * t;
            }
            acc
        })
        .collect();
    let eig = hermitian_eig_with(&normal, tol)?;
    let max = eig.eigenvalues.last().copied().unwrap_or(T::zero());
    let floor = tol.gram_independence * if max > T::one() { max } else { T::one() };
    let rank = eig.eigenvalues.iter().filter(|&&l| l > floor).count();
    if rank < m {
        return Err(Error::IncompleteFiducialSet { rank, required: m });
    }
    let mut coeffs = vec![T::zero(); m];
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        let u: Vec<Complex<T>> = eig.eigenvector(idx);
        let mut proj = T::zero();
        for i in 0..m {
            proj = proj + u[i].re * rhs[i];
        }
        let w = proj / lambda;
        for i in 0..m {
            coeffs[i] = coeffs[i] + w * u[i].re;
        }
    }

    let mut hermitian = ComplexMatrix::zeros(d, d);
    for (x, b) in coeffs.iter().zip(&basis) {
        hermitian = &hermitian + &b.scale_re(*x);
    }

    // PSD projection: clip negative eigenvalues, renormalize the trace.
    let spec = hermitian_eig_with(&hermitian, tol)?;
    let clipped: Vec<T> = spec
        .eigenvalues
        .iter()
        .map(|&l| if l > T::zero() { l } else { T::zero() })
        .collect();
    let total: T = clipped.iter().copied().sum();
    if total <= tol.zero_probability {
        return Err(Error::TableMismatch {
            reason: "projected state has vanishing trace".into(),
        });
    }
    let mut state_matrix = ComplexMatrix::zeros(d, d);
    for (idx, &l) in clipped.iter().enumerate() {
        if l > T::zero() {
            let v = StateVector::from_parts(spec.eigenvector(idx));
            state_matrix = &state_matrix + &v.outer(&v).scale_re(l / total);
        }
    }
    let state_matrix = (&state_matrix + &state_matrix.adjoint()).scale_re(T::real(0.5));
    let state = DensityOperator::new_with(state_matrix, tol)?;
    let projection_distance = (state.matrix() - &hermitian).frobenius_norm();
    let infeasible = projection_distance > tol.reconstruction_infeasibility;
    Ok(Reconstruction {
        state,
        projection_distance,
        infeasible,
    })
}

/// Orthonormal basis of Hermitian `d×d` matrices under `⟨A,B⟩ = Tr(AB)`:
/// diagonal units, symmetric pairs, antisymmetric pairs.
fn hermitian_basis<T: Scalar>(d: usize) -> Vec<ComplexMatrix<T>> {
    let s = T::real(std::f64::consts::FRAC_1_SQRT_2);
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(i, i)] = Complex::one();
        basis.push(m);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(i, j)] = Complex::new(s, T::zero());
            sym[(j, i)] = Complex::new(s, T::zero());
            basis.push(sym);
            let mut asym = ComplexMatrix::zeros(d, d);
            asym[(i, j)] = Complex::new(T::zero(), -s);
            asym[(j, i)] = Complex::new(T::zero(), s);
            basis.push(asym);
        }
    }
    basis
}

/// Classical product (Kolmogorov) measure over the joint outcome space,
/// treating the fiducial observables as independent.
#[derive(Debug, Clone, Serialize)]
pub struct ProductMeasure<T> {
    pub observable_labels: Vec<String>,
    pub outcome_labels: Vec<Vec<String>>,
    /// Outcome counts per observable; atoms are indexed row-major.
    pub shape: Vec<usize>,
    pub probs: Vec<T>,
}

impl<T: Scalar> ProductMeasure<T> {
    pub fn atom_count(&self) -> usize {
        self.probs.len()
    }

    /// Probability of a joint outcome.
    pub fn atom(&self, indices: &[usize]) -> Result<T> {
        if indices.len() != self.shape.len() {
            return Err(Error::TableMismatch {
                reason: "joint index arity mismatch".into(),
            });
        }
        let mut flat = 0usize;
        for (&i, &n) in indices.iter().zip(&self.shape) {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            flat = flat * n + i;
        }
        Ok(self.probs[flat])
    }

    /// Marginal distribution of one observable; exact by construction.
    pub fn marginal(&self, observable: usize) -> Result<Vec<T>> {
        if observable >= self.shape.len() {
            return Err(Error::IndexOutOfRange {
                index: observable,
                len: self.shape.len(),
            });
        }
        let mut out = vec![T::zero(); self.shape[observable]];
        for (flat, &p) in self.probs.iter().enumerate() {
            let mut rest = flat;
            let mut digit = 0usize;
            for (f, &n) in self.shape.iter().enumerate().rev() {
                let d = rest % n;
                rest /= n;
                if f == observable {
                    digit = d;
                }
            }
            out[digit] = out[digit] + p;
        }
        Ok(out)
    }
}

/// Build the product measure `P(a, b, … | A, B, …) = P(a|A)P(b|B)…`.
pub fn product_measure<T: Scalar>(table: &ProbabilityTable<T>) -> Result<ProductMeasure<T>> {
    table.validate(&Tolerances::default())?;
    if table.observables.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let shape: Vec<usize> = table.observables.iter().map(|o| o.probs.len()).collect();
    let atoms = shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .unwrap_or(usize::MAX);
    if atoms > MAX_PRODUCT_ATOMS {
        return Err(Error::ProductSpaceTooLarge {
            atoms,
            max: MAX_PRODUCT_ATOMS,
        });
    }
    let mut probs = vec![T::one(); atoms];
    for (flat, slot) in probs.iter_mut().enumerate() {
        let mut rest = flat;
        for (f, &n) in shape.iter().enumerate().rev() {
            let digit = rest % n;
            rest /= n;
            *slot = *slot * table.observables[f].probs[digit];
        }
    }
    Ok(ProductMeasure {
        observable_labels: table.observables.iter().map(|o| o.label.clone()).collect(),
        outcome_labels: table
            .observables
            .iter()
            .map(|o| o.outcomes.clone())
            .collect(),
        shape,
        probs,
    })
}

/// Per-(observable, outcome) diagnostic record from the pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeRecord<T: Scalar + Serialize> {
    pub observable: String,
    pub outcome: String,
    pub count: u64,
    /// Lüders posterior of the source given this outcome.
    pub posterior: DensityOperator<T>,
}

/// Report of the measure → table → prepare pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport<T: Scalar + Serialize> {
    /// The reconstructed "clone".
    pub prepared: DensityOperator<T>,
    /// Trace distance from the source to the clone.
    pub clone_trace_distance: T,
    /// Uhlmann fidelity between source and clone.
    pub clone_fidelity: T,
    /// Trace distance from the source to the ensemble-average
    /// post-measurement state, weighted by how often each observable was
    /// measured.
    pub disturbance: T,
    /// Fraction of copies assigned to each observable.
    pub disturbed_weights: Vec<T>,
    /// Dephased source per observable (the ensemble-level post-measurement
    /// states).
    pub disturbed_states: Vec<DensityOperator<T>>,
    /// Empirical table fed to the reconstruction.
    pub table: ProbabilityTable<T>,
    /// Observables that received no copies; their table rows fall back to
    /// the uniform distribution.
    pub unmeasured: Vec<String>,
    pub records: Vec<OutcomeRecord<T>>,
    pub projection_distance: T,
    pub reconstruction_infeasible: bool,
}

/// Measure `n` copies of the source (each with a uniformly chosen fiducial
/// observable and a Born-sampled outcome), Lüders-update each copy, build
/// the empirical table, and reconstruct a "clone" from it.
///
/// Disturbance is assessed at the density-operator level: per observable the
/// post-measurement state is the dephased source `Σ_a P_a ρ P_a`, and the
/// reported disturbance is the copy-weighted average trace distance from the
/// source to those states. Per-outcome posteriors are reported as
/// diagnostics.
pub fn measure_prepare_pipeline<T: Scalar + Serialize>(
    source: &DensityOperator<T>,
    f: &FiducialSet<T>,
    n: u64,
    seed: u64,
) -> Result<PipelineReport<T>> {
    measure_prepare_pipeline_with(source, f, n, seed, &Tolerances::default())
}

pub fn measure_prepare_pipeline_with<T: Scalar + Serialize>(
    source: &DensityOperator<T>,
    f: &FiducialSet<T>,
    n: u64,
    seed: u64,
    tol: &Tolerances<T>,
) -> Result<PipelineReport<T>> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    if source.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            left: source.dim(),
            right: f.dim(),
        });
    }
    let exact = exact_statistics(source, f)?;
    let n_obs = f.len();

    // One RNG stream per copy: scheduling-independent determinism.
    let mut counts: Vec<Vec<u64>> = f
        .observables()
        .iter()
        .map(|pvm| vec![0u64; pvm.len()])
        .collect();
    let mut copies_per_obs = vec![0u64; n_obs];
    for copy in 0..n {
        let mut rng = rng_for(seed, copy);
        let pick = (unit_uniform::<f64>(&mut rng) * n_obs as f64) as usize;
        let obs = pick.min(n_obs - 1);
        let outcome = sample_outcome(&exact.observables[obs].probs, &mut rng);
        counts[obs][outcome] += 1;
        copies_per_obs[obs] += 1;
    }

    // Empirical table; unmeasured observables fall back to uniform.
    let mut unmeasured = Vec::new();
    let mut observables = Vec::with_capacity(n_obs);
    for (obs, pvm) in f.observables().iter().enumerate() {
        let total = copies_per_obs[obs];
        let probs: Vec<T> = if total == 0 {
            unmeasured.push(pvm.label().to_string());
            let u = T::one() / T::real(pvm.len() as f64);
            vec![u; pvm.len()]
        } else {
            let inv = T::one() / T::real(total as f64);
            counts[obs]
                .iter()
                .map(|&c| T::real(c as f64) * inv)
                .collect()
        };
        observables.push(ObservableDistribution {
            label: pvm.label().to_string(),
            outcomes: pvm.outcome_labels().to_vec(),
            probs,
            counts: Some(counts[obs].clone()),
        });
    }
    let table = ProbabilityTable {
        observables,
        provenance: Provenance::Sampled { n, seed },
    };

    let reconstruction = reconstruct_state_with(&table, f, tol)?;

    // Ensemble-level disturbance.
    let mut disturbed_states = Vec::with_capacity(n_obs);
    let mut disturbed_weights = Vec::with_capacity(n_obs);
    let mut disturbance = T::zero();
    let inv_n = T::one() / T::real(n as f64);
    for (obs, pvm) in f.observables().iter().enumerate() {
        let dephased = dephase(source, pvm)?;
        let weight = T::real(copies_per_obs[obs] as f64) * inv_n;
        disturbance = disturbance + weight * trace_distance(source, &dephased)?;
        disturbed_weights.push(weight);
        disturbed_states.push(dephased);
    }

    // Per-outcome posterior diagnostics for outcomes that occurred.
    let mut records = Vec::new();
    for (obs, pvm) in f.observables().iter().enumerate() {
        for (o, e) in pvm.elements().iter().enumerate() {
            let count = counts[obs][o];
            if count == 0 {
                continue;
            }
            let (posterior, _) = luders_update_with(source, e, tol)?;
            records.push(OutcomeRecord {
                observable: pvm.label().to_string(),
                outcome: pvm.outcome_labels()[o].clone(),
                count,
                posterior,
            });
        }
    }

    let clone_trace_distance = trace_distance(source, &reconstruction.state)?;
    let clone_fidelity = crate::linalg::fidelity(source, &reconstruction.state)?;
    Ok(PipelineReport {
        prepared: reconstruction.state,
        clone_trace_distance,
        clone_fidelity,
        disturbance,
        disturbed_weights,
        disturbed_states,
        table,
        unmeasured,
        records,
        projection_distance: reconstruction.projection_distance,
        reconstruction_infeasible: reconstruction.infeasible,
    })
}

/// Unconditional post-measurement state `Σ_a P_a ρ P_a` for one observable.
pub fn dephase<T: Scalar>(rho: &DensityOperator<T>, pvm: &Pvm<T>) -> Result<DensityOperator<T>> {
    if rho.dim() != pvm.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: pvm.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for e in pvm.elements() {
        out = &out + &(&(e.matrix() * rho.matrix()) * e.matrix());
    }
    let out = (&out + &out.adjoint()).scale_re(T::real(0.5));
    Ok(DensityOperator::from_valid(out))
}

/// Transition probability between `n`-fold tensor powers, `|⟨e|f⟩|^{2n}`,
/// in closed form.
pub fn tensor_power_overlap<T: Scalar>(
    e: &StateVector<T>,
    f: &StateVector<T>,
    n: u32,
) -> Result<T> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            left: e.dim(),
            right: f.dim(),
        });
    }
    if n == 0 {
        return Err(Error::NoSamples);
    }
    Ok(e.overlap_squared(f).powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density_operator, random_state_vector, rng_for};

    #[test]
    fn qubit_set_shape_and_rank() {
        let f = qubit_fiducial_set::<f64>();
        assert_eq!(f.len(), 3);
        assert!(f.observables().iter().all(|pvm| pvm.len() == 2));
        assert_eq!(span_rank(f.observables()).unwrap(), 4);
    }

    #[test]
    fn dropping_any_pauli_basis_breaks_completeness() {
        let f = qubit_fiducial_set::<f64>();
        for skip in 0..3 {
            let reduced: Vec<Pvm<f64>> = f
                .observables()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, pvm)| pvm.clone())
                .collect();
            assert_eq!(span_rank(&reduced).unwrap(), 3);
            assert!(matches!(
                FiducialSet::new(reduced).unwrap_err(),
                Error::IncompleteFiducialSet {
                    rank: 3,
                    required: 4
                }
            ));
        }
    }

    #[test]
    fn general_set_ranks() {
        assert_eq!(
            span_rank(general_fiducial_set::<f64>(2).unwrap().observables()).unwrap(),
            4
        );
        assert_eq!(
            span_rank(general_fiducial_set::<f64>(3).unwrap().observables()).unwrap(),
            9
        );
    }

    #[test]
    fn degenerate_dimension_rejected() {
        assert!(matches!(
            general_fiducial_set::<f64>(1).unwrap_err(),
            Error::FiducialDimOutOfRange { dim: 1, .. }
        ));
    }

    #[test]
    fn exact_statistics_of_basis_state() {
        let rho = DensityOperator::from_pure(&StateVector::<f64>::basis(2, 0).unwrap());
        let f = qubit_fiducial_set::<f64>();
        let table = exact_statistics(&rho, &f).unwrap();
        let sx = table.distribution("sigma_x").unwrap();
        let sy = table.distribution("sigma_y").unwrap();
        let sz = table.distribution("sigma_z").unwrap();
        assert!((sz.probs[0] - 1.0).abs() < 1e-12);
        assert!(sz.probs[1] < 1e-12);
        for obs in [sx, sy] {
            assert!((obs.probs[0] - 0.5).abs() < 1e-12);
            assert!((obs.probs[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_statistics_are_uniform() {
        let rho = DensityOperator::<f64>::maximally_mixed(2);
        let table = exact_statistics(&rho, &qubit_fiducial_set()).unwrap();
        for obs in &table.observables {
            for &p in &obs.probs {
                assert!((p - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_counts_consistent() {
        let mut rng = rng_for(900, 0);
        let rho = random_density_operator::<f64>(2, &mut rng);
        let f = qubit_fiducial_set::<f64>();
        let a = sampled_statistics(&rho, &f, 500, 77).unwrap();
        let b = sampled_statistics(&rho, &f, 500, 77).unwrap();
        for (x, y) in a.observables.iter().zip(&b.observables) {
            assert_eq!(x.counts, y.counts);
            let total: u64 = x.counts.as_ref().unwrap().iter().sum();
            assert_eq!(total, 500);
        }
    }

    #[test]
    fn single_draw_is_a_point_mass() {
        let rho = DensityOperator::<f64>::maximally_mixed(2);
        let table = sampled_statistics(&rho, &qubit_fiducial_set(), 1, 5).unwrap();
        for obs in &table.observables {
            let ones = obs
                .probs
                .iter()
                .filter(|&&p| (p - 1.0).abs() < 1e-12)
                .count();
            let zeros = obs.probs.iter().filter(|&&p| p.abs() < 1e-12).count();
            assert_eq!((ones, zeros), (1, 1));
        }
    }

    #[test]
    fn sampling_error_shrinks_like_inverse_sqrt() {
        // Monte Carlo oracle: comparing max table deviation at n and 4n, the
        // median ratio over seeds should sit near 1/2.
        let mut rng = rng_for(901, 0);
        let rho = random_density_operator::<f64>(2, &mut rng);
        let f = qubit_fiducial_set::<f64>();
        let exact = exact_statistics(&rho, &f).unwrap();
        let deviation = |table: &ProbabilityTable<f64>| -> f64 {
            let mut max: f64 = 0.0;
            for (s, e) in table.observables.iter().zip(&exact.observables) {
                for (&a, &b) in s.probs.iter().zip(&e.probs) {
                    max = max.max((a - b).abs());
                }
            }
            max
        };
        let seeds: Vec<u64> = (0..21).collect();
        let mut small: Vec<f64> = seeds
            .iter()
            .map(|&s| deviation(&sampled_statistics(&rho, &f, 256, s).unwrap()))
            .collect();
        let mut large: Vec<f64> = seeds
            .iter()
            .map(|&s| deviation(&sampled_statistics(&rho, &f, 1024, s).unwrap()))
            .collect();
        small.sort_by(|a, b| a.partial_cmp(b).unwrap());
        large.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ratio = large[10] / small[10];
        assert!(ratio < 0.75, "median error ratio {ratio}");
    }

    #[test]
    fn reconstruction_median_error_quarters_samples_under_0_7() {
        // Median reconstruction trace distance at 4n stays at or below 0.7
        // of the median at n, over 21 seeds.
        let mut rng = rng_for(903, 0);
        let source = random_density_operator::<f64>(2, &mut rng);
        let f = qubit_fiducial_set::<f64>();
        let reconstruction_error = |n: u64, seed: u64| -> f64 {
            let table = sampled_statistics(&source, &f, n, seed).unwrap();
            let rec = reconstruct_state(&table, &f).unwrap();
            trace_distance(&source, &rec.state).unwrap()
        };
        let median = |n: u64| -> f64 {
            let mut errors: Vec<f64> = (0..21).map(|s| reconstruction_error(n, s)).collect();
            errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
            errors[10]
        };
        let at_n = median(256);
        let at_4n = median(1024);
        assert!(
            at_4n <= 0.7 * at_n,
            "median trace distance {at_4n} at 4n vs {at_n} at n"
        );
    }

    #[test]
    fn exact_round_trip_reconstruction() {
        let f = qubit_fiducial_set::<f64>();
        let rho = DensityOperator::from_pure(&StateVector::<f64>::basis(2, 0).unwrap());
        let table = exact_statistics(&rho, &f).unwrap();
        let rec = reconstruct_state(&table, &f).unwrap();
        assert!(trace_distance(&rho, &rec.state).unwrap() < 1e-9);
        assert!(!rec.infeasible);
    }

    #[test]
    fn uniform_table_reconstructs_maximally_mixed() {
        let f = qubit_fiducial_set::<f64>();
        let rho = DensityOperator::<f64>::maximally_mixed(2);
        let table = exact_statistics(&rho, &f).unwrap();
        let rec = reconstruct_state(&table, &f).unwrap();
        assert!(rec.state.matrix().max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn sampled_reconstruction_close_at_large_n() {
        let mut rng = rng_for(902, 3);
        let source = random_density_operator::<f64>(2, &mut rng);
        let f = qubit_fiducial_set::<f64>();
        let table = sampled_statistics(&source, &f, 10_000, 12).unwrap();
        let rec = reconstruct_state(&table, &f).unwrap();
        assert!(trace_distance(&source, &rec.state).unwrap() < 0.05);
    }

    #[test]
    fn contradictory_point_masses_are_flagged_infeasible() {
        // All three Pauli observables reporting deterministic outcomes puts
        // the least-squares solution far outside the Bloch ball.
        let f = qubit_fiducial_set::<f64>();
        let observables = f
            .observables()
            .iter()
            .map(|pvm| ObservableDistribution {
                label: pvm.label().to_string(),
                outcomes: pvm.outcome_labels().to_vec(),
                probs: vec![1.0, 0.0],
                counts: None,
            })
            .collect();
        let table = ProbabilityTable {
            observables,
            provenance: Provenance::Exact,
        };
        let rec = reconstruct_state(&table, &f).unwrap();
        assert!(
            rec.infeasible,
            "projection distance {}",
            rec.projection_distance
        );
        assert!(rec.projection_distance > 0.5);
    }

    #[test]
    fn product_measure_of_basis_state() {
        let rho = DensityOperator::from_pure(&StateVector::<f64>::basis(2, 0).unwrap());
        let f = qubit_fiducial_set::<f64>();
        let table = exact_statistics(&rho, &f).unwrap();
        let joint = product_measure(&table).unwrap();
        assert_eq!(joint.atom_count(), 8);
        // P(x₊, y₊, z₊) = ½ · ½ · 1 = ¼.
        let p = joint.atom(&[0, 0, 0]).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
        for (i, obs) in table.observables.iter().enumerate() {
            let marginal = joint.marginal(i).unwrap();
            for (&m, &p) in marginal.iter().zip(&obs.probs) {
                assert!((m - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_observable_product_measure_is_the_table() {
        let rho = DensityOperator::<f64>::maximally_mixed(3);
        let pvm = Pvm::computational(3);
        let tol = Tolerances::default();
        let probs: Vec<f64> = pvm
            .elements()
            .iter()
            .map(|e| born_probability_with(&rho, e, &tol).unwrap())
            .collect();
        let table = ProbabilityTable {
            observables: vec![ObservableDistribution {
                label: pvm.label().to_string(),
                outcomes: pvm.outcome_labels().to_vec(),
                probs: probs.clone(),
                counts: None,
            }],
            provenance: Provenance::Exact,
        };
        let joint = product_measure(&table).unwrap();
        assert_eq!(joint.probs, probs);
    }

    #[test]
    fn pipeline_on_maximally_mixed_is_undisturbed() {
        let f = qubit_fiducial_set::<f64>();
        let source = DensityOperator::<f64>::maximally_mixed(2);
        let report = measure_prepare_pipeline(&source, &f, 300, 8).unwrap();
        assert!(report.disturbance < 1e-12);
        // The single-copy table still fails to clone exactly.
        let single = measure_prepare_pipeline(&source, &f, 1, 8).unwrap();
        assert!(single.clone_trace_distance > 0.01);
        assert_eq!(single.unmeasured.len(), 2);
    }

    #[test]
    fn dephasing_plus_state_in_z_gives_half_distance() {
        let plus = StateVector::<f64>::from_real(&[1.0, 1.0]).unwrap();
        let source = DensityOperator::from_pure(&plus);
        let f = qubit_fiducial_set::<f64>();
        let z = &f.observables()[2];
        assert_eq!(z.label(), "sigma_z");
        let dephased = dephase(&source, z).unwrap();
        assert!(
            dephased
                .matrix()
                .max_abs_diff(DensityOperator::maximally_mixed(2).matrix())
                < 1e-12
        );
        assert!((trace_distance(&source, &dephased).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pipeline_dichotomy_for_pure_sources() {
        let f = qubit_fiducial_set::<f64>();
        for seed in 0..8u64 {
            let mut rng = rng_for(7000 + seed, 0);
            let source = DensityOperator::from_pure(&random_state_vector::<f64>(2, &mut rng));
            let report = measure_prepare_pipeline(&source, &f, 600, seed).unwrap();
            assert!(
                report.disturbance > 0.01 || report.clone_trace_distance > 0.01,
                "seed {seed}: disturbance {} clone distance {}",
                report.disturbance,
                report.clone_trace_distance
            );
            assert!(report.disturbance > 0.01);
            assert!(report.clone_fidelity < 1.0 - 1e-6);
        }
    }

    #[test]
    fn pipeline_report_serializes_scalars_and_prepared_matrix() {
        let f = qubit_fiducial_set::<f64>();
        let source = DensityOperator::from_pure(&StateVector::<f64>::basis(2, 0).unwrap());
        let report = measure_prepare_pipeline(&source, &f, 64, 3).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert!(json["prepared"]["re"].is_array());
        assert!(json["disturbance"].is_number());
        assert!(json["clone_trace_distance"].is_number());
        assert!(json["clone_fidelity"].is_number());
        assert!(json["table"]["provenance"]["sampled"]["seed"].is_number());
    }

    #[test]
    fn tensor_power_overlap_closed_form() {
        let e = StateVector::<f64>::from_real(&[1.0, 0.0]).unwrap();
        let f = StateVector::<f64>::from_real(&[-0.5, 3f64.sqrt() / 2.0]).unwrap();
        assert!((tensor_power_overlap(&e, &f, 1).unwrap() - 0.25).abs() < 1e-12);
        assert!((tensor_power_overlap(&e, &f, 5).unwrap() - 0.25f64.powi(5)).abs() < 1e-12);
        assert!((tensor_power_overlap(&e, &e, 9).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_power_overlap_strictly_decreases() {
        let e = StateVector::<f64>::from_real(&[1.0, 0.2]).unwrap();
        let f = StateVector::<f64>::from_real(&[0.3, 1.0]).unwrap();
        let mut last = 1.0;
        for n in 1..=12 {
            let v = tensor_power_overlap(&e, &f, n).unwrap();
            assert!(v < last);
            last = v;
        }
    }
}
