//! Non-Boolean event space machinery: projectors, resolutions of the
//! identity (PVMs), transition probabilities, and Born probabilities in
//! Gleason form `Tr(ρP)`.
//!
//! A PVM is one Boolean subalgebra of the event space — a family of mutually
//! exclusive, collectively exhaustive events. Probability assignments here
//! are noncontextual by construction (the trace is linear); the checks in
//! this module verify the implementation and document the principle.
//!
//! Caveat: uniqueness of the Born assignment holds for spaces of dimension
//! greater than 2. Dimension-2 event spaces are accepted without complaint;
//! nothing here depends on uniqueness.

use num_complex::Complex;
use num_traits::Zero;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_with, ComplexMatrix, DensityOperator, StateVector};
use crate::scalar::{Scalar, Tolerances};

/// Event: orthogonal projector onto a closed subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector<T> {
    matrix: ComplexMatrix<T>,
    rank: usize,
}

impl<T: Scalar> Projector<T> {
    /// Validate a matrix as an orthogonal projector (Hermitian, idempotent,
    /// integer trace).
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
        let idem = (&(&matrix * &matrix) - &matrix).max_abs();
        if idem > tol.idempotency {
            return Err(Error::NotIdempotent {
                deviation: idem.to_f64_lossy(),
            });
        }
        let trace = matrix.trace().re;
        let rank = trace.round().to_f64_lossy() as i64;
        if rank < 0 || (trace - T::real(rank as f64)).abs() > tol.rank_round {
            return Err(Error::RankNotIntegral {
                trace: trace.to_f64_lossy(),
            });
        }
        Ok(Self {
            matrix,
            rank: rank as usize,
        })
    }

    /// Orthogonal projector onto the span of the given vectors.
    ///
    /// The vectors need not be orthogonal but must be linearly independent,
    /// which is checked through the smallest eigenvalue of their Gram matrix.
    pub fn from_vectors(vectors: &[StateVector<T>]) -> Result<Self> {
        Self::from_vectors_with(vectors, &Tolerances::default())
    }

    pub fn from_vectors_with(vectors: &[StateVector<T>], tol: &Tolerances<T>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let dim = vectors[0].dim();
        for v in vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: v.dim(),
                });
            }
        }
        let k = vectors.len();
        let gram = ComplexMatrix::from_fn(k, k, |i, j| vectors[i].inner(&vectors[j]));
        let eig = hermitian_eig_with(&gram, tol)?;
        let min = eig.eigenvalues[0];
        if min <= tol.gram_independence {
            return Err(Error::DependentVectors {
                min_eigenvalue: min.to_f64_lossy(),
            });
        }

        // Whiten: W = V G^{-1/2} has orthonormal columns spanning span(V),
        // so P = W W† = Σ_{ij} (G^{-1})_{ji} |v_i⟩⟨v_j|.
        let g_inv = {
            let u = &eig.eigenvectors;
            ComplexMatrix::from_fn(k, k, |i, j| {
                let mut acc = Complex::<T>::zero();
                for m in 0..k {
                    let w = T::one() / eig.eigenvalues[m];
                    acc = acc + (u[(i, m)] * u[(j, m)].conj()).scale(w);
                }
                acc
            })
        };
        let mut p = ComplexMatrix::zeros(dim, dim);
        for i in 0..k {
            for j in 0..k {
                p = &p + &vectors[i].outer(&vectors[j]).scale(g_inv[(j, i)]);
            }
        }
        // Symmetrize rounding residue before validation.
        let p = (&p + &p.adjoint()).scale_re(T::real(0.5));
        Self::new_with(p, tol)
    }

    /// Rank-1 projector `|v⟩⟨v|`.
    pub fn from_state(v: &StateVector<T>) -> Self {
        Self {
            matrix: v.outer(v),
            rank: 1,
        }
    }

    /// The identity event.
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            rank: dim,
        }
    }

    /// The complementary event `I − P`.
    pub fn complement(&self) -> Self {
        let matrix = &ComplexMatrix::identity(self.dim()) - &self.matrix;
        Self {
            matrix,
            rank: self.dim() - self.rank,
        }
    }

    pub(crate) fn from_valid(matrix: ComplexMatrix<T>, rank: usize) -> Self {
        Self { matrix, rank }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }
}

impl<T: Scalar + Serialize> Serialize for Projector<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for Projector<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let matrix = ComplexMatrix::<T>::deserialize(deserializer)?;
        Projector::new(matrix).map_err(D::Error::custom)
    }
}

/// One Boolean subalgebra: a projection-valued measure, i.e. an ordered,
/// labeled resolution of the identity.
#[derive(Debug, Clone)]
pub struct Pvm<T> {
    label: String,
    elements: Vec<Projector<T>>,
    outcome_labels: Vec<String>,
}

impl<T: Scalar> Pvm<T> {
    pub fn new(
        label: impl Into<String>,
        elements: Vec<Projector<T>>,
        outcome_labels: Vec<String>,
    ) -> Result<Self> {
        Self::new_with(label, elements, outcome_labels, &Tolerances::default())
    }

    pub fn new_with(
        label: impl Into<String>,
        elements: Vec<Projector<T>>,
        outcome_labels: Vec<String>,
        tol: &Tolerances<T>,
    ) -> Result<Self> {
        if elements.len() != outcome_labels.len() {
            return Err(Error::PvmLabelCount {
                elements: elements.len(),
                labels: outcome_labels.len(),
            });
        }
        if elements.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let dim = elements[0].dim();
        for e in &elements {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: e.dim(),
                });
            }
        }
        for i in 0..elements.len() {
            for j in (i + 1)..elements.len() {
                let cross = (elements[i].matrix() * elements[j].matrix()).max_abs();
                if cross > tol.pvm_orthogonality {
                    return Err(Error::PvmNotOrthogonal {
                        first: i,
                        second: j,
                        deviation: cross.to_f64_lossy(),
                    });
                }
            }
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for e in &elements {
            sum = &sum + e.matrix();
        }
        let completeness = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if completeness > tol.pvm_completeness {
            return Err(Error::PvmIncomplete {
                deviation: completeness.to_f64_lossy(),
            });
        }
        Ok(Self {
            label: label.into(),
            elements,
            outcome_labels,
        })
    }

    /// Rank-1 PVM from an orthonormal basis.
    pub fn from_basis(
        label: impl Into<String>,
        basis: &[StateVector<T>],
        outcome_labels: Vec<String>,
    ) -> Result<Self> {
        let elements = basis.iter().map(Projector::from_state).collect();
        Self::new(label, elements, outcome_labels)
    }

    /// The computational-basis PVM with outcome labels `"0", "1", ...`.
    pub fn computational(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|i| Projector::from_state(&StateVector::basis(dim, i).expect("index in range")))
            .collect();
        let labels = (0..dim).map(|i| i.to_string()).collect();
        Self {
            label: "computational".into(),
            elements,
            outcome_labels: labels,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Projector<T>] {
        &self.elements
    }

    pub fn outcome_labels(&self) -> &[String] {
        &self.outcome_labels
    }

    /// Index of the element matching `p` within the membership tolerance.
    pub fn position_of(&self, p: &Projector<T>, tol: &Tolerances<T>) -> Option<usize> {
        self.elements.iter().position(|e| {
            e.dim() == p.dim() && e.matrix().max_abs_diff(p.matrix()) <= tol.pvm_membership
        })
    }
}

impl<T: Scalar + Serialize> Serialize for Pvm<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a, T: Scalar + Serialize> {
            label: &'a str,
            outcome_labels: &'a [String],
            elements: &'a [Projector<T>],
        }
        Repr {
            label: &self.label,
            outcome_labels: &self.outcome_labels,
            elements: &self.elements,
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for Pvm<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr<T: Scalar> {
            label: String,
            outcome_labels: Vec<String>,
            #[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
            elements: Vec<Projector<T>>,
        }
        let repr = Repr::<T>::deserialize(deserializer)?;
        Pvm::new(repr.label, repr.elements, repr.outcome_labels).map_err(D::Error::custom)
    }
}

/// `|⟨e|f⟩|²`: the transition (Born) probability between atomic events.
pub fn transition_probability<T: Scalar>(e: &StateVector<T>, f: &StateVector<T>) -> Result<T> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            left: e.dim(),
            right: f.dim(),
        });
    }
    Ok(e.overlap_squared(f))
}

/// Born probability `Tr(ρP)` in Gleason form.
///
/// The raw trace must lie within the probability band around `[0, 1]`;
/// values outside it signal an invariant violation upstream rather than
/// numerical dust, and are reported as errors instead of being clamped.
pub fn born_probability<T: Scalar>(rho: &DensityOperator<T>, p: &Projector<T>) -> Result<T> {
    born_probability_with(rho, p, &Tolerances::default())
}

pub fn born_probability_with<T: Scalar>(
    rho: &DensityOperator<T>,
    p: &Projector<T>,
    tol: &Tolerances<T>,
) -> Result<T> {
    if rho.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: p.dim(),
        });
    }
    let mut raw = T::zero();
    let m = rho.matrix();
    let q = p.matrix();
    for i in 0..rho.dim() {
        for k in 0..rho.dim() {
            raw = raw + (m[(i, k)] * q[(k, i)]).re;
        }
    }
    if raw < -tol.probability_band || raw > T::one() + tol.probability_band {
        return Err(Error::ProbabilityOutOfBand {
            value: raw.to_f64_lossy(),
        });
    }
    Ok(raw.max(T::zero()).min(T::one()))
}

/// Outcome of checking that a state's probabilities over one PVM are a
/// probability distribution.
#[derive(Debug, Clone, Serialize)]
pub struct AdditivityReport<T> {
    pub probabilities: Vec<T>,
    pub sum: T,
    pub pass: bool,
}

/// Born probabilities of every PVM element; passes when they sum to 1.
pub fn pvm_additivity_check<T: Scalar>(
    rho: &DensityOperator<T>,
    pvm: &Pvm<T>,
) -> Result<AdditivityReport<T>> {
    pvm_additivity_check_with(rho, pvm, &Tolerances::default())
}

pub fn pvm_additivity_check_with<T: Scalar>(
    rho: &DensityOperator<T>,
    pvm: &Pvm<T>,
    tol: &Tolerances<T>,
) -> Result<AdditivityReport<T>> {
    let mut probabilities = Vec::with_capacity(pvm.len());
    for e in pvm.elements() {
        probabilities.push(born_probability_with(rho, e, tol)?);
    }
    let sum: T = probabilities.iter().copied().sum();
    let pass = (sum - T::one()).abs() < tol.additivity;
    Ok(AdditivityReport {
        probabilities,
        sum,
        pass,
    })
}

/// Outcome of a noncontextuality check for one shared event.
#[derive(Debug, Clone, Serialize)]
pub struct NoncontextualityReport<T> {
    /// Probability of the shared event computed within each context.
    pub probabilities: Vec<T>,
    /// Largest pairwise difference between the context probabilities.
    pub max_difference: T,
    pub pass: bool,
}

/// Verify that a shared event receives the same probability in every listed
/// context (Boolean subalgebra) containing it. True by linearity of the
/// trace; this documents the principle and guards the implementation.
pub fn noncontextuality_check<T: Scalar>(
    rho: &DensityOperator<T>,
    shared: &Projector<T>,
    contexts: &[Pvm<T>],
) -> Result<NoncontextualityReport<T>> {
    noncontextuality_check_with(rho, shared, contexts, &Tolerances::default())
}

pub fn noncontextuality_check_with<T: Scalar>(
    rho: &DensityOperator<T>,
    shared: &Projector<T>,
    contexts: &[Pvm<T>],
    tol: &Tolerances<T>,
) -> Result<NoncontextualityReport<T>> {
    let mut probabilities = Vec::with_capacity(contexts.len());
    for context in contexts {
        let index =
            context
                .position_of(shared, tol)
                .ok_or_else(|| Error::SharedElementMissing {
                    context: context.label().to_string(),
                })?;
        probabilities.push(born_probability_with(rho, &context.elements()[index], tol)?);
    }
    let mut max_difference = T::zero();
    for i in 0..probabilities.len() {
        for j in (i + 1)..probabilities.len() {
            let d = (probabilities[i] - probabilities[j]).abs();
            if d > max_difference {
                max_difference = d;
            }
        }
    }
    let pass = max_difference < tol.context_agreement;
    Ok(NoncontextualityReport {
        probabilities,
        max_difference,
        pass,
    })
}
