//! Micro/macro/environment model: diagonal macro–environment coupling,
//! environment dephasing, decoherence factors, and the emergent pointer
//! algebra.
//!
//! Only the environment factor evolves — the system and macro kets are
//! static by definition of the model, matching the coupling Hamiltonian's
//! diagonal form. Couplings are angular frequencies (rad/s) and times are
//! seconds; only the dimensionless products `g·t` enter any formula.

use num_complex::Complex;
use num_traits::Zero;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::event_space::{Projector, Pvm};
use crate::linalg::{partial_trace, ComplexMatrix, DensityOperator, StateVector, MAX_TENSOR_DIM};
use crate::scalar::{Scalar, Tolerances};

/// Largest total tripartite dimension for which the explicit cross-check
/// state is constructed.
pub const MAX_CROSS_CHECK_DIM: usize = 4096;

/// Environment model: initial amplitudes `γ_ν` over the environment basis
/// and pointer-conditional dephasing frequencies `g_kν`.
#[derive(Debug, Clone)]
pub struct EnvironmentSpec<T> {
    gamma: Vec<Complex<T>>,
    /// Row `k` holds the frequencies seen by pointer state `k` (rad/s).
    couplings: Vec<Vec<T>>,
}

impl<T: Scalar> EnvironmentSpec<T> {
    pub fn new(gamma: Vec<Complex<T>>, couplings: Vec<Vec<T>>) -> Result<Self> {
        Self::new_with(gamma, couplings, &Tolerances::default())
    }

    pub fn new_with(
        gamma: Vec<Complex<T>>,
        couplings: Vec<Vec<T>>,
        tol: &Tolerances<T>,
    ) -> Result<Self> {
        if gamma.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n_env = gamma.len();
        let weight: T = gamma.iter().map(|z| z.norm_sqr()).sum();
        let dev = (weight - T::one()).abs();
        if dev > tol.unit_norm {
            return Err(Error::WeightsNotNormalized {
                deviation: dev.to_f64_lossy(),
            });
        }
        for (row, g) in couplings.iter().enumerate() {
            if g.len() != n_env {
                return Err(Error::CouplingShape {
                    row,
                    got: g.len(),
                    expected: n_env,
                });
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { gamma, couplings })
    }

    /// Equal-amplitude environment with the given coupling rows.
    pub fn uniform(couplings: Vec<Vec<T>>) -> Result<Self> {
        let n_env = couplings.first().map(|r| r.len()).unwrap_or(0);
        let amp = T::one() / T::real(n_env as f64).sqrt();
        let gamma = vec![Complex::new(amp, T::zero()); n_env];
        Self::new(gamma, couplings)
    }

    pub fn n_env(&self) -> usize {
        self.gamma.len()
    }

    pub fn pointer_dim(&self) -> usize {
        self.couplings.len()
    }

    pub fn gamma(&self) -> &[Complex<T>] {
        &self.gamma
    }

    pub fn couplings(&self) -> &[Vec<T>] {
        &self.couplings
    }
}

/// Tri-decomposed pure state `Σ_k c_k |s_k⟩|M_k⟩|ε_k(t)⟩`: micro amplitudes,
/// (possibly nonorthogonal) micro kets, and the environment model.
#[derive(Debug, Clone)]
pub struct TriDecomposedState<T> {
    c: Vec<Complex<T>>,
    s_vectors: Vec<StateVector<T>>,
    env: EnvironmentSpec<T>,
}

impl<T: Scalar> TriDecomposedState<T> {
    pub fn new(
        c: Vec<Complex<T>>,
        s_vectors: Vec<StateVector<T>>,
        env: EnvironmentSpec<T>,
    ) -> Result<Self> {
        Self::new_with(c, s_vectors, env, &Tolerances::default())
    }

    pub fn new_with(
        c: Vec<Complex<T>>,
        s_vectors: Vec<StateVector<T>>,
        env: EnvironmentSpec<T>,
        tol: &Tolerances<T>,
    ) -> Result<Self> {
        if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let weight: T = c.iter().map(|z| z.norm_sqr()).sum();
        let dev = (weight - T::one()).abs();
        if dev > tol.unit_norm {
            return Err(Error::WeightsNotNormalized {
                deviation: dev.to_f64_lossy(),
            });
        }
        let m_dim = env.pointer_dim();
        if c.len() != m_dim {
            return Err(Error::PointerCount {
                context: "amplitude",
                got: c.len(),
                expected: m_dim,
            });
        }
        if s_vectors.len() != m_dim {
            return Err(Error::PointerCount {
                context: "micro ket",
                got: s_vectors.len(),
                expected: m_dim,
            });
        }
        let s_dim = s_vectors[0].dim();
        for s in &s_vectors {
            if s.dim() != s_dim {
                return Err(Error::DimensionMismatch {
                    left: s_dim,
                    right: s.dim(),
                });
            }
        }
        Ok(Self { c, s_vectors, env })
    }

    pub fn pointer_dim(&self) -> usize {
        self.c.len()
    }

    pub fn micro_dim(&self) -> usize {
        self.s_vectors[0].dim()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.c
    }

    pub fn micro_kets(&self) -> &[StateVector<T>] {
        &self.s_vectors
    }

    pub fn env(&self) -> &EnvironmentSpec<T> {
        &self.env
    }
}

/// `H = Σ_{kν} g_kν |M_k⟩⟨M_k| ⊗ |e_ν⟩⟨e_ν|`: Hermitian and diagonal in the
/// product basis, ordered lexicographically in `(k, ν)`.
pub fn build_interaction_hamiltonian<T: Scalar>(env: &EnvironmentSpec<T>) -> ComplexMatrix<T> {
    let m_dim = env.pointer_dim();
    let n_env = env.n_env();
    let dim = m_dim * n_env;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (k, row) in env.couplings().iter().enumerate() {
        for (nu, &g) in row.iter().enumerate() {
            let idx = k * n_env + nu;
            h[(idx, idx)] = Complex::new(g, T::zero());
        }
    }
    h
}

/// Pointer observable `Σ_k m_k |M_k⟩⟨M_k| ⊗ I` on the macro⊗environment
/// space, with the given pointer values.
pub fn pointer_observable<T: Scalar>(values: &[T], n_env: usize) -> ComplexMatrix<T> {
    let dim = values.len() * n_env;
    let mut a = ComplexMatrix::zeros(dim, dim);
    for (k, &m) in values.iter().enumerate() {
        for nu in 0..n_env {
            let idx = k * n_env + nu;
            a[(idx, idx)] = Complex::new(m, T::zero());
        }
    }
    a
}

/// Environment state correlated with pointer `k` at time `t`:
/// amplitudes `γ_ν e^{−i g_kν t}`.
pub fn evolve_environment<T: Scalar>(
    env: &EnvironmentSpec<T>,
    k: usize,
    t: T,
) -> Result<StateVector<T>> {
    if k >= env.pointer_dim() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: env.pointer_dim(),
        });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let amps = env
        .gamma()
        .iter()
        .zip(&env.couplings()[k])
        .map(|(g, &freq)| g * Complex::from_polar(T::one(), -freq * t))
        .collect();
    Ok(StateVector::from_parts(amps))
}

/// Decoherence factor `ζ_kk'(t) = ⟨ε_k(t)|ε_k'(t)⟩
/// = Σ_ν |γ_ν|² e^{i(g_kν − g_k'ν)t}`.
pub fn decoherence_factor<T: Scalar>(
    env: &EnvironmentSpec<T>,
    k: usize,
    k_prime: usize,
    t: T,
) -> Result<Complex<T>> {
    let m_dim = env.pointer_dim();
    if k >= m_dim {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: m_dim,
        });
    }
    if k_prime >= m_dim {
        return Err(Error::IndexOutOfRange {
            index: k_prime,
            len: m_dim,
        });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut zeta = Complex::<T>::zero();
    let gk = &env.couplings()[k];
    let gkp = &env.couplings()[k_prime];
    for (nu, g) in env.gamma().iter().enumerate() {
        let weight = g.norm_sqr();
        zeta = zeta + Complex::from_polar(weight, (gk[nu] - gkp[nu]) * t);
    }
    Ok(zeta)
}

/// Reduced macro state at time `t` in closed form:
/// `ρ_kk' = c_k c̄_k' ⟨s_k'|s_k⟩ ζ_k'k(t)`.
pub fn reduced_macro_state<T: Scalar>(
    state: &TriDecomposedState<T>,
    t: T,
) -> Result<DensityOperator<T>> {
    let m_dim = state.pointer_dim();
    let mut rho = ComplexMatrix::zeros(m_dim, m_dim);
    for k in 0..m_dim {
        for kp in 0..m_dim {
            let zeta = decoherence_factor(state.env(), kp, k, t)?;
            let s_overlap = state.micro_kets()[kp].inner(&state.micro_kets()[k]);
            rho[(k, kp)] = state.amplitudes()[k] * state.amplitudes()[kp].conj() * s_overlap * zeta;
        }
    }
    let rho = (&rho + &rho.adjoint()).scale_re(T::real(0.5));
    DensityOperator::new(rho)
}

/// Explicit tripartite pure state `Σ_k c_k |s_k⟩|M_k⟩|ε_k(t)⟩` for
/// brute-force checks; fails above [`MAX_CROSS_CHECK_DIM`].
pub fn tripartite_state<T: Scalar>(state: &TriDecomposedState<T>, t: T) -> Result<StateVector<T>> {
    let s_dim = state.micro_dim();
    let m_dim = state.pointer_dim();
    let n_env = state.env().n_env();
    let total = s_dim
        .checked_mul(m_dim)
        .and_then(|x| x.checked_mul(n_env))
        .unwrap_or(usize::MAX);
    if total > MAX_CROSS_CHECK_DIM.min(MAX_TENSOR_DIM) {
        return Err(Error::DimensionOverflow {
            dim: total,
            max: MAX_CROSS_CHECK_DIM,
        });
    }
    let mut amplitudes = vec![Complex::<T>::zero(); total];
    for k in 0..m_dim {
        let eps = evolve_environment(state.env(), k, t)?;
        let ck = state.amplitudes()[k];
        for (i, s_amp) in state.micro_kets()[k].amplitudes().iter().enumerate() {
            for (nu, e_amp) in eps.amplitudes().iter().enumerate() {
                let idx = (i * m_dim + k) * n_env + nu;
                amplitudes[idx] = amplitudes[idx] + ck * s_amp * e_amp;
            }
        }
    }
    Ok(StateVector::from_parts(amplitudes))
}

/// Closed-form reduced macro state together with its deviation from the
/// brute-force partial trace of the explicit tripartite state.
#[derive(Debug, Clone)]
pub struct CrossCheckedReduced<T> {
    pub reduced: DensityOperator<T>,
    /// Max-entry deviation from the explicit construction; `None` when the
    /// tripartite dimension exceeds [`MAX_CROSS_CHECK_DIM`] and the check
    /// was skipped.
    pub brute_force_deviation: Option<T>,
}

/// [`reduced_macro_state`] plus the explicit partial-trace cross-check when
/// the tripartite state is small enough to construct.
pub fn reduced_macro_state_cross_checked<T: Scalar>(
    state: &TriDecomposedState<T>,
    t: T,
) -> Result<CrossCheckedReduced<T>> {
    let reduced = reduced_macro_state(state, t)?;
    match tripartite_state(state, t) {
        Ok(psi) => {
            let full = DensityOperator::from_pure(&psi);
            let dims = [state.micro_dim(), state.pointer_dim(), state.env().n_env()];
            let brute = partial_trace(&full, &dims, &[1])?;
            let deviation = reduced.matrix().max_abs_diff(brute.matrix());
            Ok(CrossCheckedReduced {
                reduced,
                brute_force_deviation: Some(deviation),
            })
        }
        Err(Error::DimensionOverflow { .. }) => Ok(CrossCheckedReduced {
            reduced,
            brute_force_deviation: None,
        }),
        Err(e) => Err(e),
    }
}

/// Pointer algebra detection: classicality is the largest off-diagonal
/// suppression factor `|ζ_kk'|·|⟨s_k'|s_k⟩|`; the pointer PVM is returned
/// once it falls below the threshold.
#[derive(Debug, Clone)]
pub struct EmergentAlgebra<T> {
    pub classicality: T,
    /// The pointer-basis PVM on the macro factor, present only when
    /// classicality is below threshold.
    pub pointer_pvm: Option<Pvm<T>>,
}

pub fn emergent_boolean_algebra<T: Scalar>(
    state: &TriDecomposedState<T>,
    t: T,
    threshold: T,
) -> Result<EmergentAlgebra<T>> {
    if !(threshold > T::zero() && threshold < T::one()) {
        return Err(Error::ThresholdOutOfRange {
            value: threshold.to_f64_lossy(),
        });
    }
    let classicality = classicality_at(state, t)?;
    let pointer_pvm = if classicality < threshold {
        let m_dim = state.pointer_dim();
        Some(Pvm::new(
            "pointer",
            (0..m_dim)
                .map(|k| Projector::from_state(&StateVector::basis(m_dim, k).expect("in range")))
                .collect(),
            (0..m_dim).map(|k| format!("M{k}")).collect(),
        )?)
    } else {
        None
    };
    Ok(EmergentAlgebra {
        classicality,
        pointer_pvm,
    })
}

fn classicality_at<T: Scalar>(state: &TriDecomposedState<T>, t: T) -> Result<T> {
    let m_dim = state.pointer_dim();
    let mut max = T::zero();
    for k in 0..m_dim {
        for kp in (k + 1)..m_dim {
            let zeta = decoherence_factor(state.env(), k, kp, t)?.norm();
            let overlap = state.micro_kets()[kp].inner(&state.micro_kets()[k]).norm();
            let suppression = zeta * overlap;
            if suppression > max {
                max = suppression;
            }
        }
    }
    Ok(max)
}

/// One sweep row: time, `|ζ_kk'|` per pointer pair, classicality.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow<T> {
    pub t: T,
    pub zeta_abs: Vec<T>,
    pub classicality: T,
}

/// Decoherence sweep over an ascending time grid.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable<T> {
    /// Pointer index pairs `(k, k')`, `k < k'`, in lexicographic order.
    pub pairs: Vec<(usize, usize)>,
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Scalar> SweepTable<T> {
    /// CSV header `t,zeta_<k>_<k'>_abs...,classicality`.
    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t".to_string()];
        for &(k, kp) in &self.pairs {
            cols.push(format!("zeta_{k}_{kp}_abs"));
        }
        cols.push("classicality".to_string());
        cols.join(",")
    }
}

/// Evaluate `|ζ|` for every pointer pair over the grid; the grid must be
/// finite, ascending, and nonempty.
pub fn decoherence_sweep<T: Scalar>(
    env: &EnvironmentSpec<T>,
    state: &TriDecomposedState<T>,
    t_grid: &[T],
) -> Result<SweepTable<T>> {
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for (i, &t) in t_grid.iter().enumerate() {
        if !t.is_finite() || (i > 0 && t <= t_grid[i - 1]) {
            return Err(Error::BadGrid { index: i });
        }
    }
    let m_dim = env.pointer_dim();
    let mut pairs = Vec::new();
    for k in 0..m_dim {
        for kp in (k + 1)..m_dim {
            pairs.push((k, kp));
        }
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut zeta_abs = Vec::with_capacity(pairs.len());
        for &(k, kp) in &pairs {
            zeta_abs.push(decoherence_factor(env, k, kp, t)?.norm());
        }
        let classicality = classicality_at(state, t)?;
        rows.push(SweepRow {
            t,
            zeta_abs,
            classicality,
        });
    }
    Ok(SweepTable { pairs, rows })
}

/// Combined serde form `{gamma_re, gamma_im, couplings, c_re, c_im,
/// s_vectors}` for the full tri-decomposed model.
#[derive(Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
struct TriDecomposedRepr<T: Scalar> {
    gamma_re: Vec<T>,
    gamma_im: Vec<T>,
    couplings: Vec<Vec<T>>,
    c_re: Vec<T>,
    c_im: Vec<T>,
    s_vectors: Vec<ComplexMatrix<T>>,
}

impl<T: Scalar + Serialize> Serialize for TriDecomposedState<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TriDecomposedRepr {
            gamma_re: self.env.gamma().iter().map(|z| z.re).collect(),
            gamma_im: self.env.gamma().iter().map(|z| z.im).collect(),
            couplings: self.env.couplings().to_vec(),
            c_re: self.c.iter().map(|z| z.re).collect(),
            c_im: self.c.iter().map(|z| z.im).collect(),
            s_vectors: self
                .s_vectors
                .iter()
                .map(|s| ComplexMatrix::from_fn(s.dim(), 1, |i, _| s.amplitudes()[i]))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for TriDecomposedState<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = TriDecomposedRepr::<T>::deserialize(deserializer)?;
        if repr.gamma_re.len() != repr.gamma_im.len() || repr.c_re.len() != repr.c_im.len() {
            return Err(D::Error::custom("re/im arrays differ in length"));
        }
        let gamma = repr
            .gamma_re
            .into_iter()
            .zip(repr.gamma_im)
            .map(|(re, im)| Complex::new(re, im))
            .collect();
        let env = EnvironmentSpec::new(gamma, repr.couplings).map_err(D::Error::custom)?;
        let c = repr
            .c_re
            .into_iter()
            .zip(repr.c_im)
            .map(|(re, im)| Complex::new(re, im))
            .collect();
        let s_vectors = repr
            .s_vectors
            .into_iter()
            .map(|m| {
                if m.cols() != 1 {
                    return Err(D::Error::custom("micro ket JSON must have cols = 1"));
                }
                StateVector::new(m.entries().to_vec()).map_err(D::Error::custom)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        TriDecomposedState::new(c, s_vectors, env).map_err(D::Error::custom)
    }
}
