//! The numerical core is generic over the scalar; exercise it at f32, where
//! the default tolerances scale with the machine epsilon.

use qkin::conditionalization::{build_steering_example, luders_update};
use qkin::event_space::{born_probability, Projector};
use qkin::linalg::{hermitian_eig, partial_trace, schmidt_decompose, DensityOperator};
use qkin::scalar::{c, Tolerances};
use qkin::{Matrix32, Vector32};

#[test]
fn pauli_eigensystem_at_f32() {
    let sx = Matrix32::new(
        2,
        2,
        vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
    )
    .unwrap();
    let eig = hermitian_eig(&sx).unwrap();
    assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-5);
    assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-5);
}

#[test]
fn bell_schmidt_at_f32() {
    let s = std::f32::consts::FRAC_1_SQRT_2;
    let psi = Vector32::new(vec![
        c(s as f64, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(s as f64, 0.0),
    ])
    .unwrap();
    let schmidt = schmidt_decompose(&psi, 2, 2).unwrap();
    assert_eq!(schmidt.rank(), 2);
    for coeff in &schmidt.coefficients {
        assert!((coeff - s).abs() < 1e-5);
    }
}

#[test]
fn steering_example_numbers_at_f32() {
    let example = build_steering_example::<f32>();
    let rho = DensityOperator::from_pure(&example.psi_ab);
    let rho_a = partial_trace(&rho, &[3, 2], &[0]).unwrap();
    let p = Projector::from_state(&example.basis_a[0]);
    let (posterior, probability) = luders_update(&rho_a, &p).unwrap();
    assert!((probability - 1.0 / 3.0).abs() < 1e-5);
    let plane = Projector::from_vectors(&[example.g.clone(), example.h.clone()]).unwrap();
    let after = born_probability(&posterior, &plane).unwrap();
    assert!((after - 2.0 / 3.0).abs() < 1e-5);
}

#[test]
fn f32_default_tolerances_scale() {
    let t32 = Tolerances::<f32>::default();
    let t64 = Tolerances::<f64>::default();
    assert!(t32.hermiticity > t64.hermiticity as f32);
    assert_eq!(t32.jacobi_max_sweeps, t64.jacobi_max_sweeps);
}
