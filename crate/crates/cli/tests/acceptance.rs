//! Acceptance suite: one test per criterion, each printing a pass line with
//! its headline numbers. Run with `cargo test -p qkin-cli --test acceptance`
//! (add `-- --nocapture` to see the lines for passing criteria).

use std::fs;
use std::path::Path;

use qkin::conditionalization::{build_steering_example, remote_steering};
use qkin::decoherence::{
    build_interaction_hamiltonian, decoherence_factor, pointer_observable,
    reduced_macro_state_cross_checked, EnvironmentSpec, TriDecomposedState,
};
use qkin::event_space::{noncontextuality_check, pvm_additivity_check, Projector, Pvm};
use qkin::infoloss::{
    exact_statistics, general_fiducial_set, qubit_fiducial_set, reconstruct_state,
    tensor_power_overlap,
};
use qkin::linalg::{partial_trace, trace_distance, DensityOperator, StateVector};
use qkin::random::{
    random_density_operator, random_orthonormal_basis, random_state_vector, rng_for,
    standard_normal,
};
use qkin_cli::{run, DemoKind, Overrides, RunConfig};

fn run_demo(demo: DemoKind, seed: u64, params: serde_json::Value, out: &Path) -> bool {
    let config = RunConfig {
        demo,
        seed,
        params,
        output_dir: Some(out.to_path_buf()),
    };
    run(&config, &Overrides::default()).expect("demo run").pass
}

#[test]
fn criterion_1_steering_golden() {
    let started = std::time::Instant::now();
    let example = build_steering_example::<f64>();
    let report = example.verify().unwrap();
    assert!(report.pass, "failures: {:?}", report.failures);
    assert!(report.decomposition_deviation < 1e-10);
    assert!(report.rho_b_deviation < 1e-12);
    assert_eq!(report.schmidt_coefficients.len(), 2);
    for c in &report.schmidt_coefficients {
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }
    assert_eq!(report.rho_a_support_rank, 2);
    assert!(report.rho_a_deviation < 1e-10);
    assert!((report.plane_probability_after - 2.0 / 3.0).abs() < 1e-9);

    // The same checks drive the CLI demo, whose exit status must flip under
    // fault injection.
    let dir = tempfile::tempdir().unwrap();
    assert!(run_demo(
        DemoKind::Steering,
        42,
        serde_json::json!({}),
        dir.path()
    ));
    assert!(!run_demo(
        DemoKind::Steering,
        42,
        serde_json::json!({"inject_corruption": true}),
        dir.path(),
    ));
    println!(
        "acceptance criterion 1 (steering golden test): PASS \
         [plane probability after = {:.10}, {:?}]",
        report.plane_probability_after,
        started.elapsed()
    );
}

#[test]
fn criterion_2_gleason_probability_suite() {
    let started = std::time::Instant::now();
    let mut checked = 0usize;
    for (case, dim) in (0..500).map(|i| (i as u64, [3, 4, 5][i % 3])) {
        let mut rng = rng_for(20_000 + case, 0);
        let rho = random_density_operator::<f64>(dim, &mut rng);
        let basis = random_orthonormal_basis::<f64>(dim, &mut rng);
        let labels: Vec<String> = (0..dim).map(|i| i.to_string()).collect();
        let pvm = Pvm::from_basis("ctx", &basis, labels.clone()).unwrap();

        let report = pvm_additivity_check(&rho, &pvm).unwrap();
        assert!(report.probabilities.iter().all(|&p| p >= 0.0));
        assert!((report.sum - 1.0).abs() < 1e-9, "additivity {}", report.sum);

        // Same first event completed by a second, internally rotated context.
        let shared = Projector::from_state(&basis[0]);
        let mixer = random_orthonormal_basis::<f64>(dim - 1, &mut rng);
        let mut rotated = vec![basis[0].clone()];
        for w in &mixer {
            let mut amps = vec![qkin::scalar::c::<f64>(0.0, 0.0); dim];
            for (k, coeff) in w.amplitudes().iter().enumerate() {
                for (a, b) in amps.iter_mut().zip(basis[k + 1].amplitudes()) {
                    *a += coeff * b;
                }
            }
            rotated.push(StateVector::new(amps).unwrap());
        }
        let context2 = Pvm::from_basis("ctx2", &rotated, labels).unwrap();
        let nc = noncontextuality_check(&rho, &shared, &[pvm, context2]).unwrap();
        assert!(nc.pass, "context dependence {}", nc.max_difference);
        assert!(nc.max_difference < 1e-10);
        checked += 1;
    }
    assert_eq!(checked, 500);
    println!(
        "acceptance criterion 2 (Gleason-form probability suite): PASS \
         [500 pairs at d in {{3,4,5}}, {:?}]",
        started.elapsed()
    );
}

#[test]
fn criterion_3_no_signaling_suite() {
    let started = std::time::Instant::now();
    let dims = [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2), (4, 3)];
    for case in 0..200u64 {
        let (da, db) = dims[case as usize % dims.len()];
        let mut rng = rng_for(30_000 + case, 0);
        let psi = random_state_vector::<f64>(da * db, &mut rng);
        let contexts = vec![
            qkin::random::random_pvm::<f64>(da, "A1", &mut rng).unwrap(),
            qkin::random::random_pvm::<f64>(da, "A2", &mut rng).unwrap(),
        ];
        let pvm_b = qkin::random::random_pvm::<f64>(db, "B", &mut rng).unwrap();
        let report =
            qkin::conditionalization::no_signaling_check(&psi, da, db, &contexts, &pvm_b).unwrap();
        assert!(report.pass, "marginal deviation {}", report.max_deviation);
        assert!(report.max_deviation < 1e-9);

        let rho_b = partial_trace(&DensityOperator::from_pure(&psi), &[da, db], &[1]).unwrap();
        for pvm in &contexts {
            let ensemble = remote_steering(&psi, da, db, pvm).unwrap();
            let mixture = ensemble.mixture().unwrap();
            let dev = mixture.matrix().max_abs_diff(rho_b.matrix());
            assert!(dev < 1e-9, "refinement deviation {dev}");
        }
    }
    println!(
        "acceptance criterion 3 (no-signaling and refinement suite): PASS \
         [200 bipartite states, {:?}]",
        started.elapsed()
    );
}

#[test]
fn criterion_4_decoherence_suite() {
    let started = std::time::Instant::now();

    // Pointer conservation and ζ bounds across a family of specs.
    let mut rng = rng_for(40_000, 0);
    for trial in 0..24 {
        let m_dim = 2 + trial % 3;
        let n_env = 3 + trial % 5;
        let couplings: Vec<Vec<f64>> = (0..m_dim)
            .map(|_| {
                (0..n_env)
                    .map(|_| 3.0 * standard_normal::<f64>(&mut rng))
                    .collect()
            })
            .collect();
        let env = EnvironmentSpec::uniform(couplings).unwrap();
        let h = build_interaction_hamiltonian(&env);
        let values: Vec<f64> = (0..m_dim).map(|k| k as f64 + 1.0).collect();
        let a = pointer_observable(&values, n_env);
        assert!((&(&a * &h) - &(&h * &a)).max_abs() < 1e-12);
        for t in [0.0, 0.7, 4.2] {
            for k in 0..m_dim {
                let zkk = decoherence_factor(&env, k, k, t).unwrap();
                assert!((zkk.re - 1.0).abs() < 1e-12 && zkk.im.abs() < 1e-12);
                for kp in 0..m_dim {
                    assert!(decoherence_factor(&env, k, kp, t).unwrap().norm() <= 1.0 + 1e-12);
                }
            }
        }
    }

    // Analytic zero of the two-mode spec at t = π.
    let two_mode = EnvironmentSpec::<f64>::uniform(vec![vec![0.0, 0.0], vec![1.0, 2.0]]).unwrap();
    let zeta = decoherence_factor(&two_mode, 0, 1, std::f64::consts::PI).unwrap();
    assert!(
        zeta.norm() < 1e-12,
        "analytic zero missed: |zeta| = {}",
        zeta.norm()
    );

    // Closed form against the brute-force tripartite trace, up to the
    // configured total dimension 4096 (= 4 x 4 x 256).
    let mut max_dev: f64 = 0.0;
    for (s_dim, m_dim, n_env) in [
        (2usize, 2usize, 8usize),
        (3, 2, 16),
        (2, 4, 64),
        (4, 4, 256),
    ] {
        let couplings: Vec<Vec<f64>> = (0..m_dim)
            .map(|_| {
                (0..n_env)
                    .map(|_| 2.0 * standard_normal::<f64>(&mut rng))
                    .collect()
            })
            .collect();
        let env = EnvironmentSpec::uniform(couplings).unwrap();
        let c_amps = random_state_vector::<f64>(m_dim, &mut rng)
            .amplitudes()
            .to_vec();
        let s_vectors = (0..m_dim)
            .map(|_| random_state_vector::<f64>(s_dim, &mut rng))
            .collect();
        let state = TriDecomposedState::new(c_amps, s_vectors, env).unwrap();
        for t in [0.0, 1.3] {
            let checked = reduced_macro_state_cross_checked(&state, t).unwrap();
            let dev = checked
                .brute_force_deviation
                .expect("within cross-check cap");
            assert!(dev < 1e-10, "closed form vs brute force {dev}");
            max_dev = max_dev.max(dev);
        }
    }

    // Long-time average of |ζ| for a 100-mode random environment.
    let couplings: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..100).map(|_| standard_normal::<f64>(&mut rng)).collect())
        .collect();
    let env = EnvironmentSpec::uniform(couplings).unwrap();
    let samples = 1000;
    let mut total = 0.0;
    for j in 1..=samples {
        total += decoherence_factor(&env, 0, 1, 0.5 * j as f64)
            .unwrap()
            .norm();
    }
    let average = total / samples as f64;
    assert!(average < 0.3, "long-time average |zeta| = {average}");

    println!(
        "acceptance criterion 4 (decoherence suite): PASS \
         [cross-check max dev {max_dev:.2e}, avg |zeta| {average:.3}, {:?}]",
        started.elapsed()
    );
}

#[test]
fn criterion_5_tomography_suite() {
    let started = std::time::Instant::now();

    // Exact round trips at d in {2, 3, 4}.
    let mut worst = 0.0f64;
    for d in [2usize, 3, 4] {
        let f = if d == 2 {
            qubit_fiducial_set::<f64>()
        } else {
            general_fiducial_set(d).unwrap()
        };
        for seed in 0..8u64 {
            let mut rng = rng_for(50_000 + seed, d as u64);
            let source = random_density_operator::<f64>(d, &mut rng);
            let table = exact_statistics(&source, &f).unwrap();
            let rec = reconstruct_state(&table, &f).unwrap();
            let err = trace_distance(&source, &rec.state).unwrap();
            assert!(err < 1e-9, "exact round trip error {err} at d = {d}");
            worst = worst.max(err);
        }
    }

    // Sampled scaling through the CLI demo: median error exponent.
    let dir = tempfile::tempdir().unwrap();
    let pass = run_demo(
        DemoKind::Tomography,
        42,
        serde_json::json!({"d": 2, "schedule": [100, 400, 1600], "n_seeds": 20}),
        dir.path(),
    );
    assert!(pass, "tomography demo checks failed");
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("tomography_summary.json")).unwrap(),
    )
    .unwrap();
    let exponent = summary["fitted_exponent"].as_f64().unwrap();
    assert!(
        (-0.65..=-0.35).contains(&exponent),
        "fitted exponent {exponent}"
    );
    assert!(summary["monotone_decreasing"].as_bool().unwrap());

    println!(
        "acceptance criterion 5 (tomography suite): PASS \
         [max exact error {worst:.2e}, fitted exponent {exponent:.3}, {:?}]",
        started.elapsed()
    );
}

#[test]
fn criterion_6_information_loss_theorem() {
    let started = std::time::Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let pass = run_demo(
        DemoKind::Infoloss,
        42,
        serde_json::json!({"dims": [2, 3], "n_sources": 50, "n_copies": 1200, "control": true}),
        dir.path(),
    );
    assert!(pass, "infoloss demo checks failed");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("infoloss_report.json")).unwrap())
            .unwrap();
    let sources = report["sources"].as_array().unwrap();
    assert_eq!(sources.len(), 50);
    let mut min_disturbance = f64::INFINITY;
    for source in sources {
        let disturbance = source["disturbance"].as_f64().unwrap();
        let clone = source["clone_trace_distance"].as_f64().unwrap();
        assert!(
            !(disturbance < 0.01 && clone < 0.01),
            "pipeline cloned a pure source: disturbance {disturbance}, clone {clone}"
        );
        assert_eq!(source["verdict"].as_str().unwrap(), "information loss");
        min_disturbance = min_disturbance.min(disturbance);
    }
    for control in report["controls"].as_array().unwrap() {
        assert!(control["disturbance"].as_f64().unwrap() < 1e-9);
        assert!(control["single_copy_clone_distance"].as_f64().unwrap() > 0.01);
    }
    println!(
        "acceptance criterion 6 (information loss theorem demo): PASS \
         [50 sources, min disturbance {min_disturbance:.3}, {:?}]",
        started.elapsed()
    );
}

#[test]
fn criterion_7_tensor_power_distinguishability() {
    let started = std::time::Instant::now();
    let example = build_steering_example::<f64>();
    let b1 = &example.trine_one[0];
    let c = &example.trine_one[1];
    let one = tensor_power_overlap(b1, c, 1).unwrap();
    assert!((one - 0.25).abs() < 1e-12);
    for n in 1..=20u32 {
        let overlap = tensor_power_overlap(b1, c, n).unwrap();
        let expected = 0.25f64.powi(n as i32);
        assert!(
            (overlap - expected).abs() < 1e-12,
            "n = {n}: overlap {overlap} vs 4^-n {expected}"
        );
    }
    println!(
        "acceptance criterion 7 (tensor-power distinguishability): PASS \
         [trine overlap^n matches 4^-n for n <= 20, {:?}]",
        started.elapsed()
    );
}

#[test]
fn criterion_8_byte_identical_reruns() {
    let started = std::time::Instant::now();
    let demos: Vec<(DemoKind, serde_json::Value)> = vec![
        (DemoKind::Steering, serde_json::json!({})),
        (
            DemoKind::Decoherence,
            serde_json::json!({
                "random_spec": {"n_env": 40, "m_dim": 2},
                "t_grid": {"start": 0.0, "stop": 30.0, "points": 121}
            }),
        ),
        (
            DemoKind::Tomography,
            serde_json::json!({"d": 2, "schedule": [100, 400], "n_seeds": 9}),
        ),
        (
            DemoKind::Infoloss,
            serde_json::json!({"dims": [2], "n_sources": 6, "n_copies": 300, "control": true}),
        ),
    ];
    for (demo, params) in demos {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let config_a = RunConfig {
            demo,
            seed: 1234,
            params: params.clone(),
            output_dir: Some(dir_a.path().to_path_buf()),
        };
        let config_b = RunConfig {
            demo,
            seed: 1234,
            params,
            output_dir: Some(dir_b.path().to_path_buf()),
        };
        let out_a = run(&config_a, &Overrides::default()).unwrap();
        let out_b = run(&config_b, &Overrides::default()).unwrap();
        assert_eq!(out_a.artifacts.len(), out_b.artifacts.len());
        for (a, b) in out_a.artifacts.iter().zip(&out_b.artifacts) {
            assert_eq!(a.file_name(), b.file_name());
            let bytes_a = fs::read(a).unwrap();
            let bytes_b = fs::read(b).unwrap();
            assert_eq!(
                bytes_a,
                bytes_b,
                "artifact {:?} differs between reruns",
                a.file_name()
            );
        }
    }
    println!(
        "acceptance criterion 8 (byte-identical reruns): PASS [{:?}]",
        started.elapsed()
    );
}
