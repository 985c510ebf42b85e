//! CLI behavior: config handling, exit codes, artifact content, overrides.

use std::fs;
use std::path::Path;
use std::process::Command;

use qkin_cli::{run, DemoKind, Overrides, RunConfig};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qkin"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn exit_codes_reflect_pass_fail_error() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(
        dir.path(),
        r#"{"demo": "steering", "seed": 1, "params": {}}"#,
    );
    let status = binary()
        .args(["run", "--config"])
        .arg(&good)
        .args(["--out"])
        .arg(dir.path().join("good"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let corrupted = write_config(
        dir.path(),
        r#"{"demo": "steering", "seed": 1, "params": {"inject_corruption": true}}"#,
    );
    let status = binary()
        .args(["run", "--config"])
        .arg(&corrupted)
        .args(["--out"])
        .arg(dir.path().join("bad"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    let status = binary()
        .args(["run", "--config"])
        .arg(dir.path().join("missing.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let malformed = write_config(dir.path(), r#"{"demo": "steering""#);
    let status = binary()
        .args(["run", "--config"])
        .arg(&malformed)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn decoherence_requires_exactly_one_spec() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        demo: DemoKind::Decoherence,
        seed: 3,
        params: serde_json::json!({"t_grid": [0.0, 1.0]}),
        output_dir: Some(dir.path().to_path_buf()),
    };
    assert!(run(&config, &Overrides::default()).is_err());
}

#[test]
fn decoherence_rejects_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        demo: DemoKind::Decoherence,
        seed: 3,
        params: serde_json::json!({
            "random_spec": {"n_env": 5},
            "t_grid": []
        }),
        output_dir: Some(dir.path().to_path_buf()),
    };
    let err = run(&config, &Overrides::default()).unwrap_err();
    assert!(
        format!("{err:#}").contains("grid"),
        "unexpected error: {err:#}"
    );
}

#[test]
fn two_mode_sweep_hits_the_analytic_zero() {
    let dir = tempfile::tempdir().unwrap();
    // Grid of dyadic steps so t = π lands exactly on a grid point.
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let config = RunConfig {
        demo: DemoKind::Decoherence,
        seed: 3,
        params: serde_json::json!({
            "spec": {
                "gamma_re": [s, s],
                "gamma_im": [0.0, 0.0],
                "couplings": [[0.0, 0.0], [1.0, 2.0]],
                "c_re": [s, s],
                "c_im": [0.0, 0.0],
                "s_vectors": [
                    {"rows": 2, "cols": 1, "re": [1.0, 0.0], "im": [0.0, 0.0]},
                    {"rows": 2, "cols": 1, "re": [0.0, 1.0], "im": [0.0, 0.0]}
                ]
            },
            "t_grid": {"start": 0.0, "stop": 2.0 * std::f64::consts::PI, "points": 129}
        }),
        output_dir: Some(dir.path().to_path_buf()),
    };
    let outcome = run(&config, &Overrides::default()).unwrap();
    assert!(outcome.pass);
    let csv = fs::read_to_string(dir.path().join("decoherence_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,zeta_0_1_abs,classicality");
    let pi_row = csv
        .lines()
        .find(|line| line.starts_with("3.1415926535897931e0"))
        .expect("grid point at pi");
    let zeta: f64 = pi_row.split(',').nth(1).unwrap().parse().unwrap();
    assert!(zeta < 1e-12, "|zeta(pi)| = {zeta}");

    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("decoherence_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["first_classical_t"].as_f64(), Some(0.0));
    assert!(summary["checks"]["pointer_commutes"].as_bool().unwrap());
}

#[test]
fn random_environment_average_zeta_is_small() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        demo: DemoKind::Decoherence,
        seed: 42,
        params: serde_json::json!({
            "random_spec": {"n_env": 100, "m_dim": 2},
            "t_grid": {"start": 0.5, "stop": 500.0, "points": 1000}
        }),
        output_dir: Some(dir.path().to_path_buf()),
    };
    let outcome = run(&config, &Overrides::default()).unwrap();
    assert!(outcome.pass);
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("decoherence_summary.json")).unwrap(),
    )
    .unwrap();
    let mean = summary["mean_abs_zeta"][0].as_f64().unwrap();
    assert!(mean < 0.3, "mean |zeta| = {mean}");
}

#[test]
fn threshold_flag_overrides_params() {
    let dir = tempfile::tempdir().unwrap();
    let params = serde_json::json!({
        "random_spec": {"n_env": 30, "m_dim": 2},
        "t_grid": {"start": 0.0, "stop": 20.0, "points": 81},
        "threshold": 0.5
    });
    let config = RunConfig {
        demo: DemoKind::Decoherence,
        seed: 9,
        params,
        output_dir: Some(dir.path().to_path_buf()),
    };
    run(
        &config,
        &Overrides {
            threshold: Some(1e-6),
            ..Default::default()
        },
    )
    .unwrap();
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("decoherence_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(
        summary["config"]["threshold_effective"].as_f64(),
        Some(1e-6)
    );
}

#[test]
fn tomography_exact_mode_reports_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        demo: DemoKind::Tomography,
        seed: 11,
        params: serde_json::json!({"d": 3, "schedule": null, "n_seeds": 6}),
        output_dir: Some(dir.path().to_path_buf()),
    };
    let outcome = run(&config, &Overrides::default()).unwrap();
    assert!(outcome.pass);
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("tomography_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["mode"].as_str(), Some("exact"));
    assert!(summary["max_exact_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn tomography_rejects_bad_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        demo: DemoKind::Tomography,
        seed: 11,
        params: serde_json::json!({"d": 2, "schedule": [100, 0], "n_seeds": 4}),
        output_dir: Some(dir.path().to_path_buf()),
    };
    assert!(run(&config, &Overrides::default()).is_err());
}

#[test]
fn parallel_replicas_match_sequential_bytes() {
    let params = serde_json::json!({"d": 2, "schedule": [64, 256], "n_seeds": 8});
    let dir_seq = tempfile::tempdir().unwrap();
    let dir_par = tempfile::tempdir().unwrap();
    let config_seq = RunConfig {
        demo: DemoKind::Tomography,
        seed: 5,
        params: params.clone(),
        output_dir: Some(dir_seq.path().to_path_buf()),
    };
    let config_par = RunConfig {
        demo: DemoKind::Tomography,
        seed: 5,
        params,
        output_dir: Some(dir_par.path().to_path_buf()),
    };
    run(&config_seq, &Overrides::default()).unwrap();
    run(
        &config_par,
        &Overrides {
            parallel: Some(4),
            ..Default::default()
        },
    )
    .unwrap();
    for name in ["tomography_scaling.csv", "tomography_summary.json"] {
        let a = fs::read(dir_seq.path().join(name)).unwrap();
        let b = fs::read(dir_par.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between sequential and parallel runs");
    }
}

#[test]
fn infoloss_flags_maximally_mixed_control() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        demo: DemoKind::Infoloss,
        seed: 21,
        params: serde_json::json!({"dims": [2], "n_sources": 4, "n_copies": 400}),
        output_dir: Some(dir.path().to_path_buf()),
    };
    let outcome = run(&config, &Overrides::default()).unwrap();
    assert!(outcome.pass);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("infoloss_report.json")).unwrap())
            .unwrap();
    let control = &report["controls"][0];
    assert!(control["disturbance"].as_f64().unwrap() < 1e-12);
    assert!(control["single_copy_clone_distance"].as_f64().unwrap() > 0.01);
    assert!(control["note"].as_str().unwrap().contains("fixed point"));
}

#[test]
fn out_dir_env_variable_is_honored() {
    // resolve_output_dir consults QKIN_OUT_DIR below flag and config.
    let config = RunConfig {
        demo: DemoKind::Steering,
        seed: 1,
        params: serde_json::json!({}),
        output_dir: None,
    };
    std::env::set_var(qkin_cli::OUT_DIR_ENV, "/tmp/qkin-env-test");
    let resolved = qkin_cli::resolve_output_dir(&config, &Overrides::default());
    std::env::remove_var(qkin_cli::OUT_DIR_ENV);
    assert_eq!(resolved, std::path::PathBuf::from("/tmp/qkin-env-test"));
}
