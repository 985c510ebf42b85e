//! `run --config` demo: tomography scaling — reconstruction error against
//! sample count, with a fitted error exponent.

use std::path::Path;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qkin::infoloss::{
    exact_statistics, general_fiducial_set, qubit_fiducial_set, reconstruct_state,
    sampled_statistics, FiducialSet,
};
use qkin::linalg::{trace_distance, DensityOperator};
use qkin::random::{random_state_vector, rng_for};

use crate::fmt::{csv_row, float17};
use crate::{parse_params, write_json, write_text, RunConfig, RunOutcome};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyParams {
    #[serde(default = "default_dim")]
    pub d: usize,
    /// Sample counts per observable; absent means exact mode.
    #[serde(default = "default_schedule")]
    pub schedule: Option<Vec<u64>>,
    #[serde(default = "default_seeds")]
    pub n_seeds: usize,
}

fn default_dim() -> usize {
    2
}

fn default_schedule() -> Option<Vec<u64>> {
    Some(vec![100, 400, 1600])
}

fn default_seeds() -> usize {
    20
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    demo: &'static str,
    seed: u64,
    params: &'a TomographyParams,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: ConfigEcho<'a>,
    mode: &'static str,
    /// Exact mode: worst round-trip trace distance across seeds.
    #[serde(skip_serializing_if = "Option::is_none")]
    max_exact_error: Option<f64>,
    /// Sampled mode: (n, median trace distance) per schedule entry.
    #[serde(skip_serializing_if = "Option::is_none")]
    medians: Option<Vec<(u64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fitted_exponent: Option<f64>,
    monotone_decreasing: bool,
    pass: bool,
}

fn fiducial_for(d: usize) -> Result<FiducialSet<f64>> {
    Ok(if d == 2 {
        qubit_fiducial_set::<f64>()
    } else {
        general_fiducial_set::<f64>(d)?
    })
}

pub fn run(config: &RunConfig, out_dir: &Path, parallel: usize) -> Result<RunOutcome> {
    let params: TomographyParams = parse_params(config)?;
    if params.n_seeds == 0 {
        bail!("n_seeds must be positive");
    }
    let f = fiducial_for(params.d)?;
    let mut artifacts = Vec::new();

    let (summary, pass) = match &params.schedule {
        None => {
            // Exact mode: round-trip through exact statistics.
            let mut max_error = 0.0f64;
            for replicate in 0..params.n_seeds {
                let mut rng = rng_for(config.seed, replicate as u64);
                let source =
                    DensityOperator::from_pure(&random_state_vector::<f64>(params.d, &mut rng));
                let table = exact_statistics(&source, &f)?;
                let rec = reconstruct_state(&table, &f)?;
                max_error = max_error.max(trace_distance(&source, &rec.state)?);
            }
            let pass = max_error < 1e-9;
            (
                Summary {
                    config: ConfigEcho {
                        demo: "tomography",
                        seed: config.seed,
                        params: &params,
                    },
                    mode: "exact",
                    max_exact_error: Some(max_error),
                    medians: None,
                    fitted_exponent: None,
                    monotone_decreasing: true,
                    pass,
                },
                pass,
            )
        }
        Some(schedule) => {
            if schedule.is_empty() || schedule.contains(&0) {
                bail!("schedule entries must be positive");
            }
            let medians = median_errors(
                &f,
                params.d,
                schedule,
                params.n_seeds,
                config.seed,
                parallel,
            )?;
            let monotone = medians.windows(2).all(|w| w[1].1 < w[0].1);
            let exponent = fit_exponent(&medians);
            let pass = monotone && (-0.65..=-0.35).contains(&exponent);

            let mut csv = String::from("n,median_trace_distance\n");
            for &(n, median) in &medians {
                csv.push_str(&csv_row(&[n.to_string(), float17(median)]));
                csv.push('\n');
            }
            let csv_path = out_dir.join("tomography_scaling.csv");
            write_text(&csv_path, &csv)?;
            artifacts.push(csv_path);

            (
                Summary {
                    config: ConfigEcho {
                        demo: "tomography",
                        seed: config.seed,
                        params: &params,
                    },
                    mode: "sampled",
                    max_exact_error: None,
                    medians: Some(medians),
                    fitted_exponent: Some(exponent),
                    monotone_decreasing: monotone,
                    pass,
                },
                pass,
            )
        }
    };

    let json_path = out_dir.join("tomography_summary.json");
    write_json(&json_path, &summary)?;
    artifacts.push(json_path);
    Ok(RunOutcome { pass, artifacts })
}

/// Median reconstruction error per schedule entry over seeded replicates.
/// Replicates carry pre-assigned RNG streams, so parallel evaluation returns
/// the same numbers as sequential.
fn median_errors(
    f: &FiducialSet<f64>,
    d: usize,
    schedule: &[u64],
    n_seeds: usize,
    seed: u64,
    parallel: usize,
) -> Result<Vec<(u64, f64)>> {
    let mut out = Vec::with_capacity(schedule.len());
    for (step, &n) in schedule.iter().enumerate() {
        let replicate_error = |replicate: usize| -> Result<f64> {
            let mut rng = rng_for(seed, replicate as u64);
            let source = DensityOperator::from_pure(&random_state_vector::<f64>(d, &mut rng));
            // Distinct sampling seed per (replicate, schedule step).
            let sample_seed = seed
                .wrapping_add(1 + replicate as u64)
                .wrapping_mul(1_000_003)
                .wrapping_add(step as u64);
            let table = sampled_statistics(&source, f, n, sample_seed)?;
            let rec = reconstruct_state(&table, f)?;
            Ok(trace_distance(&source, &rec.state)?)
        };
        let mut errors: Vec<f64> = if parallel > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(parallel)
                .build()?;
            pool.install(|| {
                (0..n_seeds)
                    .into_par_iter()
                    .map(replicate_error)
                    .collect::<Result<Vec<_>>>()
            })?
        } else {
            (0..n_seeds)
                .map(replicate_error)
                .collect::<Result<Vec<_>>>()?
        };
        errors.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
        let median = if n_seeds % 2 == 1 {
            errors[n_seeds / 2]
        } else {
            0.5 * (errors[n_seeds / 2 - 1] + errors[n_seeds / 2])
        };
        out.push((n, median));
    }
    Ok(out)
}

/// Least-squares slope of log(median) against log(n).
fn fit_exponent(medians: &[(u64, f64)]) -> f64 {
    let points: Vec<(f64, f64)> = medians
        .iter()
        .map(|&(n, e)| ((n as f64).ln(), e.max(1e-300).ln()))
        .collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in points {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    num / den
}
