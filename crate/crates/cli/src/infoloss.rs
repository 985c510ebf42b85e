//! `run --config` demo: the measure → table → prepare pipeline over a family
//! of seeded pure sources, with the maximally mixed control.

use std::path::Path;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qkin::infoloss::{
    general_fiducial_set, measure_prepare_pipeline, qubit_fiducial_set, FiducialSet,
};
use qkin::linalg::DensityOperator;
use qkin::random::{random_state_vector, rng_for};

use crate::{parse_params, write_json, RunConfig, RunOutcome};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfolossParams {
    /// Hilbert-space dimensions the sources cycle through.
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_sources")]
    pub n_sources: usize,
    /// Copies measured per source.
    #[serde(default = "default_copies")]
    pub n_copies: u64,
    /// Also run the maximally mixed control per dimension.
    #[serde(default = "default_control")]
    pub control: bool,
}

fn default_dims() -> Vec<usize> {
    vec![2, 3]
}

fn default_sources() -> usize {
    50
}

fn default_copies() -> u64 {
    1200
}

fn default_control() -> bool {
    true
}

/// The dichotomy threshold: a run "clones" only if disturbance and clone
/// distance are both below this.
const DICHOTOMY_BOUND: f64 = 0.01;

#[derive(Serialize)]
struct ConfigEcho<'a> {
    demo: &'static str,
    seed: u64,
    params: &'a InfolossParams,
}

#[derive(Serialize)]
struct SourceVerdict {
    index: usize,
    dim: usize,
    disturbance: f64,
    clone_trace_distance: f64,
    clone_fidelity: f64,
    verdict: &'static str,
}

#[derive(Serialize)]
struct ControlReport {
    dim: usize,
    disturbance: f64,
    /// Clone distance when only a single copy feeds the table.
    single_copy_clone_distance: f64,
    note: &'static str,
}

#[derive(Serialize)]
struct Report<'a> {
    config: ConfigEcho<'a>,
    dichotomy_bound: f64,
    sources: Vec<SourceVerdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    controls: Vec<ControlReport>,
    all_information_loss: bool,
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
    let params: InfolossParams = parse_params(config)?;
    if params.dims.is_empty() || params.n_sources == 0 {
        bail!("dims and n_sources must be nonempty");
    }
    if params.dims.iter().any(|&d| d < 2) {
        bail!("source dimensions must be at least 2");
    }
    let seed = config.seed;

    let evaluate = |index: usize| -> Result<SourceVerdict> {
        let dim = params.dims[index % params.dims.len()];
        let f = fiducial_for(dim)?;
        let mut rng = rng_for(seed, 1_000 + index as u64);
        let source = DensityOperator::from_pure(&random_state_vector::<f64>(dim, &mut rng));
        let pipeline_seed = seed.wrapping_add(1 + index as u64).wrapping_mul(2_000_003);
        let report = measure_prepare_pipeline(&source, &f, params.n_copies, pipeline_seed)?;
        let cloned =
            report.disturbance < DICHOTOMY_BOUND && report.clone_trace_distance < DICHOTOMY_BOUND;
        Ok(SourceVerdict {
            index,
            dim,
            disturbance: report.disturbance,
            clone_trace_distance: report.clone_trace_distance,
            clone_fidelity: report.clone_fidelity,
            verdict: if cloned { "cloned" } else { "information loss" },
        })
    };

    let sources: Vec<SourceVerdict> = if parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()?;
        pool.install(|| {
            (0..params.n_sources)
                .into_par_iter()
                .map(evaluate)
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        (0..params.n_sources)
            .map(evaluate)
            .collect::<Result<Vec<_>>>()?
    };

    let mut controls = Vec::new();
    let mut controls_ok = true;
    if params.control {
        for &dim in &params.dims {
            let f = fiducial_for(dim)?;
            let source = DensityOperator::<f64>::maximally_mixed(dim);
            let full = measure_prepare_pipeline(&source, &f, params.n_copies, seed)?;
            let single = measure_prepare_pipeline(&source, &f, 1, seed)?;
            controls_ok &= full.disturbance < 1e-9;
            controls_ok &= single.clone_trace_distance > DICHOTOMY_BOUND;
            controls.push(ControlReport {
                dim,
                disturbance: full.disturbance,
                single_copy_clone_distance: single.clone_trace_distance,
                note: "maximally mixed source is a fixed point of every fiducial \
                       dephasing; its table still cannot be cloned from one copy",
            });
        }
    }

    let all_information_loss = sources.iter().all(|s| s.verdict == "information loss");
    let pass = all_information_loss && controls_ok;
    let report = Report {
        config: ConfigEcho {
            demo: "infoloss",
            seed,
            params: &params,
        },
        dichotomy_bound: DICHOTOMY_BOUND,
        sources,
        controls,
        all_information_loss,
        pass,
    };
    let path = out_dir.join("infoloss_report.json");
    write_json(&path, &report)?;
    Ok(RunOutcome {
        pass,
        artifacts: vec![path],
    })
}
