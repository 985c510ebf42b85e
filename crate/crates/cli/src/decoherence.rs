//! `run --config` demo: decoherence sweep over a time grid, CSV + summary.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use qkin::decoherence::{
    build_interaction_hamiltonian, decoherence_sweep, evolve_environment, pointer_observable,
    EnvironmentSpec, TriDecomposedState,
};
use qkin::random::{random_state_vector, rng_for, standard_normal};

use crate::fmt::{csv_row, float17};
use crate::{parse_params, write_json, write_text, RunConfig, RunOutcome};

/// Time grid: an explicit ascending list or a uniform linspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Explicit(Vec<f64>),
    Linear {
        start: f64,
        stop: f64,
        points: usize,
    },
}

impl GridSpec {
    fn materialize(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Explicit(ts) => Ok(ts.clone()),
            GridSpec::Linear {
                start,
                stop,
                points,
            } => {
                if *points == 0 {
                    bail!("t_grid.points must be positive");
                }
                if *points == 1 {
                    return Ok(vec![*start]);
                }
                let step = (stop - start) / (*points as f64 - 1.0);
                Ok((0..*points).map(|i| start + step * i as f64).collect())
            }
        }
    }
}

/// Seeded random environment in place of an explicit spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpecParams {
    pub n_env: usize,
    #[serde(default = "default_m_dim")]
    pub m_dim: usize,
    #[serde(default = "default_coupling_scale")]
    pub coupling_scale: f64,
    #[serde(default = "default_s_dim")]
    pub s_dim: usize,
}

fn default_m_dim() -> usize {
    2
}

fn default_coupling_scale() -> f64 {
    1.0
}

fn default_s_dim() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceParams {
    /// Explicit model `{gamma_re, gamma_im, couplings, c_re, c_im,
    /// s_vectors}`; exactly one of `spec` / `random_spec` must be present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<TriDecomposedState<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_spec: Option<RandomSpecParams>,
    pub t_grid: GridSpec,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    1e-3
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    demo: &'static str,
    seed: u64,
    params: &'a DecoherenceParams,
    threshold_effective: f64,
}

#[derive(Serialize)]
struct Checks {
    zeta_within_unit_bound: bool,
    environment_norms_unit: bool,
    pointer_commutes: bool,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: ConfigEcho<'a>,
    pointer_dim: usize,
    n_env: usize,
    pairs: Vec<(usize, usize)>,
    /// First grid time with classicality below threshold, if any.
    first_classical_t: Option<f64>,
    final_classicality: f64,
    /// Time-averaged |ζ| per pair over the grid.
    mean_abs_zeta: Vec<f64>,
    pointer_commutator_max: f64,
    checks: Checks,
    pass: bool,
}

pub fn run(config: &RunConfig, out_dir: &Path, threshold_flag: Option<f64>) -> Result<RunOutcome> {
    let params: DecoherenceParams = parse_params(config)?;
    let threshold = threshold_flag.unwrap_or(params.threshold);
    if !(threshold > 0.0 && threshold < 1.0) {
        bail!("classicality threshold must lie in (0, 1)");
    }

    let state = match (&params.spec, &params.random_spec) {
        (Some(spec), None) => spec.clone(),
        (None, Some(random)) => random_state(random, config.seed)?,
        (Some(_), Some(_)) => bail!("config supplies both spec and random_spec"),
        (None, None) => bail!("config supplies neither spec nor random_spec"),
    };
    let env = state.env().clone();
    let grid = params.t_grid.materialize()?;
    let table = decoherence_sweep(&env, &state, &grid).context("decoherence sweep")?;

    // CSV artifact.
    let mut csv = String::new();
    csv.push_str(&table.csv_header());
    csv.push('\n');
    for row in &table.rows {
        let mut fields = vec![float17(row.t)];
        fields.extend(row.zeta_abs.iter().map(|&z| float17(z)));
        fields.push(float17(row.classicality));
        csv.push_str(&csv_row(&fields));
        csv.push('\n');
    }
    let csv_path = out_dir.join("decoherence_sweep.csv");
    write_text(&csv_path, &csv)?;

    // Checks.
    let zeta_within_unit_bound = table
        .rows
        .iter()
        .all(|row| row.zeta_abs.iter().all(|&z| z <= 1.0 + 1e-12));
    let probe_times: Vec<f64> = {
        let n = grid.len();
        [0, n / 2, n - 1].iter().map(|&i| grid[i]).collect()
    };
    let mut environment_norms_unit = true;
    for &t in &probe_times {
        for k in 0..env.pointer_dim() {
            let eps = evolve_environment(&env, k, t)?;
            if (eps.norm() - 1.0).abs() > 1e-12 {
                environment_norms_unit = false;
            }
        }
    }
    let h = build_interaction_hamiltonian(&env);
    let values: Vec<f64> = (0..env.pointer_dim()).map(|k| k as f64 + 1.0).collect();
    let a = pointer_observable(&values, env.n_env());
    let pointer_commutator_max = (&(&a * &h) - &(&h * &a)).max_abs();
    let pointer_commutes = pointer_commutator_max < 1e-12;

    let first_classical_t = table
        .rows
        .iter()
        .find(|row| row.classicality < threshold)
        .map(|row| row.t);
    let final_classicality = table.rows.last().expect("nonempty grid").classicality;
    let mean_abs_zeta: Vec<f64> = (0..table.pairs.len())
        .map(|p| {
            table.rows.iter().map(|row| row.zeta_abs[p]).sum::<f64>() / table.rows.len() as f64
        })
        .collect();

    let checks = Checks {
        zeta_within_unit_bound,
        environment_norms_unit,
        pointer_commutes,
    };
    let pass = zeta_within_unit_bound && environment_norms_unit && pointer_commutes;
    let summary = Summary {
        config: ConfigEcho {
            demo: "decoherence",
            seed: config.seed,
            params: &params,
            threshold_effective: threshold,
        },
        pointer_dim: env.pointer_dim(),
        n_env: env.n_env(),
        pairs: table.pairs.clone(),
        first_classical_t,
        final_classicality,
        mean_abs_zeta,
        pointer_commutator_max,
        checks,
        pass,
    };
    let json_path = out_dir.join("decoherence_summary.json");
    write_json(&json_path, &summary)?;

    Ok(RunOutcome {
        pass,
        artifacts: vec![csv_path, json_path],
    })
}

/// Seeded random model: Gaussian couplings, uniform γ, Haar-ish amplitudes
/// and micro kets.
fn random_state(params: &RandomSpecParams, seed: u64) -> Result<TriDecomposedState<f64>> {
    if params.n_env == 0 || params.m_dim == 0 || params.s_dim == 0 {
        bail!("random_spec dimensions must be positive");
    }
    let mut rng = rng_for(seed, 0);
    let couplings: Vec<Vec<f64>> = (0..params.m_dim)
        .map(|_| {
            (0..params.n_env)
                .map(|_| params.coupling_scale * standard_normal::<f64>(&mut rng))
                .collect()
        })
        .collect();
    let env = EnvironmentSpec::uniform(couplings)?;
    let amplitudes = random_state_vector::<f64>(params.m_dim, &mut rng);
    let s_vectors = (0..params.m_dim)
        .map(|_| random_state_vector::<f64>(params.s_dim, &mut rng))
        .collect();
    let c_amps = amplitudes.amplitudes().to_vec();
    Ok(TriDecomposedState::new(c_amps, s_vectors, env)?)
}
