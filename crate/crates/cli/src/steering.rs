//! `run --config` demo: the 3⊗2 steering example, end to end.

use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use qkin::conditionalization::{build_steering_example, SteeringReport};
use qkin::linalg::StateVector;
use qkin::scalar::c;

use crate::{parse_params, write_json, RunConfig, RunOutcome};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteeringParams {
    /// Perturb the entangled state before verification; the run must then
    /// fail and exit nonzero.
    #[serde(default)]
    pub inject_corruption: bool,
}

#[derive(Serialize)]
struct ConfigEcho {
    demo: &'static str,
    seed: u64,
    params: SteeringParams,
}

#[derive(Serialize)]
struct SteeringArtifact {
    config: ConfigEcho,
    report: SteeringReport<f64>,
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    let params: SteeringParams = parse_params(config)?;
    let mut example = build_steering_example::<f64>();
    if params.inject_corruption {
        let mut amps = example.psi_ab.amplitudes().to_vec();
        amps[0] += c(1e-3, 0.0);
        example = example.with_psi(StateVector::normalized(amps)?);
    }
    let report = example.verify()?;
    let pass = report.pass;

    let artifact = SteeringArtifact {
        config: ConfigEcho {
            demo: "steering",
            seed: config.seed,
            params,
        },
        report,
    };
    let path = out_dir.join("steering_report.json");
    write_json(&path, &artifact)?;
    Ok(RunOutcome {
        pass,
        artifacts: vec![path],
    })
}
