//! `sweep`: stationary-state indicators and verdicts over a parameter grid.

use std::fmt::Write;

use rayon::prelude::*;

use sampledyn_core::analysis::{check_homogeneous_uniqueness, check_theorem4, find_stationary};
use sampledyn_core::games::CoordinationGame;
use sampledyn_core::{Environment, SampleSizeDistribution};

use super::system;
use crate::config::{Model, SweepParameter};
use crate::{CliError, Output, RunConfig};

const DEFAULT_BIG_K: u32 = 1000;

/// One grid point's results, already formatted as CSV fields.
fn row(value: f64, env: &Environment, one_pop: bool) -> Result<String, CliError> {
    let model = Model::Sampling {
        env: env.clone(),
        one_pop,
    };
    let d = system(&model, "sweep")?;
    let set = find_stationary(&d);
    let stable = set.stable_interior().next();
    let (sp1, sp2) = stable.map_or((String::new(), String::new()), |s| {
        (s.state.p1().to_string(), s.state.p2().to_string())
    });
    let uniqueness = check_homogeneous_uniqueness(env).map_or("n/a".to_string(), |r| r.verdict().to_string());
    let (t1, t2) = match check_theorem4(env) {
        _ if one_pop => ("n/a".into(), "n/a".into()),
        Ok(r) => (r.parts[0].verdict.to_string(), r.parts[1].verdict.to_string()),
        Err(_) => ("n/a".into(), "n/a".into()),
    };
    let interior = if set.is_continuum() {
        "continuum".to_string()
    } else {
        set.interior().count().to_string()
    };
    Ok(format!(
        "{value},{interior},{},{sp1},{sp2},{uniqueness},{t1},{t2}",
        stable.is_some()
    ))
}

fn mass_theta(k: u32, big_k: u32, mass: f64) -> Result<SampleSizeDistribution, CliError> {
    let pairs: Vec<(u32, f64)> = [(k, mass), (big_k, 1.0 - mass)]
        .into_iter()
        .filter(|p| p.1 > 0.0)
        .collect();
    SampleSizeDistribution::new(pairs).map_err(|e| CliError::config("sweep", &e.to_string()))
}

pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = cfg.sweep.ok_or_else(|| CliError::config("sweep", "missing"))?;
    let mut env_spec = cfg
        .environment
        .clone()
        .ok_or_else(|| CliError::config("environment", "missing"))?;
    let k = spec.k.unwrap_or(2);
    let big_k = spec.big_k.unwrap_or(DEFAULT_BIG_K);
    if spec.parameter == SweepParameter::Mass {
        if env_spec.theta.is_some() || env_spec.theta1.is_some() || env_spec.theta2.is_some() {
            return Err(CliError::config(
                "environment.theta",
                "a mass sweep builds θ itself; remove it",
            ));
        }
        if k == 0 || big_k == 0 || k == big_k {
            return Err(CliError::config("sweep", "need distinct positive k and big_k"));
        }
        if spec.from < 0.0 || spec.to > 1.0 {
            return Err(CliError::config("sweep", "masses must lie in [0, 1]"));
        }
        env_spec.theta = Some(mass_theta(k, big_k, 0.5)?);
    }
    let shared_u = env_spec.u.is_some();
    let (base, one_pop) = match env_spec.resolve()? {
        Model::Sampling { env, one_pop } => (env, one_pop),
        other => {
            return Err(CliError::config(
                "environment",
                &format!("sweep does not support {} models", other.kind()),
            ))
        }
    };
    let values = spec.values()?;
    let rows: Vec<String> = values
        .par_iter()
        .map(|&v| {
            let env = match spec.parameter {
                SweepParameter::Mass => {
                    let t = mass_theta(k, big_k, v)?;
                    Environment {
                        theta1: t.clone(),
                        theta2: t,
                        ..base.clone()
                    }
                }
                SweepParameter::U => {
                    let game = if shared_u {
                        CoordinationGame::symmetric(v)
                    } else {
                        CoordinationGame::new(v, 1.0 / v)
                    }
                    .map_err(|e| CliError::config("sweep", &e.to_string()))?;
                    Environment { game, ..base.clone() }
                }
            };
            row(v, &env, one_pop)
        })
        .collect::<Result<_, _>>()?;
    let mut csv = String::from(
        "value,interior_states,stable_interior,stable_p1,stable_p2,uniqueness,miscoordination_part1,miscoordination_part2\n",
    );
    for r in &rows {
        writeln!(csv, "{r}").unwrap();
    }
    let hits: Vec<f64> = values
        .iter()
        .zip(&rows)
        .filter(|(_, r)| r.split(',').nth(2) == Some("true"))
        .map(|(v, _)| *v)
        .collect();
    let mut out = Output::default();
    match (hits.first(), hits.last()) {
        (Some(a), Some(b)) => out.line(format!(
            "stable interior state at {} of {} grid points, from {a} to {b}",
            hits.len(),
            values.len()
        )),
        _ => out.line(format!(
            "no stable interior state at any of {} grid points",
            values.len()
        )),
    }
    out.file("sweep.csv", csv);
    Ok(out)
}
