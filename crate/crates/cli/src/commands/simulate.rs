//! `trajectory`, `basins` and `oracle`.

use std::fmt::Write;

use sampledyn_core::analysis::find_stationary;
use sampledyn_core::dynamics::{Dynamics, Response};
use sampledyn_core::extensions::integrate_contracting;
use sampledyn_core::flow::{
    estimate_basins_dynamics, integrate_dynamics, BasinOptions, DEFAULT_DT, DEFAULT_T_MAX,
};
use sampledyn_core::{empirical_response, simulate_population, OracleError, Outcome};

use super::{flow_error, fmt_state, json_bytes, system};
use crate::config::Model;
use crate::{CliError, Output, RunConfig};

const DEFAULT_RESOLUTION: usize = 51;
const DEFAULT_ORACLE_T_MAX: f64 = 50.0;
const DEFAULT_ORACLE_N: u32 = 10_000;
const DEFAULT_ORACLE_SAMPLES: u64 = 10_000;
const DEFAULT_GRID_POINTS: usize = 20;

fn one_pop(d: &super::System) -> bool {
    matches!(d, Dynamics::One(_))
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn trajectory(cfg: &RunConfig) -> Result<Output, CliError> {
    let model = cfg.model()?;
    let t_max = cfg.t_max(DEFAULT_T_MAX)?;
    let dt = cfg.dt(DEFAULT_DT)?;
    let mut out = Output::default();
    if let Model::Contracting { game, theta1, theta2 } = &model {
        let initial = cfg.contracting_initial(game.actions())?;
        let rule = cfg.tie_rule.unwrap_or_default();
        let tr = integrate_contracting(
            game,
            theta1,
            theta2,
            initial,
            t_max,
            dt,
            rule,
            cfg.seed.unwrap_or(0),
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let m = game.actions();
        let mut csv = String::from("t");
        for pop in 1..=2 {
            for a in 0..m {
                write!(csv, ",p{pop}_{a}").unwrap();
            }
        }
        csv.push('\n');
        for (t, s) in &tr.samples {
            write!(csv, "{t}").unwrap();
            for x in s.p1.iter().chain(&s.p2) {
                write!(csv, ",{x}").unwrap();
            }
            csv.push('\n');
        }
        let last = tr.final_state();
        out.line(format!(
            "final state at t = {}: p1 = {:?}, p2 = {:?}",
            tr.samples.last().unwrap().0,
            last.p1,
            last.p2
        ));
        out.file("trajectory.csv", csv);
        return Ok(out);
    }
    let d = system(&model, "trajectory")?;
    let initial = cfg.initial_state(one_pop(&d))?;
    let set = find_stationary(&d);
    let tr = integrate_dynamics(&d, &set, initial, t_max, dt).map_err(flow_error)?;
    match tr.outcome {
        Outcome::ConvergedTo {
            index: Some(index),
            state,
            time,
        } => out.line(format!(
            "converged to stationary state {index} {} ({}) at t = {time}",
            fmt_state(&state),
            set.states()[index].stability
        )),
        Outcome::ConvergedTo {
            index: None,
            state,
            time,
        } => out.line(format!(
            "flag: unmatched; the field vanished at {} (t = {time}) away from every listed stationary state",
            fmt_state(&state)
        )),
        Outcome::MaxTimeReached { state } => out.line(format!(
            "flag: not-converged; state at t_max = {t_max}: {}",
            fmt_state(&state)
        )),
    }
    out.file("trajectory.csv", csv_bytes(|b| tr.write_csv(b)));
    Ok(out)
}

pub fn basins(cfg: &RunConfig) -> Result<Output, CliError> {
    let model = cfg.model()?;
    let d = system(&model, "basins")?;
    let resolution = cfg.resolution(DEFAULT_RESOLUTION)?;
    let opts = BasinOptions {
        t_max: cfg.t_max(DEFAULT_T_MAX)?,
        dt: cfg.dt(DEFAULT_DT)?,
    };
    let grid = estimate_basins_dynamics(&d, resolution, opts).map_err(flow_error)?;
    let mut out = Output::default();
    out.line(format!("basins on a {resolution}-point grid per axis:"));
    for (i, (s, share)) in grid.attractors.iter().zip(&grid.shares).enumerate() {
        if *share > 0.0 {
            out.line(format!(
                "  attractor {i} {} ({}): share {share:.6}",
                fmt_state(&s.state),
                s.stability
            ));
        }
    }
    if grid.unresolved_share > 0.0 {
        out.line(format!("  flagged cells: share {:.6}", grid.unresolved_share));
    }
    out.file("basins.csv", csv_bytes(|b| grid.write_csv(b)));
    out.file("basins_legend.json", json_bytes(&grid.legend()));
    Ok(out)
}

fn oracle_error(e: OracleError) -> CliError {
    CliError::Config(e.to_string())
}

pub fn oracle(cfg: &RunConfig) -> Result<Output, CliError> {
    let model = cfg.model()?;
    let Model::Sampling { env, one_pop } = &model else {
        return Err(CliError::config(
            "environment",
            "oracle supports sampling environments only",
        ));
    };
    let seed = cfg.seed.unwrap_or(0);
    let t_max = cfg.t_max(DEFAULT_ORACLE_T_MAX)?;
    let dt = cfg.dt(DEFAULT_DT)?;
    let n = cfg.n.unwrap_or(DEFAULT_ORACLE_N);
    let samples = cfg.samples.unwrap_or(DEFAULT_ORACLE_SAMPLES);
    let points = cfg.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
    if points == 0 {
        return Err(CliError::config("grid_points", "must be positive"));
    }
    let d = system(&model, "oracle")?;
    let initial = cfg.initial_state(*one_pop)?;
    let mut out = Output::default();

    let sim = simulate_population(env, initial, n, t_max, dt, seed).map_err(oracle_error)?;
    let mf = integrate_dynamics(&d, &find_stationary(&d), initial, t_max, dt).map_err(flow_error)?;
    let sup = sim
        .samples
        .iter()
        .enumerate()
        .map(|(i, (_, s))| s.distance(&mf.samples.get(i).map_or(mf.final_state(), |x| x.1)))
        .fold(0.0, f64::max);
    out.line(format!(
        "population n = {n}, seed = {seed}: final state {}; sup-norm distance to the mean-field trajectory {sup:.6}",
        fmt_state(&sim.final_state())
    ));
    out.file("oracle_trajectory.csv", csv_bytes(|b| sim.write_csv(b)));

    let mut csv = String::from("player,p,empirical,std_error,mean_field,z\n");
    let mut worst: f64 = 0.0;
    let players: &[usize] = if *one_pop { &[1] } else { &[1, 2] };
    for &player in players {
        let w = env.response(player);
        for i in 0..points {
            let p = (i as f64 + 0.5) / points as f64;
            // Distinct, reproducible streams per grid point.
            let stream = seed
                .wrapping_mul(1_000_003)
                .wrapping_add((player * 100_000 + i) as u64);
            let e = empirical_response(env, player, p, samples, stream).map_err(oracle_error)?;
            let exact = w.value(p);
            // Standard error under the mean field; the sample one vanishes
            // when every draw agrees.
            let se = (exact * (1.0 - exact) / samples as f64).sqrt();
            let z = if se > 0.0 {
                (e.value - exact) / se
            } else if e.value == exact {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z.abs());
            writeln!(csv, "{player},{p},{},{},{exact},{z}", e.value, e.std_error).unwrap();
        }
    }
    out.line(format!(
        "empirical responses on {points} points with {samples} draws: max |z| = {worst:.3}"
    ));
    out.file("oracle_response.csv", csv);
    Ok(out)
}
