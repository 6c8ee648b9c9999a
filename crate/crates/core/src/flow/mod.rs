//! Fixed-step RK4 integration of `ṗ_i = w_i(p_j) − p_i`, convergence
//! detection, and basins of attraction.
//!
//! Integration is deterministic: the same inputs reproduce every sample
//! bit for bit. Limits are named by matching against the stationary states
//! found by [`crate::analysis`].

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{find_stationary, AnalysisError, Stability, StationarySet, StationaryState};
use crate::dynamics::{Dynamics, Environment, Response, SamplingResponse, State};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_T_MAX: f64 = 200.0;

/// A trajectory has converged once the field's sup-norm drops below this.
pub const FIELD_TOL: f64 = 1e-10;

/// Limits are named after the nearest stationary state within this distance.
pub const MATCH_TOL: f64 = 1e-6;

/// Horizon used by [`convergence_limit`].
pub const LIMIT_T_MAX: f64 = 1000.0;

/// Stable states whose slope product lies this far below 1 count as
/// hyperbolic, which lets basin runs stop once inside [`MATCH_TOL`].
const HYPERBOLIC_MARGIN: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("time horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("initial state {0:?} lies outside the unit interval or square")]
    OutsideDomain(State),
    #[error("a {state}-dimensional state does not fit a {system}-population system")]
    DimensionMismatch { state: usize, system: usize },
    #[error("state became non-finite at step {step}")]
    NonFinite { step: usize },
    #[error("resolution must be at least 2, got {0}")]
    InvalidResolution(usize),
    #[error("trajectory from {initial:?} did not converge by t = {t_max}")]
    NotConverged { initial: State, t_max: f64 },
    #[error("trajectory from {initial:?} converged to {limit:?}, which matches no stationary state")]
    Unmatched { initial: State, limit: State },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// How a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    /// The field vanished; `index` points into the stationary list when a
    /// state lies within [`MATCH_TOL`].
    ConvergedTo {
        index: Option<usize>,
        state: State,
        time: f64,
    },
    MaxTimeReached {
        state: State,
    },
}

impl Outcome {
    pub fn is_converged(&self) -> bool {
        matches!(self, Outcome::ConvergedTo { .. })
    }

    pub fn index(&self) -> Option<usize> {
        match *self {
            Outcome::ConvergedTo { index, .. } => index,
            Outcome::MaxTimeReached { .. } => None,
        }
    }

    pub fn state(&self) -> State {
        match *self {
            Outcome::ConvergedTo { state, .. } | Outcome::MaxTimeReached { state } => state,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, State)>,
    pub outcome: Outcome,
    pub dt: f64,
    /// Largest distance any raw RK4 step moved outside the unit box.
    pub max_clamp: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> State {
        self.samples.last().map(|s| s.1).unwrap_or(self.outcome.state())
    }

    /// CSV with columns `t,p1` or `t,p1,p2`.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let two = matches!(self.samples.first(), Some((_, State::Two(..))));
        writeln!(w, "{}", if two { "t,p1,p2" } else { "t,p1" })?;
        for (t, s) in &self.samples {
            match s {
                State::One(p) => writeln!(w, "{t},{p}")?,
                State::Two(p1, p2) => writeln!(w, "{t},{p1},{p2}")?,
            }
        }
        Ok(())
    }
}

fn validate(d_dim: usize, initial: &State, t_max: f64, dt: f64) -> Result<(), FlowError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(FlowError::InvalidStep(dt));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(FlowError::InvalidHorizon(t_max));
    }
    if !initial.is_in_unit_box() {
        return Err(FlowError::OutsideDomain(*initial));
    }
    if initial.dimension() != d_dim {
        return Err(FlowError::DimensionMismatch {
            state: initial.dimension(),
            system: d_dim,
        });
    }
    Ok(())
}

fn axpy(s: &State, a: f64, k: &State) -> State {
    s.zip(k, |x, y| x + a * y)
}

/// Raw result of the integration loop.
struct Run {
    end: State,
    /// Step index at which the loop stopped, and whether it stopped early.
    steps: usize,
    stopped: Option<Option<usize>>,
    max_clamp: f64,
}

/// Integrate until `stop` names a limit (returns `Some`), or `t_max`.
fn run<R: Response>(
    d: &Dynamics<R>,
    initial: State,
    t_max: f64,
    dt: f64,
    stop: &impl Fn(&State, &State) -> Option<Option<usize>>,
    mut observe: impl FnMut(usize, &State),
) -> Result<Run, FlowError> {
    let n_max = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
    let mut s = initial;
    let mut max_clamp = 0.0f64;
    observe(0, &s);
    for n in 0..=n_max {
        let k1 = d.field(&s);
        if let Some(hit) = stop(&s, &k1) {
            return Ok(Run {
                end: s,
                steps: n,
                stopped: Some(hit),
                max_clamp,
            });
        }
        if n == n_max {
            break;
        }
        let k2 = d.field(&axpy(&s, 0.5 * dt, &k1));
        let k3 = d.field(&axpy(&s, 0.5 * dt, &k2));
        let k4 = d.field(&axpy(&s, dt, &k3));
        let incr = k1
            .zip(&k2, |a, b| a + 2.0 * b)
            .zip(&k3.zip(&k4, |c, e| 2.0 * c + e), |x, y| x + y);
        let raw = axpy(&s, dt / 6.0, &incr);
        if !(raw.p1().is_finite() && raw.p2().is_finite()) {
            return Err(FlowError::NonFinite { step: n + 1 });
        }
        s = raw.map(|x| x.clamp(0.0, 1.0));
        max_clamp = max_clamp.max(raw.distance(&s));
        observe(n + 1, &s);
    }
    Ok(Run {
        end: s,
        steps: n_max,
        stopped: None,
        max_clamp,
    })
}

/// Integrate `d` from `initial`, naming the limit against `stationary`.
pub fn integrate_dynamics<R: Response>(
    d: &Dynamics<R>,
    stationary: &StationarySet,
    initial: State,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory, FlowError> {
    validate(d.dimension(), &initial, t_max, dt)?;
    let mut samples = Vec::with_capacity((t_max / dt) as usize + 2);
    let stop = |s: &State, k1: &State| (k1.sup_norm() < FIELD_TOL).then(|| stationary.nearest(s, MATCH_TOL));
    let r = run(d, initial, t_max, dt, &stop, |n, s| {
        samples.push((n as f64 * dt, *s))
    })?;
    let outcome = match r.stopped {
        Some(index) => Outcome::ConvergedTo {
            index,
            state: r.end,
            time: r.steps as f64 * dt,
        },
        None => Outcome::MaxTimeReached { state: r.end },
    };
    Ok(Trajectory {
        samples,
        outcome,
        dt,
        max_clamp: r.max_clamp,
    })
}

fn dynamics_for(env: &Environment, initial: &State) -> Result<Dynamics<SamplingResponse>, FlowError> {
    match initial {
        State::One(_) => env.one_population().ok_or_else(|| {
            FlowError::Analysis(AnalysisError::Precondition(
                "one-population integration needs u1 = u2 and θ1 = θ2".into(),
            ))
        }),
        State::Two(..) => Ok(env.two_population()),
    }
}

/// Integrate the sampling dynamics of `env`; a [`State::One`] initial
/// state selects the one-population system.
pub fn integrate(env: &Environment, initial: State, t_max: f64, dt: f64) -> Result<Trajectory, FlowError> {
    let d = dynamics_for(env, &initial)?;
    integrate_dynamics(&d, &find_stationary(&d), initial, t_max, dt)
}

/// The stationary state reached from `initial`.
pub fn convergence_limit(env: &Environment, initial: State) -> Result<StationaryState, FlowError> {
    let d = dynamics_for(env, &initial)?;
    let set = find_stationary(&d);
    if set.is_continuum() {
        return Err(AnalysisError::Continuum.into());
    }
    let tr = integrate_dynamics(&d, &set, initial, LIMIT_T_MAX, DEFAULT_DT)?;
    match tr.outcome {
        Outcome::ConvergedTo { index: Some(i), .. } => Ok(set.states()[i].clone()),
        Outcome::ConvergedTo {
            index: None, state, ..
        } => Err(FlowError::Unmatched {
            initial,
            limit: state,
        }),
        Outcome::MaxTimeReached { .. } => Err(FlowError::NotConverged {
            initial,
            t_max: LIMIT_T_MAX,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasinOptions {
    pub t_max: f64,
    pub dt: f64,
}

impl Default for BasinOptions {
    fn default() -> Self {
        Self {
            t_max: DEFAULT_T_MAX,
            dt: DEFAULT_DT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinCell {
    pub p1: f64,
    /// Equals `p1` on a one-population grid.
    pub p2: f64,
    pub attractor: Option<usize>,
    /// Why no attractor was assigned.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinGrid {
    pub resolution: usize,
    pub dimension: usize,
    /// Row-major in `p1`, then `p2`.
    pub cells: Vec<BasinCell>,
    /// The stationary states that `attractor` indexes.
    pub attractors: Vec<StationaryState>,
    /// Share of cells reaching each stationary state.
    pub shares: Vec<f64>,
    /// Share of flagged cells.
    pub unresolved_share: f64,
}

/// Attractor legend written next to the basin CSV.
#[derive(Debug, Clone, Serialize)]
pub struct BasinLegend<'a> {
    pub resolution: usize,
    pub dimension: usize,
    pub attractors: Vec<LegendEntry<'a>>,
    pub unresolved_share: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LegendEntry<'a> {
    pub index: usize,
    pub state: &'a State,
    pub stability: Stability,
    pub share: f64,
}

impl BasinGrid {
    /// CSV with columns `cell_p1,cell_p2,attractor_index,flag`; unassigned
    /// cells leave the index empty.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "cell_p1,cell_p2,attractor_index,flag")?;
        for c in &self.cells {
            let idx = c.attractor.map(|i| i.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{}", c.p1, c.p2, idx, c.flag.as_deref().unwrap_or(""))?;
        }
        Ok(())
    }

    pub fn legend(&self) -> BasinLegend<'_> {
        BasinLegend {
            resolution: self.resolution,
            dimension: self.dimension,
            attractors: self
                .attractors
                .iter()
                .zip(&self.shares)
                .enumerate()
                .map(|(index, (s, &share))| LegendEntry {
                    index,
                    state: &s.state,
                    stability: s.stability,
                    share,
                })
                .collect(),
            unresolved_share: self.unresolved_share,
        }
    }

    /// Share of the attractor nearest to `s` within `tol`.
    pub fn share_of(&self, s: &State, tol: f64) -> f64 {
        self.attractors
            .iter()
            .zip(&self.shares)
            .filter(|(a, _)| a.state.distance(s) <= tol)
            .map(|(_, &sh)| sh)
            .sum()
    }
}

/// Limit index of one cell: stops early inside [`MATCH_TOL`] of a
/// hyperbolic stable state, otherwise waits for the field to vanish.
fn cell_limit<R: Response>(
    d: &Dynamics<R>,
    set: &StationarySet,
    initial: State,
    opts: BasinOptions,
) -> Result<Result<usize, String>, FlowError> {
    let states = set.states();
    let stop = |s: &State, k1: &State| {
        let captured = states.iter().position(|st| {
            st.is_stable() && st.slope_product < 1.0 - HYPERBOLIC_MARGIN && st.state.distance(s) < MATCH_TOL
        });
        if captured.is_some() {
            return Some(captured);
        }
        (k1.sup_norm() < FIELD_TOL).then(|| set.nearest(s, MATCH_TOL))
    };
    let mut dt = opts.dt;
    for attempt in 0..2 {
        let r = run(d, initial, opts.t_max, dt, &stop, |_, _| {})?;
        match r.stopped {
            Some(Some(i)) => return Ok(Ok(i)),
            Some(None) => return Ok(Err("unmatched".into())),
            None if attempt == 0 => dt *= 0.5,
            None => {}
        }
    }
    Ok(Err("not-converged".into()))
}

/// Basins on a `resolution`-per-axis grid of cell centers `(i + 1/2)/resolution`.
pub fn estimate_basins_dynamics<R: Response>(
    d: &Dynamics<R>,
    resolution: usize,
    opts: BasinOptions,
) -> Result<BasinGrid, FlowError> {
    if resolution < 2 {
        return Err(FlowError::InvalidResolution(resolution));
    }
    let probe = if d.dimension() == 1 {
        State::One(0.5)
    } else {
        State::Two(0.5, 0.5)
    };
    validate(d.dimension(), &probe, opts.t_max, opts.dt)?;
    let set = find_stationary(d);
    if set.is_continuum() {
        return Err(AnalysisError::Continuum.into());
    }
    let center = |i: usize| (i as f64 + 0.5) / resolution as f64;
    let starts: Vec<State> = match d.dimension() {
        1 => (0..resolution).map(|i| State::One(center(i))).collect(),
        _ => (0..resolution)
            .flat_map(|i| (0..resolution).map(move |j| State::Two(center(i), center(j))))
            .collect(),
    };
    let limits: Vec<Result<usize, String>> = starts
        .par_iter()
        .map(|&s| cell_limit(d, &set, s, opts))
        .collect::<Result<_, _>>()?;
    let n = starts.len() as f64;
    let mut shares = vec![0.0; set.states().len()];
    let mut unresolved = 0.0;
    let cells = starts
        .iter()
        .zip(limits)
        .map(|(s, lim)| {
            let (attractor, flag) = match lim {
                Ok(i) => {
                    shares[i] += 1.0 / n;
                    (Some(i), None)
                }
                Err(f) => {
                    unresolved += 1.0 / n;
                    (None, Some(f))
                }
            };
            BasinCell {
                p1: s.p1(),
                p2: s.p2(),
                attractor,
                flag,
            }
        })
        .collect();
    Ok(BasinGrid {
        resolution,
        dimension: d.dimension(),
        cells,
        attractors: set.states().to_vec(),
        shares,
        unresolved_share: unresolved,
    })
}

/// Two-population basins of `env`.
pub fn estimate_basins(
    env: &Environment,
    resolution: usize,
    opts: BasinOptions,
) -> Result<BasinGrid, FlowError> {
    estimate_basins_dynamics(&env.two_population(), resolution, opts)
}

/// One-population basins of a symmetric `env`.
pub fn estimate_basins_one_pop(
    env: &Environment,
    resolution: usize,
    opts: BasinOptions,
) -> Result<BasinGrid, FlowError> {
    let d = dynamics_for(env, &State::One(0.5))?;
    estimate_basins_dynamics(&d, resolution, opts)
}

#[cfg(test)]
mod tests;
