//! Command implementations. Each returns an [`Output`] and never touches
//! the filesystem itself.

mod analyze;
mod normalize;
mod phase;
mod simulate;
mod sweep;

use std::fmt::Write;

use sampledyn_core::analysis::{AnalysisError, StationarySet};
use sampledyn_core::dynamics::{Dynamics, Response};
use sampledyn_core::extensions::MinEffortResponse;
use sampledyn_core::flow::FlowError;

use crate::config::Model;
use crate::{CliError, CommandName, Output, RunConfig};

pub fn run(command: CommandName, cfg: &RunConfig) -> Result<Output, CliError> {
    match command {
        CommandName::Analyze => analyze::run(cfg),
        CommandName::Phase => phase::run(cfg),
        CommandName::Trajectory => simulate::trajectory(cfg),
        CommandName::Basins => simulate::basins(cfg),
        CommandName::Oracle => simulate::oracle(cfg),
        CommandName::Sweep => sweep::run(cfg),
        CommandName::Normalize => normalize::run(cfg),
    }
}

/// Mean-field system of any scalar-share model.
pub type System = Dynamics<Box<dyn Response>>;

/// The mean-field system of `model`; contracting games have simplex states
/// and are handled separately.
pub fn system(model: &Model, command: &str) -> Result<System, CliError> {
    fn boxed<R: Response + 'static>(r: R) -> Box<dyn Response> {
        Box::new(r)
    }
    Ok(match model {
        Model::Sampling { env, one_pop: true } => Dynamics::One(boxed(env.response(1))),
        Model::Sampling { env, one_pop: false } => {
            Dynamics::Two(boxed(env.response(1)), boxed(env.response(2)))
        }
        Model::Logit { env, one_pop } => {
            let (w1, w2) = (
                env.response(1).map_err(CliError::numeric)?,
                env.response(2).map_err(CliError::numeric)?,
            );
            if *one_pop {
                Dynamics::One(boxed(w1))
            } else {
                Dynamics::Two(boxed(w1), boxed(w2))
            }
        }
        Model::MinEffort { game, theta } => {
            Dynamics::One(boxed(MinEffortResponse::new(*game, theta.clone())))
        }
        Model::Contracting { .. } => {
            return Err(CliError::config(
                "environment",
                &format!("{command} does not support contracting games"),
            ))
        }
    })
}

/// Continuum sentinel sentence for a system whose responses are identities.
pub fn continuum_sentence(d: &System) -> &'static str {
    match d {
        Dynamics::One(_) => "every state is stationary",
        Dynamics::Two(..) => "a state is stationary iff it is symmetric",
    }
}

/// Stationary-state CSV: one row per state; one-population rows repeat
/// the share as `p2`.
pub fn stationary_csv(set: &StationarySet) -> String {
    let mut s = String::from("p1,p2,stability,slope_product,leading_eigenvalue,residual\n");
    for st in set.states() {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            st.state.p1(),
            st.state.p2(),
            st.stability,
            st.slope_product,
            st.leading_eigenvalue(),
            st.residual
        )
        .unwrap();
    }
    s
}

pub fn json_bytes(v: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s.into_bytes()
}

/// Map flow errors: inapplicable inputs are configuration errors, the rest
/// are numerical failures.
pub fn flow_error(e: FlowError) -> CliError {
    match e {
        FlowError::InvalidStep(_)
        | FlowError::InvalidHorizon(_)
        | FlowError::OutsideDomain(_)
        | FlowError::DimensionMismatch { .. }
        | FlowError::InvalidResolution(_) => CliError::Config(e.to_string()),
        FlowError::Analysis(a) => analysis_error(a),
        other => CliError::numeric(other),
    }
}

pub fn analysis_error(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::Precondition(_) | AnalysisError::Continuum | AnalysisError::Game(_) => {
            CliError::Config(e.to_string())
        }
        AnalysisError::Dynamics(_) => CliError::numeric(e),
    }
}

/// `(p1, p2)` with six decimals, or `p` for one population.
pub fn fmt_state(s: &sampledyn_core::State) -> String {
    match s {
        sampledyn_core::State::One(p) => format!("{p:.6}"),
        sampledyn_core::State::Two(a, b) => format!("({a:.6}, {b:.6})"),
    }
}
