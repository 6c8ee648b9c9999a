//! Extensions beyond two-action games: contracting games with `M ≥ 2`
//! actions and `N`-player minimum-effort games.

mod contracting;
mod mineffort;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::dynamics::DynamicsError;

pub use contracting::{
    contracting_best_response, contracting_pure_stability, contracting_response_vector,
    integrate_contracting, BestResponse, ContractingGame, ContractingLabel, ContractingState,
    ContractingTrajectory, EquilibriumReport, ResponseVector, TieRule, ENUMERATION_LIMIT, MONTE_CARLO_DRAWS,
};
pub use mineffort::{
    mineffort_pure_stability, mineffort_response, mineffort_stable_interior, MinEffortGame,
    MinEffortResponse, MinEffortSearch, MinEffortStability, Observation, PureLabel,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error("a contracting game needs at least two actions, got {0}")]
    TooFewActions(usize),
    #[error("payoff vector of player {player} has {got} entries, expected {expected}")]
    LengthMismatch {
        player: usize,
        got: usize,
        expected: usize,
    },
    #[error("payoff u_{player}^{action} = {value} must be positive and finite")]
    NonPositivePayoff {
        player: usize,
        action: usize,
        value: f64,
    },
    #[error("actions {0} and {1} have the same payoff pair")]
    NotGeneric(usize, usize),
    #[error("player must be 1 or 2, got {0}")]
    InvalidPlayer(usize),
    #[error("sample is empty")]
    EmptySample,
    #[error("distribution {0:?} is not a point of the simplex")]
    NotOnSimplex(Vec<f64>),
    #[error("minimum-effort games need N ≥ 2 players, got {0}")]
    TooFewPlayers(u32),
    #[error("effort cost must lie in (0, 1), got {0}")]
    InvalidCost(f64),
    #[error("share {0} outside [0, 1]")]
    ShareOutOfRange(f64),
    #[error("step size and horizon must be positive and finite")]
    InvalidStep,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}
