//! Stationary states, their stability, and checkers for the stability
//! conditions of sampling dynamics.
//!
//! Stationary states are roots of `w(p) − p` (one population) or of
//! `w1(w2(p1)) − p1` (two populations), found by a sign-change scan on a
//! uniform grid and refined by bisection.

mod report;
mod stationary;
mod theorems;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsError, State};
use crate::games::GameError;

pub use report::{Condition, Relation, ReportPart, TheoremReport, Verdict, BOUNDARY_TOL};
pub use stationary::{
    classify_slope, find_fixed_points, find_stationary, find_stationary_one_pop, find_stationary_two_pop,
    stationary_one, stationary_two, FixedPoint, StationarySet, GRID_POINTS, MARGINAL_TOL,
};
pub use theorems::{
    check_homogeneous_uniqueness, check_theorem3, check_theorem4, classify_pure_states,
    stable_interior_search, PureStates, SearchOutcome, ALPHA_STEP, DEFAULT_BIG_K,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("every state on the diagonal is stationary; no finite list exists")]
    Continuum,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Stability label of a stationary state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    #[serde(rename = "asymptotically-stable")]
    AsymptoticallyStable,
    #[serde(rename = "unstable")]
    Unstable,
    #[serde(rename = "marginal")]
    Marginal,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::AsymptoticallyStable => "asymptotically-stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::AsymptoticallyStable)
    }
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A stationary state with its stability label and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryState {
    pub state: State,
    pub stability: Stability,
    /// `w1′(p2)·w2′(p1)`, or `w′(p)` for one population.
    pub slope_product: f64,
    /// Eigenvalues of the linearization, ascending.
    pub eigenvalues: Vec<f64>,
    /// `max_i |w_i(p_j) − p_i|`.
    pub residual: f64,
}

impl StationaryState {
    pub fn leading_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Strictly inside the unit interval or square.
    pub fn is_interior(&self) -> bool {
        let inside = |x: f64| x > 0.0 && x < 1.0;
        inside(self.state.p1()) && inside(self.state.p2())
    }

    pub fn is_stable(&self) -> bool {
        self.stability.is_stable()
    }
}

/// Probability that a randomly matched pair plays different actions.
pub fn miscoordination_probability(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

/// Average payoff of a revising agent with payoff ratio `u` and response
/// `w`, relative to a perfectly informed best reply, with the opponent
/// share drawn uniformly from `[0, 1]`.
pub fn response_efficiency(w: &impl crate::dynamics::Response, u: f64) -> f64 {
    const N: usize = 20_000;
    let h = 1.0 / N as f64;
    let mut realized = 0.0;
    let mut ideal = 0.0;
    // Composite Simpson rule for the realized payoff; the ideal payoff has
    // a kink, so its integral is taken in closed form.
    for i in 0..=N {
        let p = i as f64 * h;
        let weight = if i == 0 || i == N {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let a = w.value(p);
        realized += weight * (a * u * p + (1.0 - a) * (1.0 - p));
    }
    realized *= h / 3.0;
    let q = 1.0 / (1.0 + u);
    ideal += q - q * q / 2.0; // ∫_0^q (1 − p) dp
    ideal += u * (1.0 - q * q) / 2.0; // ∫_q^1 u·p dp
    realized / ideal
}
