//! Sampling best-response and logit dynamics for coordination games.
//!
//! The crate is organized bottom-up:
//!
//! - [`games`]: normalized 2×2 coordination games and conversions.
//! - [`dynamics`]: response functions, binomial tails, environments.
//! - [`analysis`]: stationary states, stability labels, condition checkers.
//! - [`flow`]: RK4 trajectories and basins of attraction.
//! - [`extensions`]: contracting games with many actions and minimum-effort games.
//! - [`oracle`]: finite-population Monte Carlo simulation.

pub mod analysis;
pub mod dynamics;
pub mod extensions;
pub mod flow;
pub mod games;
pub mod oracle;

pub use analysis::{
    find_stationary, find_stationary_one_pop, find_stationary_two_pop, miscoordination_probability,
    AnalysisError, Stability, StationarySet, StationaryState, TheoremReport, Verdict,
};
pub use dynamics::{
    binomial_tail, sampling_threshold, Dynamics, DynamicsError, Environment, LogitEnvironment, LogitGroup,
    LogitResponse, Response, ResponseFunction, SampleSizeDistribution, SamplingResponse, State, TieBreakRule,
    Truncation,
};
pub use extensions::{
    contracting_pure_stability, contracting_response_vector, integrate_contracting, mineffort_pure_stability,
    mineffort_response, ContractingGame, ExtensionError, MinEffortGame, Observation, TieRule,
};
pub use flow::{
    convergence_limit, estimate_basins, estimate_basins_one_pop, integrate, BasinGrid, BasinOptions,
    FlowError, Outcome, Trajectory,
};
pub use games::{CoordinationGame, DominanceProfile, GameError, PayoffMatrix};
pub use oracle::{
    empirical_response, simulate_population, AgentPopulation, EmpiricalTrajectory, Estimate, OracleError,
};
