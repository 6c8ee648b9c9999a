//! Response functions of the sampling best-response and logit dynamics.
//!
//! A response function `w` maps the share `p` of the opposing population
//! playing `a` to the share of revising agents who choose `a`. Sampling
//! responses are mixtures of binomial tails; logit responses are mixtures of
//! logistic curves. Both are strictly increasing on `[0, 1]`.

mod binomial;
mod polynomial;
mod theta;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::CoordinationGame;

pub use binomial::{binomial_tail, DIRECT_SUM_MAX_K};
pub(crate) use binomial::{tail, tail_derivative};
pub use polynomial::{tail_coefficients, MAX_EXACT_DEGREE};
pub use theta::{SampleSizeDistribution, Truncation, MASS_TOL, SNAP_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("sample-size distribution has empty support")]
    EmptySupport,
    #[error("sample sizes must be at least 1")]
    ZeroSampleSize,
    #[error("mass θ({k}) = {mass} must be finite and positive")]
    InvalidMass { k: u32, mass: f64 },
    #[error("masses sum to {total}, expected 1 within 1e-12")]
    MassNotNormalized { total: f64 },
    #[error("mixture weight {0} must lie strictly inside (0, 1)")]
    InvalidMixtureWeight(f64),
    #[error("threshold m = {m} exceeds sample size k = {k}")]
    ThresholdOutOfRange { k: u32, m: u32 },
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("payoff ratio {0} must be finite and positive")]
    InvalidPayoff(f64),
    #[error("logit noise level η = {0} must be finite and positive")]
    InvalidNoise(f64),
    #[error("logit group list is empty")]
    NoLogitGroups,
    #[error("value {y} lies outside the response range [{lo}, {hi}]")]
    OutsideRange { y: f64, lo: f64, hi: f64 },
    #[error("sample size {k} exceeds the exact-coefficient limit {max}")]
    DegreeTooLarge { k: u32, max: u32 },
}

/// How a revising agent breaks an exact payoff tie between `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreakRule {
    #[default]
    #[serde(rename = "favor-a")]
    FavorA,
    #[serde(rename = "favor-b")]
    FavorB,
}

/// Minimal number `m` of `a` observations in a sample of size `k` that makes
/// `a` a best reply for payoff ratio `u`.
pub fn sampling_threshold(k: u32, u: f64, rule: TieBreakRule) -> u32 {
    let x = k as f64 / (u + 1.0);
    let r = x.round();
    if (x - r).abs() <= SNAP_TOL {
        match rule {
            TieBreakRule::FavorA => r as u32,
            TieBreakRule::FavorB => r as u32 + 1,
        }
    } else {
        x.ceil() as u32
    }
}

/// A strictly increasing response map on `[0, 1]`.
pub trait Response: Send + Sync {
    fn value(&self, p: f64) -> f64;

    fn derivative(&self, p: f64) -> f64;

    /// `w(p) = p` identically, so every state is stationary.
    fn is_identity(&self) -> bool {
        false
    }

    /// `p` with `w(p) = y`, by bisection.
    fn inverse(&self, y: f64) -> Result<f64, DynamicsError> {
        invert_increasing(|p| self.value(p), y)
    }
}

impl<R: Response + ?Sized> Response for Box<R> {
    fn value(&self, p: f64) -> f64 {
        (**self).value(p)
    }

    fn derivative(&self, p: f64) -> f64 {
        (**self).derivative(p)
    }

    fn is_identity(&self) -> bool {
        (**self).is_identity()
    }

    fn inverse(&self, y: f64) -> Result<f64, DynamicsError> {
        (**self).inverse(y)
    }
}

/// Bisection inverse of an increasing map on `[0, 1]`, run until the
/// bracket collapses to adjacent floating-point numbers.
pub fn invert_increasing(f: impl Fn(f64) -> f64, y: f64) -> Result<f64, DynamicsError> {
    let (lo, hi) = (f(0.0), f(1.0));
    if !(y >= lo && y <= hi) {
        return Err(DynamicsError::OutsideRange { y, lo, hi });
    }
    if y == lo {
        return Ok(0.0);
    }
    if y == hi {
        return Ok(1.0);
    }
    let (mut a, mut b) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid) < y {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(if (f(a) - y).abs() <= (f(b) - y).abs() {
        a
    } else {
        b
    })
}

impl<R: Response + ?Sized> Response for &R {
    fn value(&self, p: f64) -> f64 {
        (**self).value(p)
    }
    fn derivative(&self, p: f64) -> f64 {
        (**self).derivative(p)
    }
    fn is_identity(&self) -> bool {
        (**self).is_identity()
    }
    fn inverse(&self, y: f64) -> Result<f64, DynamicsError> {
        (**self).inverse(y)
    }
}

/// One mixture component `θ(k) · F_m^k(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailComponent {
    pub weight: f64,
    pub k: u32,
    pub m: u32,
}

/// Mixture of binomial tails `Σ weight · F_m^k(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailMixture {
    components: Vec<TailComponent>,
}

impl TailMixture {
    pub fn new(components: Vec<TailComponent>) -> Self {
        Self { components }
    }

    pub fn components(&self) -> &[TailComponent] {
        &self.components
    }

    pub fn value(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        // Weights that sum to 1 up to rounding can push the sum past 1.
        let v: f64 = self.components.iter().map(|c| c.weight * tail(c.k, c.m, p)).sum();
        v.clamp(0.0, 1.0)
    }

    pub fn derivative(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        self.components
            .iter()
            .map(|c| c.weight * tail_derivative(c.k, c.m, p))
            .sum()
    }

    /// Monomial coefficients of the mixture, lowest degree first.
    pub fn coefficients(&self) -> Result<Vec<f64>, DynamicsError> {
        let degree = self.components.iter().map(|c| c.k).max().unwrap_or(0);
        let mut out = vec![0.0; degree as usize + 1];
        for c in &self.components {
            for (j, coef) in tail_coefficients(c.k, c.m)?.into_iter().enumerate() {
                out[j] += c.weight * coef as f64;
            }
        }
        Ok(out)
    }
}

/// Sampling best-response function of one population.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingResponse {
    payoff: f64,
    theta: SampleSizeDistribution,
    tie: TieBreakRule,
    tails: TailMixture,
}

impl SamplingResponse {
    pub fn new(payoff: f64, theta: SampleSizeDistribution, tie: TieBreakRule) -> Result<Self, DynamicsError> {
        if !(payoff.is_finite() && payoff > 0.0) {
            return Err(DynamicsError::InvalidPayoff(payoff));
        }
        let components = theta
            .iter()
            .map(|(k, weight)| TailComponent {
                weight,
                k,
                m: sampling_threshold(k, payoff, tie),
            })
            .collect();
        Ok(Self {
            payoff,
            theta,
            tie,
            tails: TailMixture::new(components),
        })
    }

    pub fn payoff(&self) -> f64 {
        self.payoff
    }

    pub fn theta(&self) -> &SampleSizeDistribution {
        &self.theta
    }

    pub fn tie(&self) -> TieBreakRule {
        self.tie
    }

    pub fn tails(&self) -> &TailMixture {
        &self.tails
    }

    /// Monomial coefficients of `w`, lowest degree first. Exact integer
    /// tails are available only for sample sizes up to 60.
    pub fn coefficients(&self) -> Result<Vec<f64>, DynamicsError> {
        self.tails.coefficients()
    }

    /// `w′` at the pure state `p = 1`, as a truncated expectation.
    pub fn slope_at_one(&self) -> f64 {
        let cutoff = 1.0 / self.payoff + 1.0;
        match self.tie {
            TieBreakRule::FavorA => self.theta.truncated_expectation(cutoff, Truncation::Strict),
            TieBreakRule::FavorB => self.theta.truncated_expectation(cutoff, Truncation::Weak),
        }
    }

    /// `w′` at the pure state `p = 0`, as a truncated expectation.
    pub fn slope_at_zero(&self) -> f64 {
        let cutoff = self.payoff + 1.0;
        match self.tie {
            TieBreakRule::FavorA => self.theta.truncated_expectation(cutoff, Truncation::Weak),
            TieBreakRule::FavorB => self.theta.truncated_expectation(cutoff, Truncation::Strict),
        }
    }
}

impl Response for SamplingResponse {
    fn value(&self, p: f64) -> f64 {
        // Pure states map to themselves exactly, whatever the rounding of θ.
        if p <= 0.0 {
            0.0
        } else if p >= 1.0 {
            1.0
        } else {
            self.tails.value(p)
        }
    }

    fn derivative(&self, p: f64) -> f64 {
        self.tails.derivative(p)
    }

    fn is_identity(&self) -> bool {
        self.theta.is_unit()
    }

    fn inverse(&self, y: f64) -> Result<f64, DynamicsError> {
        if self.is_identity() && (0.0..=1.0).contains(&y) {
            return Ok(y);
        }
        if y == 0.0 || y == 1.0 {
            return Ok(y);
        }
        invert_increasing(|p| self.value(p), y)
    }
}

/// A behavioral group in a logit population: share `mass`, noise `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogitGroup {
    pub mass: f64,
    pub eta: f64,
}

/// Logit choice mixed over noise groups.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitResponse {
    payoff: f64,
    groups: Vec<LogitGroup>,
}

impl LogitResponse {
    pub fn new(payoff: f64, groups: Vec<LogitGroup>) -> Result<Self, DynamicsError> {
        if !(payoff.is_finite() && payoff > 0.0) {
            return Err(DynamicsError::InvalidPayoff(payoff));
        }
        if groups.is_empty() {
            return Err(DynamicsError::NoLogitGroups);
        }
        let mut total = 0.0;
        for g in &groups {
            if !(g.eta.is_finite() && g.eta > 0.0) {
                return Err(DynamicsError::InvalidNoise(g.eta));
            }
            if !(g.mass.is_finite() && g.mass > 0.0) {
                return Err(DynamicsError::InvalidMass { k: 0, mass: g.mass });
            }
            total += g.mass;
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(DynamicsError::MassNotNormalized { total });
        }
        Ok(Self { payoff, groups })
    }

    /// A single group with noise `eta`.
    pub fn homogeneous(payoff: f64, eta: f64) -> Result<Self, DynamicsError> {
        Self::new(payoff, vec![LogitGroup { mass: 1.0, eta }])
    }

    pub fn payoff(&self) -> f64 {
        self.payoff
    }

    pub fn groups(&self) -> &[LogitGroup] {
        &self.groups
    }

    fn choice(&self, eta: f64, p: f64) -> f64 {
        1.0 / (1.0 + (((1.0 - p) - p * self.payoff) / eta).exp())
    }
}

impl Response for LogitResponse {
    fn value(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        self.groups.iter().map(|g| g.mass * self.choice(g.eta, p)).sum()
    }

    fn derivative(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        self.groups
            .iter()
            .map(|g| {
                let s = self.choice(g.eta, p);
                g.mass * s * (1.0 - s) * (1.0 + self.payoff) / g.eta
            })
            .sum()
    }
}

/// Either flavor of response function.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseFunction {
    Sampling(SamplingResponse),
    Logit(LogitResponse),
}

impl ResponseFunction {
    pub fn as_sampling(&self) -> Option<&SamplingResponse> {
        match self {
            Self::Sampling(s) => Some(s),
            Self::Logit(_) => None,
        }
    }
}

impl From<SamplingResponse> for ResponseFunction {
    fn from(s: SamplingResponse) -> Self {
        Self::Sampling(s)
    }
}

impl From<LogitResponse> for ResponseFunction {
    fn from(l: LogitResponse) -> Self {
        Self::Logit(l)
    }
}

impl Response for ResponseFunction {
    fn value(&self, p: f64) -> f64 {
        match self {
            Self::Sampling(s) => s.value(p),
            Self::Logit(l) => l.value(p),
        }
    }
    fn derivative(&self, p: f64) -> f64 {
        match self {
            Self::Sampling(s) => s.derivative(p),
            Self::Logit(l) => l.derivative(p),
        }
    }
    fn is_identity(&self) -> bool {
        match self {
            Self::Sampling(s) => s.is_identity(),
            Self::Logit(_) => false,
        }
    }
    fn inverse(&self, y: f64) -> Result<f64, DynamicsError> {
        match self {
            Self::Sampling(s) => s.inverse(y),
            Self::Logit(l) => l.inverse(y),
        }
    }
}

/// A point of the state space: one share, or one share per population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum State {
    One(f64),
    Two(f64, f64),
}

impl State {
    pub fn p1(&self) -> f64 {
        match *self {
            State::One(p) | State::Two(p, _) => p,
        }
    }

    /// Second coordinate; equals `p1` in a one-population state.
    pub fn p2(&self) -> f64 {
        match *self {
            State::One(p) | State::Two(_, p) => p,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            State::One(_) => 1,
            State::Two(..) => 2,
        }
    }

    pub fn is_in_unit_box(&self) -> bool {
        let ok = |x: f64| (0.0..=1.0).contains(&x);
        ok(self.p1()) && ok(self.p2())
    }

    /// Sup-norm distance; mixing dimensions compares the shared coordinates.
    pub fn distance(&self, other: &State) -> f64 {
        (self.p1() - other.p1()).abs().max((self.p2() - other.p2()).abs())
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> State {
        match *self {
            State::One(p) => State::One(f(p)),
            State::Two(a, b) => State::Two(f(a), f(b)),
        }
    }

    pub(crate) fn zip(&self, other: &State, f: impl Fn(f64, f64) -> f64) -> State {
        match (*self, *other) {
            (State::One(a), State::One(b)) => State::One(f(a, b)),
            (State::Two(a1, a2), State::Two(b1, b2)) => State::Two(f(a1, b1), f(a2, b2)),
            _ => panic!("state dimensions differ"),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.p1().abs().max(self.p2().abs())
    }
}

/// The mean-field system `ṗ = w(p) − p` (one population) or
/// `ṗ_1 = w_1(p_2) − p_1`, `ṗ_2 = w_2(p_1) − p_2` (two populations).
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics<R = ResponseFunction> {
    One(R),
    Two(R, R),
}

impl<R: Response> Dynamics<R> {
    pub fn dimension(&self) -> usize {
        match self {
            Dynamics::One(_) => 1,
            Dynamics::Two(..) => 2,
        }
    }

    pub fn field(&self, s: &State) -> State {
        match (self, *s) {
            (Dynamics::One(w), State::One(p)) => State::One(w.value(p) - p),
            (Dynamics::Two(w1, w2), State::Two(p1, p2)) => State::Two(w1.value(p2) - p1, w2.value(p1) - p2),
            _ => panic!("state dimension does not match the dynamics"),
        }
    }

    /// Does `s` have the dimension this system expects?
    pub fn accepts(&self, s: &State) -> bool {
        self.dimension() == s.dimension()
    }
}

/// A two-population sampling environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub game: CoordinationGame,
    pub theta1: SampleSizeDistribution,
    pub theta2: SampleSizeDistribution,
    pub tie: TieBreakRule,
}

impl Environment {
    pub fn new(
        game: CoordinationGame,
        theta1: SampleSizeDistribution,
        theta2: SampleSizeDistribution,
    ) -> Self {
        Self {
            game,
            theta1,
            theta2,
            tie: TieBreakRule::FavorA,
        }
    }

    /// One-population environment `(u, θ)`.
    pub fn symmetric(u: f64, theta: SampleSizeDistribution) -> Result<Self, crate::games::GameError> {
        Ok(Self::new(CoordinationGame::symmetric(u)?, theta.clone(), theta))
    }

    pub fn with_tie(mut self, tie: TieBreakRule) -> Self {
        self.tie = tie;
        self
    }

    pub fn is_symmetric(&self) -> bool {
        self.game.is_symmetric() && self.theta1 == self.theta2
    }

    pub fn theta(&self, player: usize) -> &SampleSizeDistribution {
        match player {
            1 => &self.theta1,
            2 => &self.theta2,
            _ => panic!("player index must be 1 or 2, got {player}"),
        }
    }

    /// Sampling response of population `i`.
    pub fn response(&self, player: usize) -> SamplingResponse {
        SamplingResponse::new(self.game.payoff(player), self.theta(player).clone(), self.tie)
            .expect("game payoffs are validated positive")
    }

    pub fn two_population(&self) -> Dynamics<SamplingResponse> {
        Dynamics::Two(self.response(1), self.response(2))
    }

    /// Requires a symmetric environment.
    pub fn one_population(&self) -> Option<Dynamics<SamplingResponse>> {
        self.is_symmetric().then(|| Dynamics::One(self.response(1)))
    }
}

/// A two-population logit environment. Each population responds to its own
/// payoff ratio `u_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitEnvironment {
    pub game: CoordinationGame,
    pub groups1: Vec<LogitGroup>,
    pub groups2: Vec<LogitGroup>,
}

impl LogitEnvironment {
    pub fn response(&self, player: usize) -> Result<LogitResponse, DynamicsError> {
        let groups = match player {
            1 => &self.groups1,
            2 => &self.groups2,
            _ => panic!("player index must be 1 or 2, got {player}"),
        };
        LogitResponse::new(self.game.payoff(player), groups.clone())
    }

    pub fn two_population(&self) -> Result<Dynamics<LogitResponse>, DynamicsError> {
        Ok(Dynamics::Two(self.response(1)?, self.response(2)?))
    }

    pub fn is_symmetric(&self) -> bool {
        self.game.is_symmetric() && self.groups1 == self.groups2
    }

    pub fn one_population(&self) -> Result<Option<Dynamics<LogitResponse>>, DynamicsError> {
        if !self.is_symmetric() {
            return Ok(None);
        }
        Ok(Some(Dynamics::One(self.response(1)?)))
    }
}

#[cfg(test)]
mod tests;
