//! Finite-population Monte Carlo simulation of the sampling dynamics.
//!
//! The oracle never evaluates a response polynomial: every new agent draws
//! a sample size, draws opponents' actions, and compares payoffs directly.
//! It therefore checks the closed-form responses and the mean-field flow
//! independently.

use std::io::{self, Write};

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{Environment, SampleSizeDistribution, State, TieBreakRule};

/// Smallest population accepted by [`simulate_population`].
pub const MIN_POPULATION: u32 = 100;

/// Relative slack for an exact payoff tie between `a` and `b`.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("share {0} outside [0, 1]")]
    ShareOutOfRange(f64),
    #[error("need at least one draw")]
    NoSamples,
    #[error("population size {0} is below {MIN_POPULATION}")]
    PopulationTooSmall(u32),
    #[error("step size must be in (0, 1], got {0}")]
    InvalidStep(f64),
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("initial state {0:?} is outside the unit box")]
    OutsideDomain(State),
    #[error("a single population needs a symmetric environment")]
    NotSymmetric,
    #[error("player must be 1 or 2, got {0}")]
    InvalidPlayer(usize),
}

/// Monte Carlo estimate of a probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    /// Binomial standard error `sqrt(q(1 − q)/n)`.
    pub std_error: f64,
    pub samples: u64,
}

/// Draws sample sizes from `θ`.
struct SizeSampler {
    sizes: Vec<u32>,
    index: WeightedIndex<f64>,
}

impl SizeSampler {
    fn new(theta: &SampleSizeDistribution) -> Self {
        let (sizes, weights): (Vec<u32>, Vec<f64>) = theta.iter().unzip();
        let index = WeightedIndex::new(&weights).expect("θ has positive total mass");
        Self { sizes, index }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u32 {
        self.sizes[self.index.sample(rng)]
    }
}

/// Does an agent with payoff ratio `u` who saw `x` plays of `a` among `k`
/// opponents choose `a`?
fn chooses_a(u: f64, k: u32, x: u32, tie: TieBreakRule) -> bool {
    let (pay_a, pay_b) = (u * x as f64, (k - x) as f64);
    if (pay_a - pay_b).abs() <= TIE_TOL * pay_a.max(pay_b) {
        tie == TieBreakRule::FavorA
    } else {
        pay_a > pay_b
    }
}

/// Fraction of new agents of `player` choosing `a` when a share `p` of the
/// opposing population plays `a`, from `samples` simulated agents. Each
/// agent's `k` observations are separate Bernoulli(`p`) draws.
pub fn empirical_response(
    env: &Environment,
    player: usize,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<Estimate, OracleError> {
    if !(1..=2).contains(&player) {
        return Err(OracleError::InvalidPlayer(player));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(OracleError::ShareOutOfRange(p));
    }
    if samples == 0 {
        return Err(OracleError::NoSamples);
    }
    let u = env.game.payoff(player);
    let sizes = SizeSampler::new(env.theta(player));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let k = sizes.draw(&mut rng);
        let x = (0..k).filter(|_| rng.random::<f64>() < p).count() as u32;
        if chooses_a(u, k, x, env.tie) {
            hits += 1;
        }
    }
    let n = samples as f64;
    let value = hits as f64 / n;
    Ok(Estimate {
        value,
        std_error: (value * (1.0 - value) / n).sqrt(),
        samples,
    })
}

/// A finite population described by how many of its `n` agents play `a`.
/// Agents are exchangeable, so the count is a sufficient statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AgentPopulation {
    pub n: u32,
    pub playing_a: u32,
}

impl AgentPopulation {
    /// Population with `round(share · n)` agents on `a`.
    pub fn with_share(n: u32, share: f64) -> Self {
        Self {
            n,
            playing_a: (share * n as f64).round() as u32,
        }
    }

    pub fn share(&self) -> f64 {
        self.playing_a as f64 / self.n as f64
    }
}

/// Shares over time from one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalTrajectory {
    pub samples: Vec<(f64, State)>,
    pub n: u32,
    pub seed: u64,
    pub dt: f64,
}

impl EmpiricalTrajectory {
    pub fn final_state(&self) -> State {
        self.samples
            .last()
            .expect("a trajectory has its initial sample")
            .1
    }

    /// Trajectory CSV preceded by a `# seed=.. n=..` comment line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# seed={} n={}", self.seed, self.n)?;
        let one = matches!(self.samples[0].1, State::One(_));
        writeln!(out, "{}", if one { "t,p1" } else { "t,p1,p2" })?;
        for (t, s) in &self.samples {
            match s {
                State::One(p) => writeln!(out, "{t},{p}")?,
                State::Two(p1, p2) => writeln!(out, "{t},{p1},{p2}")?,
            }
        }
        Ok(())
    }
}

/// One revision step of `pop`: each agent dies with probability `dt` and is
/// replaced by a new agent who samples `opponent_share`.
fn revise(
    pop: AgentPopulation,
    opponent_share: f64,
    u: f64,
    sizes: &SizeSampler,
    tie: TieBreakRule,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> AgentPopulation {
    let deaths = |count: u32, rng: &mut ChaCha8Rng| {
        Binomial::new(count as u64, dt)
            .expect("dt lies in (0, 1]")
            .sample(rng) as u32
    };
    let dead_a = deaths(pop.playing_a, rng);
    let dead_b = deaths(pop.n - pop.playing_a, rng);
    let mut born_a = 0;
    for _ in 0..dead_a + dead_b {
        let k = sizes.draw(rng);
        // k draws with replacement: the number of `a` observations is binomial.
        let x = Binomial::new(k as u64, opponent_share)
            .expect("share lies in [0, 1]")
            .sample(rng) as u32;
        if chooses_a(u, k, x, tie) {
            born_a += 1;
        }
    }
    AgentPopulation {
        n: pop.n,
        playing_a: pop.playing_a - dead_a + born_a,
    }
}

/// Simulate `n` agents per population from `initial` up to `t_max`, with
/// synchronous steps of length `dt`. `State::One` runs a single population
/// that samples itself and requires a symmetric environment.
pub fn simulate_population(
    env: &Environment,
    initial: State,
    n: u32,
    t_max: f64,
    dt: f64,
    seed: u64,
) -> Result<EmpiricalTrajectory, OracleError> {
    if n < MIN_POPULATION {
        return Err(OracleError::PopulationTooSmall(n));
    }
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(OracleError::InvalidStep(dt));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(OracleError::InvalidHorizon(t_max));
    }
    if !initial.is_in_unit_box() {
        return Err(OracleError::OutsideDomain(initial));
    }
    if matches!(initial, State::One(_)) && !env.is_symmetric() {
        return Err(OracleError::NotSymmetric);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (t_max / dt - 1e-9).ceil() as usize;
    let s1 = SizeSampler::new(&env.theta1);
    let s2 = SizeSampler::new(&env.theta2);
    let (u1, u2) = (env.game.u1(), env.game.u2());
    let mut pop1 = AgentPopulation::with_share(n, initial.p1());
    let mut pop2 = AgentPopulation::with_share(n, initial.p2());
    let state = |a: &AgentPopulation, b: &AgentPopulation| match initial {
        State::One(_) => State::One(a.share()),
        State::Two(..) => State::Two(a.share(), b.share()),
    };
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, state(&pop1, &pop2)));
    for step in 1..=steps {
        match initial {
            State::One(_) => pop1 = revise(pop1, pop1.share(), u1, &s1, env.tie, dt, &mut rng),
            State::Two(..) => {
                let (x1, x2) = (pop1.share(), pop2.share());
                pop1 = revise(pop1, x2, u1, &s1, env.tie, dt, &mut rng);
                pop2 = revise(pop2, x1, u2, &s2, env.tie, dt, &mut rng);
            }
        }
        samples.push(((step as f64 * dt).min(t_max), state(&pop1, &pop2)));
    }
    Ok(EmpiricalTrajectory { samples, n, seed, dt })
}
