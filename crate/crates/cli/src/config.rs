//! JSON run configurations and their validation.
//!
//! A configuration is one JSON object. `command` names the subcommand;
//! `environment` describes the model; the remaining fields are command
//! parameters. Unknown fields are rejected so that typos surface as errors.

use serde::Deserialize;
use serde_json::Value;

use sampledyn_core::dynamics::{LogitGroup, State};
use sampledyn_core::extensions::{ContractingGame, ContractingState, MinEffortGame, TieRule};
use sampledyn_core::games::{CoordinationGame, PayoffMatrix};
use sampledyn_core::{Environment, LogitEnvironment, SampleSizeDistribution, TieBreakRule};

use crate::CliError;

/// Every field any command accepts. Commands ignore fields they do not use.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub environment: Option<EnvironmentSpec>,
    /// One share, a pair of shares, or `{"p1": [...], "p2": [...]}` for
    /// contracting games.
    pub initial: Option<Value>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
    /// Population size for `oracle`.
    pub n: Option<u32>,
    /// Draws per grid point for the empirical response check of `oracle`.
    pub samples: Option<u64>,
    /// Number of grid points for the empirical response check of `oracle`.
    pub grid_points: Option<usize>,
    /// Points per axis of the quiver in two-population phase plots.
    pub quiver: Option<usize>,
    /// Run the mixture search in `analyze`.
    pub search: Option<SearchSpec>,
    pub sweep: Option<SweepSpec>,
    /// Contracting-game tie rule.
    pub tie_rule: Option<TieRule>,
    /// Inputs of `normalize`.
    pub matrix: Option<PayoffMatrix>,
    pub symmetric: Option<[f64; 4]>,
    pub hawk_dove: Option<HawkDoveSpec>,
    pub game: Option<CoordinationGame>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub big_k: Option<u32>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HawkDoveSpec {
    pub g: f64,
    pub l: f64,
}

/// Which quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Mass on sample size `k`; the rest goes to `big_k`.
    Mass,
    /// The payoff ratio of a one-population game, or `u1 = 1/u2` of an
    /// antisymmetric game in two-population mode.
    U,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub k: Option<u32>,
    pub big_k: Option<u32>,
}

impl SweepSpec {
    /// Grid values from `from` to `to` inclusive.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.step > 0.0 && self.from.is_finite() && self.to.is_finite() && self.to >= self.from) {
            return Err(CliError::config("sweep", "need finite from ≤ to and step > 0"));
        }
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err(CliError::config("sweep", "more than 100000 grid points"));
        }
        // Round to the step's decimal precision so 0.55 prints as 0.55.
        Ok((0..=n)
            .map(|i| round12(self.from + i as f64 * self.step))
            .collect())
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Population {
    One,
    Two,
}

/// Raw environment fields. Exactly one model family must be described.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub population: Option<Population>,
    pub u: Option<f64>,
    pub u1: Option<f64>,
    pub u2: Option<f64>,
    pub theta: Option<SampleSizeDistribution>,
    pub theta1: Option<SampleSizeDistribution>,
    pub theta2: Option<SampleSizeDistribution>,
    pub tie: Option<TieBreakRule>,
    pub groups: Option<Vec<LogitGroup>>,
    pub groups1: Option<Vec<LogitGroup>>,
    pub groups2: Option<Vec<LogitGroup>>,
    pub contracting: Option<ContractingGame>,
    pub min_effort: Option<MinEffortGame>,
}

/// A validated model.
#[derive(Debug, Clone)]
pub enum Model {
    Sampling {
        env: Environment,
        one_pop: bool,
    },
    Logit {
        env: LogitEnvironment,
        one_pop: bool,
    },
    Contracting {
        game: ContractingGame,
        theta1: SampleSizeDistribution,
        theta2: SampleSizeDistribution,
    },
    MinEffort {
        game: MinEffortGame,
        theta: SampleSizeDistribution,
    },
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Sampling { .. } => "sampling",
            Model::Logit { .. } => "logit",
            Model::Contracting { .. } => "contracting",
            Model::MinEffort { .. } => "min-effort",
        }
    }
}

fn pick<T: Clone>(
    shared: &Option<T>,
    first: &Option<T>,
    second: &Option<T>,
    names: [&str; 3],
) -> Result<((T, T), bool), CliError> {
    match (shared, first, second) {
        (Some(t), None, None) => Ok(((t.clone(), t.clone()), true)),
        (None, Some(a), Some(b)) => Ok(((a.clone(), b.clone()), false)),
        (None, Some(_), None) => Err(CliError::config(&format!("environment.{}", names[2]), "missing")),
        (None, None, Some(_)) => Err(CliError::config(&format!("environment.{}", names[1]), "missing")),
        (None, None, None) => Err(CliError::config(
            &format!("environment.{}", names[0]),
            &format!("missing (or give {} and {})", names[1], names[2]),
        )),
        _ => Err(CliError::config(
            &format!("environment.{}", names[0]),
            &format!("give either {} or both {} and {}", names[0], names[1], names[2]),
        )),
    }
}

impl EnvironmentSpec {
    fn game(&self) -> Result<(CoordinationGame, bool), CliError> {
        let ((u1, u2), shared) = pick(&self.u, &self.u1, &self.u2, ["u", "u1", "u2"])?;
        let game =
            CoordinationGame::new(u1, u2).map_err(|e| CliError::config("environment", &e.to_string()))?;
        Ok((game, shared))
    }

    fn one_population(&self, shared: bool, symmetric: bool) -> Result<bool, CliError> {
        match self.population {
            Some(Population::One) if !symmetric => Err(CliError::config(
                "environment.population",
                "one-population mode needs u1 = u2 and identical sample-size laws",
            )),
            Some(p) => Ok(p == Population::One),
            None => Ok(shared),
        }
    }

    fn reject(&self, fields: &[(&str, bool)], family: &str) -> Result<(), CliError> {
        for (name, present) in fields {
            if *present {
                return Err(CliError::config(
                    &format!("environment.{name}"),
                    &format!("not used by {family} environments"),
                ));
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<Model, CliError> {
        let logit = self.groups.is_some() || self.groups1.is_some() || self.groups2.is_some();
        let thetas = self.theta.is_some() || self.theta1.is_some() || self.theta2.is_some();
        let payoffs = self.u.is_some() || self.u1.is_some() || self.u2.is_some();
        if let Some(game) = &self.contracting {
            self.reject(
                &[
                    ("min_effort", self.min_effort.is_some()),
                    ("groups", logit),
                    ("u", payoffs),
                    ("tie", self.tie.is_some()),
                ],
                "contracting",
            )?;
            let ((theta1, theta2), _) = pick(
                &self.theta,
                &self.theta1,
                &self.theta2,
                ["theta", "theta1", "theta2"],
            )?;
            return Ok(Model::Contracting {
                game: game.clone(),
                theta1,
                theta2,
            });
        }
        if let Some(game) = &self.min_effort {
            self.reject(
                &[
                    ("groups", logit),
                    ("u", payoffs),
                    ("tie", self.tie.is_some()),
                    ("theta1", self.theta1.is_some()),
                    ("theta2", self.theta2.is_some()),
                ],
                "min-effort",
            )?;
            let theta = self
                .theta
                .clone()
                .ok_or_else(|| CliError::config("environment.theta", "missing"))?;
            return Ok(Model::MinEffort { game: *game, theta });
        }
        let (game, shared_u) = self.game()?;
        if logit {
            self.reject(&[("theta", thetas), ("tie", self.tie.is_some())], "logit")?;
            let ((groups1, groups2), shared_g) = pick(
                &self.groups,
                &self.groups1,
                &self.groups2,
                ["groups", "groups1", "groups2"],
            )?;
            let env = LogitEnvironment {
                game,
                groups1,
                groups2,
            };
            env.two_population()
                .map_err(|e| CliError::config("environment.groups", &e.to_string()))?;
            let one_pop = self.one_population(shared_u && shared_g, env.is_symmetric())?;
            return Ok(Model::Logit { env, one_pop });
        }
        let ((theta1, theta2), shared_t) = pick(
            &self.theta,
            &self.theta1,
            &self.theta2,
            ["theta", "theta1", "theta2"],
        )?;
        let env = Environment::new(game, theta1, theta2).with_tie(self.tie.unwrap_or_default());
        let one_pop = self.one_population(shared_u && shared_t, env.is_symmetric())?;
        Ok(Model::Sampling { env, one_pop })
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
    }

    pub fn model(&self) -> Result<Model, CliError> {
        self.environment
            .as_ref()
            .ok_or_else(|| CliError::config("environment", "missing"))?
            .resolve()
    }

    pub fn positive(&self, name: &str, value: Option<f64>, default: f64) -> Result<f64, CliError> {
        let v = value.unwrap_or(default);
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(CliError::config(
                name,
                &format!("must be positive and finite, got {v}"),
            ))
        }
    }

    pub fn t_max(&self, default: f64) -> Result<f64, CliError> {
        self.positive("t_max", self.t_max, default)
    }

    pub fn dt(&self, default: f64) -> Result<f64, CliError> {
        self.positive("dt", self.dt, default)
    }

    pub fn resolution(&self, default: usize) -> Result<usize, CliError> {
        let r = self.resolution.unwrap_or(default);
        if r < 2 {
            return Err(CliError::config(
                "resolution",
                &format!("must be at least 2, got {r}"),
            ));
        }
        Ok(r)
    }

    /// The initial state of a one- or two-population system.
    pub fn initial_state(&self, one_pop: bool) -> Result<State, CliError> {
        let v = self
            .initial
            .as_ref()
            .ok_or_else(|| CliError::config("initial", "missing"))?;
        let share = |x: &Value| -> Result<f64, CliError> {
            x.as_f64()
                .filter(|p| (0.0..=1.0).contains(p))
                .ok_or_else(|| CliError::config("initial", &format!("{x} is not a share in [0, 1]")))
        };
        match (one_pop, v) {
            (true, Value::Number(_)) => Ok(State::One(share(v)?)),
            (true, Value::Array(a)) if a.len() == 1 => Ok(State::One(share(&a[0])?)),
            (false, Value::Array(a)) if a.len() == 2 => Ok(State::Two(share(&a[0])?, share(&a[1])?)),
            (true, _) => Err(CliError::config(
                "initial",
                "expected one share for a one-population model",
            )),
            (false, _) => Err(CliError::config(
                "initial",
                "expected [p1, p2] for a two-population model",
            )),
        }
    }

    /// The initial state of a contracting game.
    pub fn contracting_initial(&self, actions: usize) -> Result<ContractingState, CliError> {
        let v = self
            .initial
            .clone()
            .ok_or_else(|| CliError::config("initial", "missing"))?;
        let s: ContractingState = serde_json::from_value(v).map_err(|e| {
            CliError::config(
                "initial",
                &format!("expected {{\"p1\": [...], \"p2\": [...]}}: {e}"),
            )
        })?;
        for (name, p) in [("initial.p1", &s.p1), ("initial.p2", &s.p2)] {
            let sum: f64 = p.iter().sum();
            if p.len() != actions || p.iter().any(|x| !(0.0..=1.0).contains(x)) || (sum - 1.0).abs() > 1e-9 {
                return Err(CliError::config(
                    name,
                    &format!("must be a distribution over {actions} actions"),
                ));
            }
        }
        Ok(s)
    }
}
