//! `N`-player minimum-effort games with two effort levels. `L` pays 1;
//! `H` pays `2 − c` if every opponent plays `H` and `1 − c` otherwise.
//! The state `p` is the share of agents playing `L`.

use serde::{Deserialize, Serialize};

use super::ExtensionError;
use crate::analysis::{classify_slope, stationary_one, Condition, Relation, Stability, ALPHA_STEP};
use crate::dynamics::{
    DynamicsError, Response, SampleSizeDistribution, TailComponent, TailMixture, Truncation,
};

/// Slack used when an estimated payoff comparison is an exact tie.
const TIE_TOL: f64 = 1e-12;

/// What each observation in a sample reveals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observation {
    /// The minimum effort of a random round with `N − 1` random opponents.
    MinimumEffort,
    /// The action of one random opponent.
    OpponentAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMinEffort", into = "RawMinEffort")]
pub struct MinEffortGame {
    n: u32,
    c: f64,
    observation: Observation,
}

#[derive(Serialize, Deserialize)]
struct RawMinEffort {
    #[serde(rename = "N")]
    n: u32,
    c: f64,
    observation: Observation,
}

impl TryFrom<RawMinEffort> for MinEffortGame {
    type Error = ExtensionError;

    fn try_from(r: RawMinEffort) -> Result<Self, Self::Error> {
        Self::new(r.n, r.c, r.observation)
    }
}

impl From<MinEffortGame> for RawMinEffort {
    fn from(g: MinEffortGame) -> Self {
        Self {
            n: g.n,
            c: g.c,
            observation: g.observation,
        }
    }
}

impl MinEffortGame {
    pub fn new(n: u32, c: f64, observation: Observation) -> Result<Self, ExtensionError> {
        if n < 2 {
            return Err(ExtensionError::TooFewPlayers(n));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(ExtensionError::InvalidCost(c));
        }
        Ok(Self { n, c, observation })
    }

    pub fn players(&self) -> u32 {
        self.n
    }

    pub fn cost(&self) -> f64 {
        self.c
    }

    pub fn observation(&self) -> Observation {
        self.observation
    }

    /// Does an agent with sample size `k` and `x` observations of `L`
    /// choose `L`? The agent compares the payoff of `L` (1) with the
    /// estimated payoff of `H`, `1 − c + s`, where `s` estimates the chance
    /// that all `N − 1` opponents play `H`. Exact ties go to `L` under
    /// minimum-effort observation and to `H` under opponent-action
    /// observation.
    pub fn plays_low(&self, k: u32, x: u32) -> bool {
        let frac_high = (k - x) as f64 / k as f64;
        match self.observation {
            Observation::MinimumEffort => frac_high <= self.c + TIE_TOL,
            Observation::OpponentAction => frac_high.powi(self.n as i32 - 1) < self.c - TIE_TOL,
        }
    }

    /// Smallest count of `L` observations that leads to `L`.
    pub fn threshold(&self, k: u32) -> u32 {
        (0..=k).find(|&x| self.plays_low(k, x)).unwrap_or(k + 1)
    }
}

/// Share of new agents choosing `L` as a function of the share `p` of `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinEffortResponse {
    game: MinEffortGame,
    theta: SampleSizeDistribution,
    tails: TailMixture,
}

impl MinEffortResponse {
    pub fn new(game: MinEffortGame, theta: SampleSizeDistribution) -> Self {
        let components = theta
            .iter()
            .map(|(k, weight)| TailComponent {
                weight,
                k,
                m: game.threshold(k),
            })
            .filter(|c| c.m <= c.k)
            .collect();
        Self {
            game,
            theta,
            tails: TailMixture::new(components),
        }
    }

    pub fn game(&self) -> &MinEffortGame {
        &self.game
    }

    pub fn theta(&self) -> &SampleSizeDistribution {
        &self.theta
    }

    /// Probability that one observation shows `L`.
    fn observe_low(&self, p: f64) -> f64 {
        match self.game.observation {
            Observation::MinimumEffort => -((self.game.n - 1) as f64 * (-p).ln_1p()).exp_m1(),
            Observation::OpponentAction => p,
        }
    }

    fn observe_low_derivative(&self, p: f64) -> f64 {
        match self.game.observation {
            Observation::MinimumEffort => {
                let e = self.game.n as i32 - 1;
                e as f64 * (1.0 - p).powi(e - 1)
            }
            Observation::OpponentAction => 1.0,
        }
    }
}

impl Response for MinEffortResponse {
    fn value(&self, p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else if p >= 1.0 {
            1.0
        } else {
            self.tails.value(self.observe_low(p))
        }
    }

    fn derivative(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        self.tails.derivative(self.observe_low(p)) * self.observe_low_derivative(p)
    }

    fn is_identity(&self) -> bool {
        // One observation that is copied, of a single opponent's action.
        let copies = self.game.observation == Observation::OpponentAction || self.game.n == 2;
        copies && self.theta.is_unit() && self.game.threshold(1) == 1
    }
}

/// Validated evaluation of the minimum-effort response at `p`.
pub fn mineffort_response(
    g: &MinEffortGame,
    theta: &SampleSizeDistribution,
    p: f64,
) -> Result<f64, ExtensionError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ExtensionError::ShareOutOfRange(p));
    }
    Ok(MinEffortResponse::new(*g, theta.clone()).value(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PureLabel {
    AsymptoticallyStable,
    Unstable,
    /// The stated conditions do not decide, or a value lies in the band.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinEffortStability {
    /// Label of state `L` (`p = 1`) from the stated conditions.
    pub low: PureLabel,
    /// Label of state `H` (`p = 0`) from the stated conditions.
    pub high: PureLabel,
    pub conditions: Vec<Condition>,
    /// `w′(1)` and `w′(0)` of the implemented response.
    pub slope_low: f64,
    pub slope_high: f64,
    /// Labels from those slopes.
    pub linearized_low: Stability,
    pub linearized_high: Stability,
    pub notes: Vec<String>,
}

fn label(stable: &Condition, unstable: &Condition) -> PureLabel {
    if stable.boundary || unstable.boundary {
        PureLabel::Boundary
    } else if stable.satisfied {
        PureLabel::AsymptoticallyStable
    } else if unstable.satisfied {
        PureLabel::Unstable
    } else {
        PureLabel::Boundary
    }
}

/// Stability of the pure states `L` and `H`.
pub fn mineffort_pure_stability(g: &MinEffortGame, theta: &SampleSizeDistribution) -> MinEffortStability {
    let w = MinEffortResponse::new(*g, theta.clone());
    let (slope_low, slope_high) = (w.derivative(1.0), w.derivative(0.0));
    let n = g.n as f64;
    let c = g.c;
    let e = |cut: f64, mode| theta.truncated_expectation(cut, mode);
    let mut notes = Vec::new();
    let (low, high, conditions) = match g.observation {
        Observation::MinimumEffort => {
            let cut = 1.0 / (1.0 - c);
            let stable = Condition::new(
                "E_{≤1/(1−c)}(θ)",
                e(cut, Truncation::Weak),
                Relation::Less,
                1.0 / n,
            );
            let unstable = Condition::new(
                "E_{<1/(1−c)}(θ)",
                e(cut, Truncation::Strict),
                Relation::Greater,
                1.0 / n,
            );
            notes.push(
                "thresholds compare against 1/N; the linearization of w(p) = Σθ(k)·(1 − (1 − p)^{k(N−1)}) \
                 at H has slope (N − 1)·E_{≤1/(1−c)}(θ), so it compares against 1/(N − 1)"
                    .into(),
            );
            (
                PureLabel::AsymptoticallyStable,
                label(&stable, &unstable),
                vec![stable, unstable],
            )
        }
        Observation::OpponentAction => {
            let root = c.powf(1.0 / (n - 1.0));
            let cut_low = (1.0 / (1.0 - c)).powf(1.0 / (n - 1.0));
            let cut_high = 1.0 / (1.0 - root);
            let ls = Condition::new(
                "E_{≤(1/(1−c))^{1/(N−1)}}(θ)",
                e(cut_low, Truncation::Weak),
                Relation::Less,
                1.0,
            );
            let lu = Condition::new(
                "E_{<(1/(1−c))^{1/(N−1)}}(θ)",
                e(cut_low, Truncation::Strict),
                Relation::Greater,
                1.0,
            );
            let hs = Condition::new(
                "E_{≤1/(1−c^{1/(N−1)})}(θ)",
                e(cut_high, Truncation::Weak),
                Relation::Less,
                1.0,
            );
            let hu = Condition::new(
                "E_{<1/(1−c^{1/(N−1)})}(θ)",
                e(cut_high, Truncation::Strict),
                Relation::Greater,
                1.0,
            );
            notes.push(
                "near L an agent who sees one H plays H iff (1/k)^{N−1} ≥ c, so the linearized cutoff is \
                 (1/c)^{1/(N−1)}"
                    .into(),
            );
            (label(&ls, &lu), label(&hs, &hu), vec![ls, lu, hs, hu])
        }
    };
    MinEffortStability {
        low,
        high,
        conditions,
        slope_low,
        slope_high,
        linearized_low: classify_slope(slope_low),
        linearized_high: classify_slope(slope_high),
        notes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinEffortSearch {
    /// Mass on sample size `k`; the rest samples `big_k`.
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub slope: Option<f64>,
    pub residual: Option<f64>,
    /// Set when `k` violates the existence hypothesis; the search still runs.
    pub outside_hypothesis: Option<String>,
}

/// Scan `α ∈ {0.01, …, 0.99}` for the first mixture `{k: α, big_k: 1 − α}`
/// with an asymptotically stable interior state.
pub fn mineffort_stable_interior(
    g: &MinEffortGame,
    k: u32,
    big_k: u32,
) -> Result<MinEffortSearch, ExtensionError> {
    if k == 0 {
        return Err(DynamicsError::ZeroSampleSize.into());
    }
    if big_k <= k {
        return Err(ExtensionError::Analysis(
            crate::analysis::AnalysisError::Precondition(format!("big_k = {big_k} must exceed k = {k}")),
        ));
    }
    let kf = k as f64;
    let outside_hypothesis = match g.observation {
        Observation::MinimumEffort => {
            let bound = 1.0 / (1.0 - g.c);
            (kf >= bound).then(|| format!("k = {k} is not below 1/(1 − c) = {bound}"))
        }
        Observation::OpponentAction => {
            let bound = 1.0 / (1.0 - g.c.powf(1.0 / (g.n as f64 - 1.0)));
            (!(kf > 1.0 && kf < bound)).then(|| format!("k = {k} is not inside (1, {bound})"))
        }
    };
    let steps = (1.0 / ALPHA_STEP).round() as usize;
    for j in 1..steps {
        let alpha = j as f64 / steps as f64;
        let theta = SampleSizeDistribution::new([(k, alpha), (big_k, 1.0 - alpha)])?;
        let w = MinEffortResponse::new(*g, theta);
        let set = stationary_one(&w);
        let hit = set.stable_interior().next().cloned();
        if let Some(s) = hit {
            return Ok(MinEffortSearch {
                alpha: Some(alpha),
                p: Some(s.state.p1()),
                slope: Some(s.slope_product),
                residual: Some(s.residual),
                outside_hypothesis,
            });
        }
    }
    Ok(MinEffortSearch {
        alpha: None,
        p: None,
        slope: None,
        residual: None,
        outside_hypothesis,
    })
}
