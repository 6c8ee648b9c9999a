//! Contracting games: `M` actions per player, positive payoffs `u_i^m` on
//! the diagonal and zero off it. Actions are indexed from 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::{binomial, ln_factorial};

use super::ExtensionError;
use crate::analysis::{Condition, Relation, ReportPart, Verdict};
use crate::dynamics::{SampleSizeDistribution, Truncation};

/// Payoffs within this distance count as equal.
const PAYOFF_TOL: f64 = 1e-12;

/// Largest number of enumerated samples for which response vectors are
/// computed exactly.
pub const ENUMERATION_LIMIT: f64 = 1e6;

/// Monte Carlo draws used above [`ENUMERATION_LIMIT`].
pub const MONTE_CARLO_DRAWS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawContracting", into = "RawContracting")]
pub struct ContractingGame {
    diag1: Vec<f64>,
    diag2: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawContracting {
    #[serde(rename = "M")]
    m: usize,
    diag1: Vec<f64>,
    diag2: Vec<f64>,
}

impl TryFrom<RawContracting> for ContractingGame {
    type Error = ExtensionError;

    fn try_from(r: RawContracting) -> Result<Self, Self::Error> {
        for (player, d) in [(1, &r.diag1), (2, &r.diag2)] {
            if d.len() != r.m {
                return Err(ExtensionError::LengthMismatch {
                    player,
                    got: d.len(),
                    expected: r.m,
                });
            }
        }
        Self::new(r.diag1, r.diag2)
    }
}

impl From<ContractingGame> for RawContracting {
    fn from(g: ContractingGame) -> Self {
        Self {
            m: g.diag1.len(),
            diag1: g.diag1,
            diag2: g.diag2,
        }
    }
}

impl ContractingGame {
    pub fn new(diag1: Vec<f64>, diag2: Vec<f64>) -> Result<Self, ExtensionError> {
        let m = diag1.len();
        if m < 2 {
            return Err(ExtensionError::TooFewActions(m));
        }
        if diag2.len() != m {
            return Err(ExtensionError::LengthMismatch {
                player: 2,
                got: diag2.len(),
                expected: m,
            });
        }
        for (player, d) in [(1, &diag1), (2, &diag2)] {
            if let Some((action, &value)) = d.iter().enumerate().find(|(_, &v)| !(v.is_finite() && v > 0.0)) {
                return Err(ExtensionError::NonPositivePayoff {
                    player,
                    action,
                    value,
                });
            }
        }
        for a in 0..m {
            for b in a + 1..m {
                if (diag1[a] - diag1[b]).abs() <= PAYOFF_TOL && (diag2[a] - diag2[b]).abs() <= PAYOFF_TOL {
                    return Err(ExtensionError::NotGeneric(a, b));
                }
            }
        }
        Ok(Self { diag1, diag2 })
    }

    /// Number of actions `M`.
    pub fn actions(&self) -> usize {
        self.diag1.len()
    }

    pub fn diag(&self, player: usize) -> Result<&[f64], ExtensionError> {
        match player {
            1 => Ok(&self.diag1),
            2 => Ok(&self.diag2),
            _ => Err(ExtensionError::InvalidPlayer(player)),
        }
    }

    /// Highest feasible payoff `ū_i`.
    pub fn best_payoff(&self, player: usize) -> Result<f64, ExtensionError> {
        Ok(self
            .diag(player)?
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// `a^m` is Pareto efficient if `u_1^m < u_1^n` implies `u_2^m > u_2^n`.
    pub fn is_pareto_efficient(&self, m: usize) -> bool {
        (0..self.actions()).all(|n| self.diag1[m] >= self.diag1[n] || self.diag2[m] > self.diag2[n])
    }
}

/// Tie-breaking among payoff-maximizing actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    #[default]
    Lowest,
    Highest,
    /// Each maximizer with equal probability.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponse {
    /// All actions attaining the maximal payoff, ascending.
    pub maximizers: Vec<usize>,
    /// The action selected by the rule; `None` for a uniform tie.
    pub chosen: Option<usize>,
}

impl BestResponse {
    pub fn is_tie(&self) -> bool {
        self.maximizers.len() > 1
    }
}

fn maximizers(diag: &[f64], counts: &[u32]) -> Vec<usize> {
    let values: Vec<f64> = diag.iter().zip(counts).map(|(u, &c)| u * c as f64).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = PAYOFF_TOL * best.abs().max(1.0);
    (0..values.len()).filter(|&m| values[m] >= best - tol).collect()
}

fn choose(maxes: &[usize], rule: TieRule) -> Option<usize> {
    match rule {
        TieRule::Lowest => maxes.first().copied(),
        TieRule::Highest => maxes.last().copied(),
        TieRule::Uniform if maxes.len() == 1 => Some(maxes[0]),
        TieRule::Uniform => None,
    }
}

/// Best reply of `player` to a sample with `counts[m]` observations of the
/// opponent's action `m`.
pub fn contracting_best_response(
    g: &ContractingGame,
    player: usize,
    counts: &[u32],
    rule: TieRule,
) -> Result<BestResponse, ExtensionError> {
    let diag = g.diag(player)?;
    if counts.len() != diag.len() {
        return Err(ExtensionError::LengthMismatch {
            player,
            got: counts.len(),
            expected: diag.len(),
        });
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(ExtensionError::EmptySample);
    }
    let maxes = maximizers(diag, counts);
    Ok(BestResponse {
        chosen: choose(&maxes, rule),
        maximizers: maxes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseVector {
    pub probs: Vec<f64>,
    /// Per-component standard errors in Monte Carlo mode.
    pub std_error: Option<Vec<f64>>,
    pub exact: bool,
    /// Probability (or frequency) of a sample with tied maximizers.
    pub tie_mass: f64,
}

fn check_simplex(p: &[f64], m: usize) -> Result<Vec<f64>, ExtensionError> {
    let sum: f64 = p.iter().sum();
    if p.len() != m || p.iter().any(|&x| x.is_nan() || x < -1e-10) || (sum - 1.0).abs() > 1e-10 {
        return Err(ExtensionError::NotOnSimplex(p.to_vec()));
    }
    Ok(p.iter().map(|&x| x.max(0.0)).collect())
}

/// Visit every count vector of length `m` summing to `k`.
fn for_each_composition(k: u32, m: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(rest: u32, idx: usize, counts: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if idx + 1 == counts.len() {
            counts[idx] = rest;
            f(counts);
            return;
        }
        for c in 0..=rest {
            counts[idx] = c;
            rec(rest - c, idx + 1, counts, f);
        }
    }
    let mut counts = vec![0u32; m];
    rec(k, 0, &mut counts, f);
}

fn add_choice(out: &mut [f64], maxes: &[usize], rule: TieRule, weight: f64) {
    match choose(maxes, rule) {
        Some(a) => out[a] += weight,
        None => {
            let share = weight / maxes.len() as f64;
            for &a in maxes {
                out[a] += share;
            }
        }
    }
}

/// Distribution of actions chosen by a new agent of `player` facing the
/// opponent state `p_opponent`: exact over all multinomial samples when
/// there are at most [`ENUMERATION_LIMIT`] of them, otherwise estimated
/// from [`MONTE_CARLO_DRAWS`] draws seeded by `seed`.
pub fn contracting_response_vector(
    g: &ContractingGame,
    player: usize,
    theta: &SampleSizeDistribution,
    p_opponent: &[f64],
    rule: TieRule,
    seed: u64,
) -> Result<ResponseVector, ExtensionError> {
    let diag = g.diag(player)?;
    let m = diag.len();
    let p = check_simplex(p_opponent, m)?;
    let terms: f64 = theta
        .iter()
        .map(|(k, _)| binomial((k as usize + m - 1) as u64, (m - 1) as u64))
        .sum();
    if terms <= ENUMERATION_LIMIT {
        Ok(exact_response(diag, theta, &p, rule))
    } else {
        Ok(monte_carlo_response(diag, theta, &p, rule, seed))
    }
}

fn exact_response(diag: &[f64], theta: &SampleSizeDistribution, p: &[f64], rule: TieRule) -> ResponseVector {
    let m = diag.len();
    let ln_p: Vec<f64> = p.iter().map(|x| x.ln()).collect();
    let mut out = vec![0.0; m];
    let mut tie_mass = 0.0;
    for (k, weight) in theta.iter() {
        let ln_kf = ln_factorial(k as u64);
        for_each_composition(k, m, &mut |counts| {
            if counts.iter().zip(p).any(|(&c, &x)| c > 0 && x == 0.0) {
                return;
            }
            let ln_prob: f64 = ln_kf
                + counts
                    .iter()
                    .zip(&ln_p)
                    .filter(|(&c, _)| c > 0)
                    .map(|(&c, &lp)| c as f64 * lp - ln_factorial(c as u64))
                    .sum::<f64>();
            let prob = weight * ln_prob.exp();
            let maxes = maximizers(diag, counts);
            if maxes.len() > 1 {
                tie_mass += prob;
            }
            add_choice(&mut out, &maxes, rule, prob);
        });
    }
    ResponseVector {
        probs: out,
        std_error: None,
        exact: true,
        tie_mass,
    }
}

fn monte_carlo_response(
    diag: &[f64],
    theta: &SampleSizeDistribution,
    p: &[f64],
    rule: TieRule,
    seed: u64,
) -> ResponseVector {
    let m = diag.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<(u32, f64)> = theta.iter().collect();
    let mut hits = vec![0u64; m];
    let mut ties = 0u64;
    let mut counts = vec![0u32; m];
    for _ in 0..MONTE_CARLO_DRAWS {
        let mut u: f64 = rng.random();
        let mut k = sizes[sizes.len() - 1].0;
        for &(size, w) in &sizes {
            if u < w {
                k = size;
                break;
            }
            u -= w;
        }
        let mut rest = k as u64;
        let mut mass_left = 1.0;
        for a in 0..m {
            let c = if a + 1 == m || rest == 0 {
                rest
            } else {
                let q = (p[a] / mass_left).clamp(0.0, 1.0);
                Binomial::new(rest, q).expect("valid binomial").sample(&mut rng)
            };
            counts[a] = c as u32;
            rest -= c;
            mass_left -= p[a];
        }
        let maxes = maximizers(diag, &counts);
        if maxes.len() > 1 {
            ties += 1;
        }
        let pick = choose(&maxes, rule).unwrap_or_else(|| maxes[rng.random_range(0..maxes.len())]);
        hits[pick] += 1;
    }
    let n = MONTE_CARLO_DRAWS as f64;
    let probs: Vec<f64> = hits.iter().map(|&h| h as f64 / n).collect();
    let std_error = probs.iter().map(|&q| (q * (1.0 - q) / n).sqrt()).collect();
    ResponseVector {
        probs,
        std_error: Some(std_error),
        exact: false,
        tie_mass: ties as f64 / n,
    }
}

/// Label of a pure equilibrium from its part-1 and part-2 conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractingLabel {
    Unstable,
    AsymptoticallyStable,
    /// Neither condition applies.
    Undetermined,
    /// A deciding product lies within the boundary band of 1.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub action: usize,
    pub pareto_efficient: bool,
    /// `θ1(1)·E_{<ū2/u2^m+1}(θ2) > 1` or `θ2(1)·E_{<ū1/u1^m+1}(θ1) > 1`.
    pub part1: ReportPart,
    /// `θ1(1)·E_{≤ū2/u2^m+1}(θ2) < 1` and `θ2(1)·E_{≤ū1/u1^m+1}(θ1) < 1`.
    pub part2: ReportPart,
    pub label: ContractingLabel,
}

/// Stability of each pure equilibrium `a^m` from truncated expectations.
pub fn contracting_pure_stability(
    g: &ContractingGame,
    theta1: &SampleSizeDistribution,
    theta2: &SampleSizeDistribution,
) -> Vec<EquilibriumReport> {
    let (bar1, bar2) = (g.best_payoff(1).unwrap(), g.best_payoff(2).unwrap());
    (0..g.actions())
        .map(|m| {
            let c2 = bar2 / g.diag2[m] + 1.0;
            let c1 = bar1 / g.diag1[m] + 1.0;
            let prod = |mode| {
                (
                    theta1.mass(1) * theta2.truncated_expectation(c2, mode),
                    theta2.mass(1) * theta1.truncated_expectation(c1, mode),
                )
            };
            let (s1, s2) = prod(Truncation::Strict);
            let (w1, w2) = prod(Truncation::Weak);
            let part1 = ReportPart::any(
                "part 1",
                vec![
                    Condition::new("θ1(1)·E_{<ū2/u2^m+1}(θ2)", s1, Relation::Greater, 1.0),
                    Condition::new("θ2(1)·E_{<ū1/u1^m+1}(θ1)", s2, Relation::Greater, 1.0),
                ],
            );
            let part2 = ReportPart::all(
                "part 2",
                vec![
                    Condition::new("θ1(1)·E_{≤ū2/u2^m+1}(θ2)", w1, Relation::Less, 1.0),
                    Condition::new("θ2(1)·E_{≤ū1/u1^m+1}(θ1)", w2, Relation::Less, 1.0),
                ],
            );
            let pareto_efficient = g.is_pareto_efficient(m);
            let label = match (part1.verdict, pareto_efficient, part2.verdict) {
                (Verdict::Holds, _, _) => ContractingLabel::Unstable,
                (Verdict::Boundary, _, _) => ContractingLabel::Boundary,
                (Verdict::Fails, true, Verdict::Holds) => ContractingLabel::AsymptoticallyStable,
                (Verdict::Fails, true, Verdict::Boundary) => ContractingLabel::Boundary,
                _ => ContractingLabel::Undetermined,
            };
            EquilibriumReport {
                action: m,
                pareto_efficient,
                part1,
                part2,
                label,
            }
        })
        .collect()
}

/// A pair of action distributions, one per population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractingState {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

impl ContractingState {
    /// Both populations at `a^m`.
    pub fn pure(m: usize, actions: usize) -> Self {
        let mut p = vec![0.0; actions];
        p[m] = 1.0;
        Self { p1: p.clone(), p2: p }
    }

    /// Sup-norm distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.p1
            .iter()
            .zip(&other.p1)
            .chain(self.p2.iter().zip(&other.p2))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractingTrajectory {
    pub samples: Vec<(f64, ContractingState)>,
}

impl ContractingTrajectory {
    pub fn final_state(&self) -> &ContractingState {
        &self.samples.last().expect("trajectory has a sample").1
    }
}

/// RK4 integration of `ṗ_1 = r_1(p_2) − p_1`, `ṗ_2 = r_2(p_1) − p_2` on
/// the product of simplices, with `r_i` from [`contracting_response_vector`].
/// Each step is projected back onto the simplex by clamping and
/// renormalizing.
#[allow(clippy::too_many_arguments)]
pub fn integrate_contracting(
    g: &ContractingGame,
    theta1: &SampleSizeDistribution,
    theta2: &SampleSizeDistribution,
    initial: ContractingState,
    t_max: f64,
    dt: f64,
    rule: TieRule,
    seed: u64,
) -> Result<ContractingTrajectory, ExtensionError> {
    if !(dt.is_finite() && dt > 0.0 && t_max.is_finite() && t_max > 0.0) {
        return Err(ExtensionError::InvalidStep);
    }
    let m = g.actions();
    check_simplex(&initial.p1, m)?;
    check_simplex(&initial.p2, m)?;
    let field = |s: &ContractingState| -> Result<ContractingState, ExtensionError> {
        let project = |p: &[f64]| -> Vec<f64> {
            let q: Vec<f64> = p.iter().map(|x| x.max(0.0)).collect();
            let sum: f64 = q.iter().sum();
            q.iter().map(|x| x / sum).collect()
        };
        let r1 = contracting_response_vector(g, 1, theta1, &project(&s.p2), rule, seed)?.probs;
        let r2 = contracting_response_vector(g, 2, theta2, &project(&s.p1), rule, seed)?.probs;
        Ok(ContractingState {
            p1: r1.iter().zip(&s.p1).map(|(r, p)| r - p).collect(),
            p2: r2.iter().zip(&s.p2).map(|(r, p)| r - p).collect(),
        })
    };
    let axpy = |s: &ContractingState, a: f64, k: &ContractingState| ContractingState {
        p1: s.p1.iter().zip(&k.p1).map(|(x, y)| x + a * y).collect(),
        p2: s.p2.iter().zip(&k.p2).map(|(x, y)| x + a * y).collect(),
    };
    let steps = (t_max / dt - 1e-9).ceil() as usize;
    let mut s = initial;
    let mut samples = vec![(0.0, s.clone())];
    for n in 0..steps {
        let k1 = field(&s)?;
        let k2 = field(&axpy(&s, 0.5 * dt, &k1))?;
        let k3 = field(&axpy(&s, 0.5 * dt, &k2))?;
        let k4 = field(&axpy(&s, dt, &k3))?;
        let mut next = s.clone();
        for (x, i) in next.p1.iter_mut().zip(0..) {
            *x += dt / 6.0 * (k1.p1[i] + 2.0 * k2.p1[i] + 2.0 * k3.p1[i] + k4.p1[i]);
        }
        for (x, i) in next.p2.iter_mut().zip(0..) {
            *x += dt / 6.0 * (k1.p2[i] + 2.0 * k2.p2[i] + 2.0 * k3.p2[i] + k4.p2[i]);
        }
        for p in [&mut next.p1, &mut next.p2] {
            p.iter_mut().for_each(|x| *x = x.max(0.0));
            let sum: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= sum);
        }
        s = next;
        samples.push(((n + 1) as f64 * dt, s.clone()));
    }
    Ok(ContractingTrajectory { samples })
}
