use serde::Serialize;

use super::stationary::{classify_slope, find_stationary_two_pop, stationary_two, GRID_POINTS};
use super::{miscoordination_probability, AnalysisError, Condition, Relation, ReportPart, TheoremReport};
use super::{Stability, StationaryState};
use crate::dynamics::{
    Environment, Response, SampleSizeDistribution, SamplingResponse, State, TieBreakRule, Truncation,
};
use crate::games::CoordinationGame;

/// Grid step of the mixture weights scanned by [`stable_interior_search`].
pub const ALPHA_STEP: f64 = 0.01;

/// Default sample size of the large-sample group in mixtures.
pub const DEFAULT_BIG_K: u32 = 1000;

/// Linearization at the two pure states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureStates {
    /// Everyone plays `a`: `(1, 1)`.
    pub a: StationaryState,
    /// Everyone plays `b`: `(0, 0)`.
    pub b: StationaryState,
}

fn pure_state(p: f64, product: f64) -> StationaryState {
    let root = product.max(0.0).sqrt();
    StationaryState {
        state: State::Two(p, p),
        stability: classify_slope(product),
        slope_product: product,
        eigenvalues: vec![-1.0 - root, -1.0 + root],
        residual: 0.0,
    }
}

/// Pure-state stability from truncated expectations of the sample sizes:
/// the Jacobian at a pure state has eigenvalues `−1 ± sqrt(x1·x2)`.
pub fn classify_pure_states(env: &Environment) -> PureStates {
    let (w1, w2) = (env.response(1), env.response(2));
    PureStates {
        a: pure_state(1.0, w1.slope_at_one() * w2.slope_at_one()),
        b: pure_state(0.0, w1.slope_at_zero() * w2.slope_at_zero()),
    }
}

/// Sufficient conditions for global convergence to miscoordination
/// (`part 1`) and for stability of some pure equilibrium (`part 2`).
pub fn check_theorem4(env: &Environment) -> Result<TheoremReport, AnalysisError> {
    let (u1, u2) = (env.game.u1(), env.game.u2());
    if u1 < 1.0 {
        return Err(AnalysisError::Precondition(format!(
            "the game must be canonical (u1 ≥ 1), got u1 = {u1}"
        )));
    }
    let (t1, t2) = (&env.theta1, &env.theta2);
    let c1 = 1.0 / u2 + 1.0;
    let c2 = u1 + 1.0;
    let strict1 = t1.mass(1) * t2.truncated_expectation(c1, Truncation::Strict);
    let strict2 = t2.mass(1) * t1.truncated_expectation(c2, Truncation::Strict);
    let weak1 = t1.mass(1) * t2.truncated_expectation(c1, Truncation::Weak);
    let weak2 = t2.mass(1) * t1.truncated_expectation(c2, Truncation::Weak);
    let part1 = ReportPart::all(
        "part 1",
        vec![
            Condition::new("θ1(1)·E_{<1/u2+1}(θ2)", strict1, Relation::Greater, 1.0),
            Condition::new("θ2(1)·E_{<u1+1}(θ1)", strict2, Relation::Greater, 1.0),
        ],
    );
    let part2 = ReportPart::any(
        "part 2",
        vec![
            Condition::new("θ1(1)·E_{≤1/u2+1}(θ2)", weak1, Relation::Less, 1.0),
            Condition::new("θ2(1)·E_{≤u1+1}(θ1)", weak2, Relation::Less, 1.0),
        ],
    );
    let mut report = TheoremReport::new("miscoordination conditions", vec![part1, part2]);
    report
        .notes
        .push("part 1 holding asserts global convergence to miscoordination".into());
    report
        .notes
        .push("part 2 holding asserts that some pure equilibrium is asymptotically stable".into());
    if env.tie != TieBreakRule::FavorA {
        report
            .notes
            .push("conditions are stated for ties broken toward a".into());
    }
    Ok(report)
}

/// With every agent sampling the same number of opponents, at most one
/// interior stationary state exists and it is unstable.
pub fn check_homogeneous_uniqueness(env: &Environment) -> Result<TheoremReport, AnalysisError> {
    let (k1, k2) = match (env.theta1.degenerate_size(), env.theta2.degenerate_size()) {
        (Some(k1), Some(k2)) => (k1, k2),
        _ => {
            return Err(AnalysisError::Precondition(
                "both sample-size distributions must be degenerate".into(),
            ))
        }
    };
    let set = find_stationary_two_pop(env);
    if set.is_continuum() {
        return Err(AnalysisError::Continuum);
    }
    let interior: Vec<&StationaryState> = set.interior().collect();
    let stable = interior.iter().filter(|s| s.is_stable()).count();
    let part = ReportPart::all(
        "uniqueness",
        vec![
            Condition::new(
                "interior stationary states",
                interior.len() as f64,
                Relation::AtMost,
                1.0,
            ),
            Condition::new("stable interior states", stable as f64, Relation::AtMost, 0.0),
        ],
    );
    Ok(TheoremReport::new("homogeneous sample sizes", vec![part]).with_note(format!("θ1 ≡ {k1}, θ2 ≡ {k2}")))
}

/// Result of scanning mixture weights for a stable interior state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    /// Mixture weights `(α1, α2)` on the base distributions.
    pub alphas: Option<(f64, f64)>,
    pub state: Option<StationaryState>,
    /// Hypotheses of the existence result that the inputs violate; the
    /// search still runs.
    pub outside_scope: Vec<String>,
    /// Number of weight pairs examined.
    pub examined: usize,
}

impl SearchOutcome {
    pub fn found(&self) -> bool {
        self.state.is_some()
    }
}

fn alpha(j: usize) -> f64 {
    j as f64 / 100.0
}

/// Base and large-sample parts of a population's response, kept apart so
/// that every mixture weight reuses the same tail evaluations.
struct SplitResponse {
    base: SamplingResponse,
    big: SamplingResponse,
}

impl SplitResponse {
    fn new(
        u: f64,
        base: &SampleSizeDistribution,
        big_k: u32,
        tie: TieBreakRule,
    ) -> Result<Self, AnalysisError> {
        Ok(Self {
            base: SamplingResponse::new(u, base.clone(), tie)?,
            big: SamplingResponse::new(u, SampleSizeDistribution::degenerate(big_k)?, tie)?,
        })
    }
}

/// Scan mixtures that put weight `α_i` on `base_i` and `1 − α_i` on
/// `big_k`, over `α_i ∈ {0.01, …, 0.99}`, for the first pair whose
/// two-population dynamics has an asymptotically stable interior state.
/// Equal weights are tried first in ascending order, then the full grid in
/// lexicographic order.
pub fn stable_interior_search(
    game: &CoordinationGame,
    base: (&SampleSizeDistribution, &SampleSizeDistribution),
    big_k: u32,
) -> Result<SearchOutcome, AnalysisError> {
    let bases = [base.0, base.1];
    let payoffs = [game.u1(), game.u2()];
    if bases.iter().any(|t| big_k <= t.max_size()) {
        return Err(AnalysisError::Precondition(format!(
            "big_k = {big_k} must exceed the largest base sample size"
        )));
    }
    let mut outside_scope = Vec::new();
    for i in 0..2 {
        let kmax = bases[i].max_size() as f64;
        if !(kmax > 1.0 && kmax < payoffs[i] + 1.0) {
            outside_scope.push(format!(
                "population {}: max sample size {} is not inside (1, u{} + 1) = (1, {})",
                i + 1,
                kmax,
                i + 1,
                payoffs[i] + 1.0
            ));
        }
    }
    let tie = TieBreakRule::FavorA;
    let r1 = SplitResponse::new(payoffs[0], bases[0], big_k, tie)?;
    let r2 = SplitResponse::new(payoffs[1], bases[1], big_k, tie)?;

    let n = GRID_POINTS;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let b2: Vec<f64> = xs.iter().map(|&x| r2.base.value(x)).collect();
    let k2: Vec<f64> = xs.iter().map(|&x| r2.big.value(x)).collect();
    // For each α2: population 1's base and big responses at w2(x).
    let mut cache: Vec<Option<(Vec<f64>, Vec<f64>)>> = vec![None; 100];
    let mut examined = 0;

    let order = (1..=99)
        .map(|j| (j, j))
        .chain((1..=99).flat_map(|j1| (1..=99).filter(move |&j2| j2 != j1).map(move |j2| (j1, j2))));
    for (j1, j2) in order {
        examined += 1;
        let (a1, a2) = (alpha(j1), alpha(j2));
        let (base_vals, big_vals) = cache[j2].get_or_insert_with(|| {
            let ys = (0..n).map(|i| a2 * b2[i] + (1.0 - a2) * k2[i]);
            ys.map(|y| (r1.base.value(y), r1.big.value(y))).unzip()
        });
        let g = |i: usize| a1 * base_vals[i] + (1.0 - a1) * big_vals[i] - xs[i];
        // A stable interior root is a downward crossing of h(p) − p.
        let crossing = (1..n - 2).any(|i| g(i) > 0.0 && g(i + 1) <= 0.0);
        if !crossing {
            continue;
        }
        let env = Environment::new(*game, bases[0].mixture(a1, big_k)?, bases[1].mixture(a2, big_k)?);
        let set = stationary_two(&env.response(1), &env.response(2));
        let hit = set.stable_interior().next().cloned();
        if let Some(s) = hit {
            return Ok(SearchOutcome {
                alphas: Some((a1, a2)),
                state: Some(s),
                outside_scope,
                examined,
            });
        }
    }
    Ok(SearchOutcome {
        alphas: None,
        state: None,
        outside_scope,
        examined,
    })
}

/// Giving half of each population a large sample creates a stable interior
/// state with miscoordination probability at least one half.
pub fn check_theorem3(
    game: &CoordinationGame,
    theta: (&SampleSizeDistribution, &SampleSizeDistribution),
    big_k: u32,
) -> Result<TheoremReport, AnalysisError> {
    if !game.is_antisymmetric_type() {
        return Err(AnalysisError::Precondition(format!(
            "needs u2 < 1 < u1, got ({}, {})",
            game.u1(),
            game.u2()
        )));
    }
    let env = Environment::new(*game, theta.0.mixture(0.5, big_k)?, theta.1.mixture(0.5, big_k)?);
    let set = find_stationary_two_pop(&env);
    let stable: Vec<&StationaryState> = set.stable_interior().collect();
    let best = stable
        .iter()
        .filter(|s| s.state.p2() < 0.5 && s.state.p1() > 0.5)
        .max_by(|a, b| {
            let m = |s: &StationaryState| miscoordination_probability(s.state.p1(), s.state.p2());
            m(a).total_cmp(&m(b))
        });
    let mut conditions = vec![Condition::new(
        "stable interior states",
        stable.len() as f64,
        Relation::AtLeast,
        1.0,
    )];
    let mut report_notes = Vec::new();
    match best {
        Some(s) => {
            let (p1, p2) = (s.state.p1(), s.state.p2());
            conditions.push(Condition::new(
                "miscoordination probability",
                miscoordination_probability(p1, p2),
                Relation::AtLeast,
                0.5,
            ));
            conditions.push(Condition::new("p1", p1, Relation::Greater, 0.5));
            conditions.push(Condition::new("p2", p2, Relation::Less, 0.5));
            report_notes.push(format!("stable interior state ({p1:.6}, {p2:.6})"));
        }
        None => {
            conditions.push(Condition::new(
                "stable interior states with p2 < 1/2 < p1",
                0.0,
                Relation::AtLeast,
                1.0,
            ));
            report_notes.push("u1 and 1/u2 may be too small for the conclusion to hold".into());
        }
    }
    let mut report = TheoremReport::new(
        "half large samples",
        vec![ReportPart::all("existence", conditions)],
    );
    report.notes = report_notes;
    Ok(report)
}

impl PureStates {
    pub fn labels(&self) -> (Stability, Stability) {
        (self.a.stability, self.b.stability)
    }
}
