//! Normalized 2×2 coordination games.
//!
//! A coordination game is reduced to a pair `(u1, u2)` of positive ratios.
//! Player `i` prefers action `a` against an opponent playing `a` with
//! probability `p` exactly when `u_i · p > 1 − p`. The canonical
//! orientation has `u1 ≥ 1`, obtained by swapping the labels of both actions
//! when necessary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Strict comparisons below this margin are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("payoff ratio {name} = {value} must be finite and positive")]
    NonPositiveRatio { name: &'static str, value: f64 },
    #[error("payoff {name} = {value} is not finite")]
    NonFinitePayoff { name: &'static str, value: f64 },
    #[error("payoff matrix is not a coordination game: {0}")]
    NotCoordination(String),
    #[error("hawk-dove parameters must lie strictly inside (0, 1) (got g = {g}, l = {l})")]
    InvalidHawkDove { g: f64, l: f64 },
    #[error("dominance level {name} = {value} must lie strictly inside (0, 1)")]
    InvalidDominance { name: &'static str, value: f64 },
}

/// A normalized coordination game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGame", into = "RawGame")]
pub struct CoordinationGame {
    u1: f64,
    u2: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGame {
    u1: f64,
    u2: f64,
}

impl TryFrom<RawGame> for CoordinationGame {
    type Error = GameError;
    fn try_from(raw: RawGame) -> Result<Self, GameError> {
        CoordinationGame::new(raw.u1, raw.u2)
    }
}

impl From<CoordinationGame> for RawGame {
    fn from(g: CoordinationGame) -> Self {
        RawGame { u1: g.u1, u2: g.u2 }
    }
}

fn check_ratio(name: &'static str, value: f64) -> Result<f64, GameError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GameError::NonPositiveRatio { name, value })
    }
}

impl CoordinationGame {
    pub fn new(u1: f64, u2: f64) -> Result<Self, GameError> {
        Ok(Self {
            u1: check_ratio("u1", u1)?,
            u2: check_ratio("u2", u2)?,
        })
    }

    /// Symmetric game with `u1 = u2 = u`.
    pub fn symmetric(u: f64) -> Result<Self, GameError> {
        Self::new(u, u)
    }

    pub fn u1(&self) -> f64 {
        self.u1
    }

    pub fn u2(&self) -> f64 {
        self.u2
    }

    /// Payoff ratio of player `i ∈ {1, 2}`.
    pub fn payoff(&self, player: usize) -> f64 {
        match player {
            1 => self.u1,
            2 => self.u2,
            _ => panic!("player index must be 1 or 2, got {player}"),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.u1 == self.u2
    }

    /// Relabel `a ↔ b` when `u1 < 1` so that player 1 weakly prefers `a`.
    /// Returns the canonical game and whether a swap happened.
    pub fn canonicalize(&self) -> (Self, bool) {
        if self.u1 < 1.0 {
            (self.swapped(), true)
        } else {
            (*self, false)
        }
    }

    /// The same game with the labels of both actions exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            u1: 1.0 / self.u1,
            u2: 1.0 / self.u2,
        }
    }

    /// `u1 > 1 > u2`: the players disagree on which equilibrium is better.
    pub fn is_antisymmetric_type(&self) -> bool {
        self.u1 > 1.0 && self.u2 < 1.0
    }

    /// Mixed equilibrium `(p1*, p2*)`, where `p_i*` is the share of `a` in
    /// population `i` that makes the opposite population indifferent.
    pub fn mixed_nash(&self) -> (f64, f64) {
        (1.0 / (1.0 + self.u2), 1.0 / (1.0 + self.u1))
    }

    pub fn to_dominance(&self) -> DominanceProfile {
        DominanceProfile {
            q1: 1.0 / (1.0 + self.u1),
            q2: 1.0 / (1.0 + self.u2),
        }
    }

    pub fn from_dominance(d: DominanceProfile) -> Result<Self, GameError> {
        let d = DominanceProfile::new(d.q1, d.q2)?;
        Self::new((1.0 - d.q1) / d.q1, (1.0 - d.q2) / d.q2)
    }
}

/// `q_i`: the smallest probability on `a` that makes `a` a best reply for
/// player `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceProfile {
    pub q1: f64,
    pub q2: f64,
}

impl DominanceProfile {
    pub fn new(q1: f64, q2: f64) -> Result<Self, GameError> {
        for (name, value) in [("q1", q1), ("q2", q2)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(GameError::InvalidDominance { name, value });
            }
        }
        Ok(Self { q1, q2 })
    }
}

/// A general 2×2 bimatrix game. `u_rc` is the row player's payoff when the
/// row player uses action `r` and the column player uses action `c`;
/// `v_rc` is the column player's payoff at the same cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub u11: f64,
    pub u12: f64,
    pub u21: f64,
    pub u22: f64,
    pub v11: f64,
    pub v12: f64,
    pub v21: f64,
    pub v22: f64,
}

impl PayoffMatrix {
    fn check_finite(&self) -> Result<(), GameError> {
        let entries = [
            ("u11", self.u11),
            ("u12", self.u12),
            ("u21", self.u21),
            ("u22", self.u22),
            ("v11", self.v11),
            ("v12", self.v12),
            ("v21", self.v21),
            ("v22", self.v22),
        ];
        for (name, value) in entries {
            if !value.is_finite() {
                return Err(GameError::NonFinitePayoff { name, value });
            }
        }
        Ok(())
    }

    /// The first strict-equilibrium inequality that fails, if any.
    fn diagonal_violation(&self) -> Option<&'static str> {
        let gt = |x: f64, y: f64| x - y > DEGENERACY_TOL;
        [
            (gt(self.u11, self.u21), "u11 > u21"),
            (gt(self.u22, self.u12), "u22 > u12"),
            (gt(self.v11, self.v12), "v11 > v12"),
            (gt(self.v22, self.v21), "v22 > v21"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }

    /// The game with the row player's two actions relabeled.
    fn with_rows_swapped(&self) -> Self {
        Self {
            u11: self.u21,
            u12: self.u22,
            u21: self.u11,
            u22: self.u12,
            v11: self.v21,
            v12: self.v22,
            v21: self.v11,
            v22: self.v12,
        }
    }
}

/// Result of reducing a bimatrix game to normalized form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalized {
    pub game: CoordinationGame,
    /// The row player's actions were relabeled to put the strict
    /// equilibria on the diagonal.
    pub rows_relabeled: bool,
    /// Both players' actions were relabeled to reach `u1 ≥ 1`.
    pub swapped: bool,
}

/// Reduce a bimatrix game with two strict pure equilibria to `(u1, u2)`.
pub fn normalize_general(m: &PayoffMatrix) -> Result<Normalized, GameError> {
    m.check_finite()?;
    let (m, rows_relabeled) = match m.diagonal_violation() {
        None => (*m, false),
        Some(violated) => {
            let flipped = m.with_rows_swapped();
            if let Some(flipped_violated) = flipped.diagonal_violation() {
                return Err(GameError::NotCoordination(format!(
                    "no two strict equilibria: {violated} fails on the diagonal and \
                     {flipped_violated} fails after relabeling the row player's actions"
                )));
            }
            (flipped, true)
        }
    };
    let u1 = (m.u11 - m.u21) / (m.u22 - m.u12);
    let u2 = (m.v11 - m.v12) / (m.v22 - m.v21);
    let (game, swapped) = CoordinationGame::new(u1, u2)?.canonicalize();
    Ok(Normalized {
        game,
        rows_relabeled,
        swapped,
    })
}

/// Reduce a symmetric game given by the row player's payoffs to `u`.
pub fn normalize_symmetric(u11: f64, u12: f64, u21: f64, u22: f64) -> Result<CoordinationGame, GameError> {
    for (name, value) in [("u11", u11), ("u12", u12), ("u21", u21), ("u22", u22)] {
        if !value.is_finite() {
            return Err(GameError::NonFinitePayoff { name, value });
        }
    }
    if u11 - u21 <= DEGENERACY_TOL {
        return Err(GameError::NotCoordination("u11 > u21 fails".into()));
    }
    if u22 - u12 <= DEGENERACY_TOL {
        return Err(GameError::NotCoordination("u22 > u12 fails".into()));
    }
    CoordinationGame::symmetric((u11 - u21) / (u22 - u12))
}

/// Hawk-dove game with gain `g` and loss `l`, both in `(0, 1)`, written as
/// a coordination game between `hawk`/`dove` for player 1 and
/// `dove`/`hawk` for player 2.
pub fn normalize_hawk_dove(g: f64, l: f64) -> Result<CoordinationGame, GameError> {
    if !(g > 0.0 && g < 1.0 && l > 0.0 && l < 1.0) {
        return Err(GameError::InvalidHawkDove { g, l });
    }
    CoordinationGame::new((1.0 - l) / g, g / (1.0 - l))
}

/// Payoff matrix of the hawk-dove game (row/column action 1 = hawk).
pub fn hawk_dove_matrix(g: f64, l: f64) -> PayoffMatrix {
    PayoffMatrix {
        u11: 0.0,
        u12: 1.0 + g,
        u21: 1.0 - l,
        u22: 1.0,
        v11: 0.0,
        v12: 1.0 - l,
        v21: 1.0 + g,
        v22: 1.0,
    }
}
