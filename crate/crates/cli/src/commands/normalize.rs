//! `normalize`: reduce a payoff matrix to `(u1, u2)` and report dominance
//! levels and the mixed equilibrium.

use serde_json::json;

use sampledyn_core::games::{normalize_general, normalize_hawk_dove, normalize_symmetric, CoordinationGame};

use super::json_bytes;
use crate::{CliError, Output, RunConfig};

pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    let given = [
        cfg.matrix.is_some(),
        cfg.symmetric.is_some(),
        cfg.hawk_dove.is_some(),
        cfg.game.is_some(),
    ];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(CliError::config(
            "normalize",
            "give exactly one of matrix, symmetric, hawk_dove, game",
        ));
    }
    fn bad(field: &'static str) -> impl Fn(sampledyn_core::GameError) -> CliError {
        move |e| CliError::config(field, &e.to_string())
    }
    if let Some(m) = &cfg.matrix {
        let n = normalize_general(m).map_err(bad("matrix"))?;
        // The general reduction already canonicalizes.
        return Ok(emit(n.game, "matrix", n.rows_relabeled, Some(n.swapped)));
    }
    let (game, source) = if let Some([u11, u12, u21, u22]) = cfg.symmetric {
        (
            normalize_symmetric(u11, u12, u21, u22).map_err(bad("symmetric"))?,
            "symmetric",
        )
    } else if let Some(h) = cfg.hawk_dove {
        (
            normalize_hawk_dove(h.g, h.l).map_err(bad("hawk_dove"))?,
            "hawk_dove",
        )
    } else {
        (cfg.game.expect("one input is present"), "game")
    };
    Ok(emit(game, source, false, None))
}

fn emit(game: CoordinationGame, source: &str, rows_relabeled: bool, swapped: Option<bool>) -> Output {
    let (canonical, swap) = match swapped {
        Some(s) => (game, s),
        None => game.canonicalize(),
    };
    let report = json!({
        "source": source,
        "game": game,
        "canonical": canonical,
        "swapped": swap,
        "rows_relabeled": rows_relabeled,
        "dominance": game.to_dominance(),
        "mixed_nash": game.mixed_nash(),
        "antisymmetric": (game.u1() * game.u2() - 1.0).abs() < 1e-12,
    });
    let mut out = Output::default();
    out.line(format!("u1 = {}, u2 = {}", game.u1(), game.u2()));
    if swap {
        out.line(format!(
            "canonical (labels swapped): u1 = {}, u2 = {}",
            canonical.u1(),
            canonical.u2()
        ));
    }
    let (p1, p2) = game.mixed_nash();
    out.line(format!("mixed equilibrium: ({p1:.6}, {p2:.6})"));
    out.file("normalize.json", json_bytes(&report));
    out
}
