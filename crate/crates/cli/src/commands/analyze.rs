//! `analyze`: stationary states, stability labels and condition reports.

use serde_json::{json, Value};

use sampledyn_core::analysis::{
    check_homogeneous_uniqueness, check_theorem3, check_theorem4, classify_pure_states, find_stationary,
    response_efficiency, stable_interior_search, stationary_one, AnalysisError, StationarySet, DEFAULT_BIG_K,
};
use sampledyn_core::dynamics::{Dynamics, Response};
use sampledyn_core::extensions::{contracting_pure_stability, mineffort_pure_stability, MinEffortResponse};
use sampledyn_core::{miscoordination_probability, Environment, TheoremReport, TieBreakRule};

use super::{continuum_sentence, fmt_state, json_bytes, stationary_csv, system};
use crate::config::Model;
use crate::{CliError, Output, RunConfig};

pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    let model = cfg.model()?;
    let mut out = Output::default();
    let report = match &model {
        Model::Sampling { env, one_pop } => sampling(cfg, env, *one_pop, &mut out)?,
        Model::Logit { .. } => logit(&model, &mut out)?,
        Model::Contracting { game, theta1, theta2 } => {
            let reports = contracting_pure_stability(game, theta1, theta2);
            out.line(format!(
                "contracting game with {} actions (0-based):",
                game.actions()
            ));
            for r in &reports {
                out.line(format!(
                    "  action {}: {} (pareto efficient: {}; part 1: {}; part 2: {})",
                    r.action,
                    serde_json::to_value(r.label).unwrap().as_str().unwrap(),
                    r.pareto_efficient,
                    r.part1.verdict,
                    r.part2.verdict
                ));
            }
            json!({ "kind": "contracting", "equilibria": reports })
        }
        Model::MinEffort { game, theta } => {
            let st = mineffort_pure_stability(game, theta);
            let w = MinEffortResponse::new(*game, theta.clone());
            let set = stationary_one(&w);
            out.file("stationary.csv", stationary_csv(&set));
            if set.is_continuum() {
                out.line("stationary states: every state is stationary");
            } else {
                summarize_states(&mut out, &set, "one population, share of L");
            }
            let label = |l| serde_json::to_value(l).unwrap().as_str().unwrap().to_string();
            out.line(format!(
                "state L: {} (linearized: {})",
                label(st.low),
                st.linearized_low
            ));
            out.line(format!(
                "state H: {} (linearized: {})",
                label(st.high),
                st.linearized_high
            ));
            json!({ "kind": "min-effort", "stationary": set, "pure_states": st })
        }
    };
    out.file("report.json", json_bytes(&report));
    Ok(out)
}

fn summarize_states(out: &mut Output, set: &StationarySet, what: &str) {
    out.line(format!("stationary states ({what}):"));
    for s in set.states() {
        out.line(format!(
            "  {} {} slope product {:.6}",
            fmt_state(&s.state),
            s.stability,
            s.slope_product
        ));
    }
}

fn push_report(out: &mut Output, reports: &mut Vec<TheoremReport>, r: TheoremReport) {
    for part in &r.parts {
        out.line(format!("{} {}: {}", r.theorem, part.name, part.verdict));
    }
    reports.push(r);
}

fn skip(skipped: &mut Vec<Value>, check: &str, e: &AnalysisError) {
    skipped.push(json!({ "check": check, "reason": e.to_string() }));
}

fn sampling(cfg: &RunConfig, env: &Environment, one_pop: bool, out: &mut Output) -> Result<Value, CliError> {
    let model = Model::Sampling {
        env: env.clone(),
        one_pop,
    };
    let d = system(&model, "analyze")?;
    let set = find_stationary(&d);
    out.file("stationary.csv", stationary_csv(&set));
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    if set.is_continuum() {
        out.line(format!("stationary states: {}", continuum_sentence(&d)));
    } else {
        summarize_states(
            out,
            &set,
            if one_pop {
                "one population"
            } else {
                "two populations"
            },
        );
        for s in set.stable_interior() {
            out.line(format!(
                "  miscoordination at {}: {:.6}",
                fmt_state(&s.state),
                miscoordination_probability(s.state.p1(), s.state.p2())
            ));
        }
    }
    let pure = (!one_pop).then(|| classify_pure_states(env));
    if let Some(ps) = &pure {
        out.line(format!(
            "pure state a: {} (eigenvalue {:.9}); pure state b: {} (eigenvalue {:.9})",
            ps.a.stability,
            ps.a.leading_eigenvalue(),
            ps.b.stability,
            ps.b.leading_eigenvalue()
        ));
    }
    if env.theta1.degenerate_size().is_some() && env.theta2.degenerate_size().is_some() {
        match check_homogeneous_uniqueness(env) {
            Ok(r) => push_report(out, &mut reports, r),
            Err(e) => skip(&mut skipped, "homogeneous sample sizes", &e),
        }
    }
    if !one_pop {
        match check_theorem4(env) {
            Ok(r) => push_report(out, &mut reports, r),
            Err(e) => skip(&mut skipped, "miscoordination conditions", &e),
        }
    }
    let big_k = cfg.search.and_then(|s| s.big_k).unwrap_or(DEFAULT_BIG_K);
    if env.game.is_antisymmetric_type() && !env.game.is_symmetric() {
        match check_theorem3(&env.game, (&env.theta1, &env.theta2), big_k) {
            Ok(r) => push_report(out, &mut reports, r),
            Err(e) => skip(&mut skipped, "half large samples", &e),
        }
    }
    let mut search = Value::Null;
    if cfg.search.is_some() {
        if env.tie == TieBreakRule::FavorA {
            let s = stable_interior_search(&env.game, (&env.theta1, &env.theta2), big_k)
                .map_err(super::analysis_error)?;
            match (&s.alphas, &s.state) {
                (Some((a1, a2)), Some(st)) => out.line(format!(
                    "mixture search: stable interior state {} at weights ({a1}, {a2}) on the base laws",
                    fmt_state(&st.state)
                )),
                _ => out.line(format!(
                    "mixture search: no stable interior state in {} weight pairs",
                    s.examined
                )),
            }
            search = serde_json::to_value(&s).unwrap();
        } else {
            skipped
                .push(json!({ "check": "mixture search", "reason": "only ties favoring a are supported" }));
        }
    }
    for s in &skipped {
        out.line(format!(
            "skipped {}: {}",
            s["check"].as_str().unwrap(),
            s["reason"].as_str().unwrap()
        ));
    }
    Ok(json!({
        "kind": "sampling",
        "population": if one_pop { "one" } else { "two" },
        "game": env.game,
        "theta1": env.theta1,
        "theta2": env.theta2,
        "tie": env.tie,
        "stationary": set,
        "pure_states": pure.map(|p| json!({ "a": p.a, "b": p.b })),
        "reports": reports,
        "search": search,
        "skipped": skipped,
    }))
}

fn logit(model: &Model, out: &mut Output) -> Result<Value, CliError> {
    let Model::Logit { env, one_pop } = model else {
        unreachable!()
    };
    let d = system(model, "analyze")?;
    let set = find_stationary(&d);
    out.file("stationary.csv", stationary_csv(&set));
    summarize_states(
        out,
        &set,
        if *one_pop {
            "one population"
        } else {
            "two populations"
        },
    );
    let players: Vec<usize> = match d {
        Dynamics::One(_) => vec![1],
        Dynamics::Two(..) => vec![1, 2],
    };
    let mut pops = Vec::new();
    for i in players {
        let w = env.response(i).map_err(CliError::numeric)?;
        let mistake = w.value(0.0);
        let efficiency = response_efficiency(&w, env.game.payoff(i));
        out.line(format!(
            "population {i}: mistake probability at p = 0 is {mistake:.6}; payoff efficiency {:.2}%",
            100.0 * efficiency
        ));
        pops.push(json!({ "population": i, "mistake_at_zero": mistake, "efficiency": efficiency }));
    }
    Ok(json!({
        "kind": "logit",
        "population": if *one_pop { "one" } else { "two" },
        "game": env.game,
        "groups1": env.groups1,
        "groups2": env.groups2,
        "stationary": set,
        "responses": pops,
    }))
}
