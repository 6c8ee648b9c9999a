//! `phase`: response curves (CSV) and a phase plot (SVG).

use std::fmt::Write;

use sampledyn_core::analysis::find_stationary;
use sampledyn_core::dynamics::{Dynamics, Response, State};

use super::{continuum_sentence, fmt_state, system};
use crate::svg::{Arrow, Curve, Dot, Plot};
use crate::{CliError, Output, RunConfig};

/// Points on each response curve.
const CURVE_POINTS: usize = 201;
const DEFAULT_QUIVER: usize = 15;

fn grid() -> impl Iterator<Item = f64> {
    (0..CURVE_POINTS).map(|i| i as f64 / (CURVE_POINTS - 1) as f64)
}

pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    let model = cfg.model()?;
    let d = system(&model, "phase")?;
    let set = find_stationary(&d);
    let mut out = Output::default();
    let dots: Vec<Dot> = set
        .states()
        .iter()
        .map(|s| {
            let (x, y) = match s.state {
                State::One(p) => (p, p),
                State::Two(p1, p2) => (p1, p2),
            };
            Dot {
                x,
                y,
                stable: s.is_stable(),
            }
        })
        .collect();
    let mut csv = String::new();
    let plot = match &d {
        Dynamics::One(w) => {
            csv.push_str("p,w\n");
            for p in grid() {
                writeln!(csv, "{},{}", p, w.value(p)).unwrap();
            }
            Plot {
                title: format!("{} response and the diagonal", model.kind()),
                x_label: "p".into(),
                y_label: "w(p)".into(),
                curves: vec![
                    Curve {
                        points: vec![(0.0, 0.0), (1.0, 1.0)],
                        color: "#888888",
                        dashed: true,
                    },
                    Curve {
                        points: grid().map(|p| (p, w.value(p))).collect(),
                        color: "#1f4e9c",
                        dashed: false,
                    },
                ],
                arrows: Vec::new(),
                dots,
            }
        }
        Dynamics::Two(w1, w2) => {
            let (lo, hi) = (w1.value(0.0), w1.value(1.0));
            csv.push_str("p1,w2_of_p1,w1_inverse_of_p1\n");
            for p in grid() {
                // w1^{-1} is defined on the range of w1 only.
                let inv = if (lo..=hi).contains(&p) {
                    w1.inverse(p).map(|x| x.to_string()).unwrap_or_default()
                } else {
                    String::new()
                };
                writeln!(csv, "{},{},{}", p, w2.value(p), inv).unwrap();
            }
            let q = cfg.quiver.unwrap_or(DEFAULT_QUIVER);
            if q == 0 {
                return Err(CliError::config("quiver", "must be positive"));
            }
            let cell = 1.0 / q as f64;
            let arrows = (0..q)
                .flat_map(|i| (0..q).map(move |j| ((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell)))
                .map(|(x, y)| {
                    let f = d.field(&State::Two(x, y));
                    let norm = f.sup_norm().max(1e-12);
                    let len = 0.4 * cell * (norm / 0.05).min(1.0);
                    Arrow {
                        x,
                        y,
                        dx: f.p1() / norm * len,
                        dy: f.p2() / norm * len,
                    }
                })
                .collect();
            Plot {
                title: format!("{} two-population phase plot", model.kind()),
                x_label: "p1".into(),
                y_label: "p2".into(),
                curves: vec![
                    // p2 = w2(p1)
                    Curve {
                        points: grid().map(|p| (p, w2.value(p))).collect(),
                        color: "#1f4e9c",
                        dashed: false,
                    },
                    // p1 = w1(p2), drawn parametrically in p2
                    Curve {
                        points: grid().map(|p| (w1.value(p), p)).collect(),
                        color: "#b03a2e",
                        dashed: false,
                    },
                ],
                arrows,
                dots,
            }
        }
    };
    if set.is_continuum() {
        out.line(format!("stationary states: {}", continuum_sentence(&d)));
    } else {
        for s in set.states() {
            let mark = if s.is_stable() { "filled" } else { "hollow" };
            out.line(format!("{} {} ({mark})", fmt_state(&s.state), s.stability));
        }
    }
    out.file("phase.csv", csv);
    out.file("phase.svg", plot.render());
    out.line("wrote phase.svg and phase.csv");
    Ok(out)
}
