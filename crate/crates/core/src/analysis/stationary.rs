use serde::Serialize;

use super::{AnalysisError, Stability, StationaryState};
use crate::dynamics::{Dynamics, Environment, Response, State};

/// Points of the uniform scan grid on `[0, 1]`.
pub const GRID_POINTS: usize = 10_001;

/// Slope products within this distance of 1 are labeled marginal.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Grid values below this magnitude without a sign change trigger a
/// search for a double root.
const TANGENCY_SCAN_TOL: f64 = 1e-9;

/// A refined double root must reach this residual.
const TANGENCY_ACCEPT_TOL: f64 = 1e-12;

/// Endpoint values this small count as exact roots.
const ENDPOINT_TOL: f64 = 1e-14;

/// A root of a scalar map on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub p: f64,
    /// Found as a touching (double) root without a sign change.
    pub tangent: bool,
}

/// The stationary states of a system, or the sentinel for a system in
/// which a whole continuum of states is stationary.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "states", rename_all = "lowercase")]
pub enum StationarySet {
    Finite(Vec<StationaryState>),
    Continuum,
}

impl StationarySet {
    pub fn states(&self) -> &[StationaryState] {
        match self {
            StationarySet::Finite(s) => s,
            StationarySet::Continuum => &[],
        }
    }

    pub fn is_continuum(&self) -> bool {
        matches!(self, StationarySet::Continuum)
    }

    pub fn interior(&self) -> impl Iterator<Item = &StationaryState> {
        self.states().iter().filter(|s| s.is_interior())
    }

    pub fn stable_interior(&self) -> impl Iterator<Item = &StationaryState> {
        self.interior().filter(|s| s.is_stable())
    }

    /// Index of the state nearest to `s` in sup-norm, if within `tol`.
    pub fn nearest(&self, s: &State, tol: f64) -> Option<usize> {
        self.states()
            .iter()
            .enumerate()
            .map(|(i, st)| (i, st.state.distance(s)))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

/// Label a linearization slope (or slope product) against 1.
pub fn classify_slope(slope: f64) -> Stability {
    if slope < 1.0 - MARGINAL_TOL {
        Stability::AsymptoticallyStable
    } else if slope > 1.0 + MARGINAL_TOL {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}

fn grid(i: usize) -> f64 {
    i as f64 / (GRID_POINTS - 1) as f64
}

fn same_sign(a: f64, b: f64) -> bool {
    (a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0)
}

/// Bisection on a bracket with a sign change, run to adjacent doubles.
fn bisect(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    let mut gb = g(b);
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if same_sign(gm, ga) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
            gb = gm;
        }
    }
    if ga.abs() <= gb.abs() {
        a
    } else {
        b
    }
}

/// Golden-section minimization of `f` on `[a, b]`.
fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// All roots of `g` on `[0, 1]`: a sign-change scan on [`GRID_POINTS`]
/// nodes refined by bisection, plus double roots found by golden-section
/// refinement where `|g|` dips near zero without changing sign.
pub fn find_fixed_points(g: impl Fn(f64) -> f64) -> Vec<FixedPoint> {
    let n = GRID_POINTS;
    let mut gs: Vec<f64> = (0..n).map(|i| g(grid(i))).collect();
    for i in [0, n - 1] {
        if gs[i].abs() <= ENDPOINT_TOL {
            gs[i] = 0.0;
        }
    }
    let mut roots = Vec::new();
    for i in 0..n {
        if gs[i] == 0.0 {
            let touching = i > 0 && i + 1 < n && same_sign(gs[i - 1], gs[i + 1]);
            roots.push(FixedPoint {
                p: grid(i),
                tangent: touching,
            });
        } else if i + 1 < n && gs[i + 1] != 0.0 && !same_sign(gs[i], gs[i + 1]) {
            roots.push(FixedPoint {
                p: bisect(&g, grid(i), grid(i + 1), gs[i]),
                tangent: false,
            });
        }
    }
    let abs_g = |x: f64| g(x).abs();
    for i in 1..n - 1 {
        let v = gs[i];
        if v == 0.0 || v.abs() >= TANGENCY_SCAN_TOL {
            continue;
        }
        if !same_sign(v, gs[i - 1]) || !same_sign(v, gs[i + 1]) {
            continue;
        }
        if v.abs() > gs[i - 1].abs() || v.abs() > gs[i + 1].abs() {
            continue;
        }
        let x = golden_min(&abs_g, grid(i - 1), grid(i + 1));
        if abs_g(x) < TANGENCY_ACCEPT_TOL && roots.iter().all(|r: &FixedPoint| (r.p - x).abs() > 1e-6) {
            roots.push(FixedPoint { p: x, tangent: true });
        }
    }
    roots.sort_by(|a, b| a.p.total_cmp(&b.p));
    roots.dedup_by(|b, a| (b.p - a.p).abs() <= 1e-12);
    roots
}

/// One-population stationary states of `ṗ = w(p) − p`.
pub fn stationary_one<R: Response>(w: &R) -> StationarySet {
    if w.is_identity() {
        return StationarySet::Continuum;
    }
    let g = |p: f64| w.value(p) - p;
    let roots = find_fixed_points(g);
    let states = roots
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = r.p;
            let slope = w.derivative(p);
            let stability = if r.tangent {
                Stability::Marginal
            } else if p > 0.0 && p < 1.0 {
                classify_slope(slope)
            } else {
                endpoint_label(&g, &roots, i, slope)
            };
            StationaryState {
                state: State::One(p),
                stability,
                slope_product: slope,
                eigenvalues: vec![slope - 1.0],
                residual: g(p).abs(),
            }
        })
        .collect();
    StationarySet::Finite(states)
}

/// Endpoint label from the sign of `g` between the endpoint and its
/// nearest neighboring root.
fn endpoint_label(g: &impl Fn(f64) -> f64, roots: &[FixedPoint], i: usize, slope: f64) -> Stability {
    if classify_slope(slope) == Stability::Marginal {
        return Stability::Marginal;
    }
    let p = roots[i].p;
    let (neighbor, toward_interior) = if p <= 0.0 {
        (roots.get(i + 1).map_or(1.0, |r| r.p), 1.0)
    } else {
        (i.checked_sub(1).map_or(0.0, |j| roots[j].p), -1.0)
    };
    let s = g(0.5 * (p + neighbor)) * toward_interior;
    if s > 0.0 {
        Stability::Unstable
    } else if s < 0.0 {
        Stability::AsymptoticallyStable
    } else {
        Stability::Marginal
    }
}

/// Two-population stationary states: roots of `w1(w2(p1)) = p1` with
/// `p2 = w2(p1)`.
pub fn stationary_two<R: Response>(w1: &R, w2: &R) -> StationarySet {
    if w1.is_identity() && w2.is_identity() {
        return StationarySet::Continuum;
    }
    let roots = find_fixed_points(|p1: f64| w1.value(w2.value(p1)) - p1);
    let states = roots
        .iter()
        .map(|r| {
            let p1 = r.p;
            let p2 = w2.value(p1);
            let product = w1.derivative(p2) * w2.derivative(p1);
            let root = product.max(0.0).sqrt();
            StationaryState {
                state: State::Two(p1, p2),
                stability: if r.tangent {
                    Stability::Marginal
                } else {
                    classify_slope(product)
                },
                slope_product: product,
                eigenvalues: vec![-1.0 - root, -1.0 + root],
                residual: (w1.value(p2) - p1).abs().max((w2.value(p1) - p2).abs()),
            }
        })
        .collect();
    StationarySet::Finite(states)
}

/// Stationary states of either system.
pub fn find_stationary<R: Response>(d: &Dynamics<R>) -> StationarySet {
    match d {
        Dynamics::One(w) => stationary_one(w),
        Dynamics::Two(w1, w2) => stationary_two(w1, w2),
    }
}

/// Requires a symmetric environment (`u1 = u2`, `θ1 = θ2`).
pub fn find_stationary_one_pop(env: &Environment) -> Result<StationarySet, AnalysisError> {
    let d = env.one_population().ok_or_else(|| {
        AnalysisError::Precondition("one-population analysis needs u1 = u2 and θ1 = θ2".into())
    })?;
    Ok(find_stationary(&d))
}

pub fn find_stationary_two_pop(env: &Environment) -> StationarySet {
    find_stationary(&env.two_population())
}
