use proptest::prelude::*;

use super::*;
use crate::analysis::{classify_pure_states, find_stationary_two_pop};
use crate::dynamics::{SampleSizeDistribution, TieBreakRule};
use crate::games::CoordinationGame;

fn theta(pairs: &[(u32, f64)]) -> SampleSizeDistribution {
    SampleSizeDistribution::new(pairs.iter().copied()).unwrap()
}

fn deg(k: u32) -> SampleSizeDistribution {
    SampleSizeDistribution::degenerate(k).unwrap()
}

fn sym(u: f64, t: SampleSizeDistribution) -> Environment {
    Environment::symmetric(u, t).unwrap()
}

fn env(u1: f64, u2: f64, t1: SampleSizeDistribution, t2: SampleSizeDistribution) -> Environment {
    Environment::new(CoordinationGame::new(u1, u2).unwrap(), t1, t2)
}

fn three_state_env() -> Environment {
    let t = theta(&[(3, 0.5), (1000, 0.5)]);
    env(20.0, 0.05, t.clone(), t)
}

fn unique_state_env() -> Environment {
    let t = theta(&[(1, 0.5), (5, 0.5)]);
    env(5.0, 0.2, t.clone(), t)
}

fn limit(env: &Environment, p: State) -> State {
    convergence_limit(env, p).unwrap().state
}

#[test]
fn one_population_examples() {
    assert_eq!(limit(&sym(1.2, deg(2)), State::One(0.01)), State::One(1.0));
    assert_eq!(limit(&sym(1.2, deg(3)), State::One(0.49)), State::One(0.0));
    assert_eq!(limit(&sym(1.2, deg(3)), State::One(0.51)), State::One(1.0));
}

#[test]
fn rest_points_stay_put() {
    let e = three_state_env();
    for s in find_stationary_two_pop(&e).states() {
        let tr = integrate(&e, s.state, 50.0, DEFAULT_DT).unwrap();
        for (_, x) in &tr.samples {
            assert!(x.distance(&s.state) <= 1e-8);
        }
        assert!(tr.outcome.is_converged());
    }
    let tr = integrate(&sym(1.2, deg(3)), State::One(0.5), 100.0, DEFAULT_DT).unwrap();
    assert!(tr.samples.iter().all(|(_, x)| (x.p1() - 0.5).abs() <= 1e-8));
}

#[test]
fn limits_of_the_reference_environments() {
    let right = unique_state_env();
    let s = convergence_limit(&right, State::Two(0.2, 0.9)).unwrap();
    assert!(s.is_interior() && s.is_stable());
    assert_eq!(limit(&right, State::Two(0.0, 0.0)), State::Two(0.0, 0.0));
    let s = limit(&three_state_env(), State::Two(0.6, 0.4));
    assert!(
        (s.p1() - 0.77).abs() <= 1e-2 && (s.p2() - 0.23).abs() <= 1e-2,
        "{s:?}"
    );
}

#[test]
fn trajectory_times_and_csv() {
    let tr = integrate(&unique_state_env(), State::Two(0.3, 0.1), 2.0, 0.5).unwrap();
    let times: Vec<f64> = tr.samples.iter().map(|s| s.0).collect();
    assert_eq!(times, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    assert!(matches!(tr.outcome, Outcome::MaxTimeReached { .. }));
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,p1,p2");
    assert_eq!(lines[1], "0,0.3,0.1");
    assert_eq!(lines.len(), 6);

    let tr = integrate(&sym(1.2, deg(3)), State::One(0.4), 0.02, 0.01).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("t,p1\n0,0.4\n"));
}

#[test]
fn integration_is_deterministic() {
    let a = integrate(&three_state_env(), State::Two(0.6, 0.4), 20.0, DEFAULT_DT).unwrap();
    let b = integrate(&three_state_env(), State::Two(0.6, 0.4), 20.0, DEFAULT_DT).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rejects_bad_inputs() {
    let e = unique_state_env();
    assert!(matches!(
        integrate(&e, State::Two(0.5, 0.5), 1.0, 0.0),
        Err(FlowError::InvalidStep(_))
    ));
    assert!(matches!(
        integrate(&e, State::Two(0.5, 0.5), -1.0, 0.1),
        Err(FlowError::InvalidHorizon(_))
    ));
    assert!(matches!(
        integrate(&e, State::Two(1.5, 0.5), 1.0, 0.1),
        Err(FlowError::OutsideDomain(_))
    ));
    assert!(matches!(
        integrate(&e, State::One(0.5), 1.0, 0.1),
        Err(FlowError::Analysis(_))
    ));
    let d = e.two_population();
    let set = find_stationary(&d);
    assert!(matches!(
        integrate_dynamics(&d, &set, State::One(0.5), 1.0, 0.1),
        Err(FlowError::DimensionMismatch { state: 1, system: 2 })
    ));
    assert!(matches!(
        estimate_basins(&e, 1, BasinOptions::default()),
        Err(FlowError::InvalidResolution(1))
    ));
    assert!(matches!(
        estimate_basins(&sym(2.0, deg(1)), 5, BasinOptions::default()),
        Err(FlowError::Analysis(AnalysisError::Continuum))
    ));
}

#[test]
fn basins_of_the_cubic_split_at_one_half() {
    let g = estimate_basins_one_pop(&sym(1.2, deg(3)), 101, BasinOptions::default()).unwrap();
    assert_eq!(g.cells.len(), 101);
    assert_eq!(g.unresolved_share, 0.0);
    assert!((g.share_of(&State::One(0.0), 0.0) - 50.0 / 101.0).abs() < 1e-12);
    assert!((g.share_of(&State::One(1.0), 0.0) - 50.0 / 101.0).abs() < 1e-12);
    // The middle cell center is the unstable state itself.
    assert!((g.share_of(&State::One(0.5), 1e-9) - 1.0 / 101.0).abs() < 1e-12);
    let total: f64 = g.shares.iter().sum::<f64>() + g.unresolved_share;
    assert!((total - 1.0).abs() < 1.0 / 101.0);
}

#[test]
fn single_attractor_takes_everything() {
    let g = estimate_basins_one_pop(&sym(1.2, deg(2)), 40, BasinOptions::default()).unwrap();
    assert!((g.share_of(&State::One(1.0), 0.0) - 1.0).abs() < 1e-12);
}

#[test]
fn unique_state_basin_is_global() {
    let e = unique_state_env();
    let g = estimate_basins(&e, 21, BasinOptions::default()).unwrap();
    let interior = g.attractors.iter().position(|s| s.is_interior()).unwrap();
    assert!(g.cells.iter().all(|c| c.attractor == Some(interior)));
    assert!((g.shares[interior] - 1.0).abs() < 1e-12);

    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("cell_p1,cell_p2,attractor_index,flag\n"));
    assert_eq!(text.lines().count(), 1 + 21 * 21);
    let legend = serde_json::to_value(g.legend()).unwrap();
    assert_eq!(
        legend["attractors"][interior]["stability"],
        "asymptotically-stable"
    );
}

fn arb_theta() -> impl Strategy<Value = SampleSizeDistribution> {
    prop::collection::vec((1u32..=12, 0.05f64..1.0), 1..=3).prop_map(|pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        SampleSizeDistribution::new(pairs.into_iter().map(|(k, w)| (k, w / total))).unwrap()
    })
}

fn arb_env() -> impl Strategy<Value = Environment> {
    ((-1.2f64..1.2), (-1.2f64..1.2), arb_theta(), arb_theta())
        .prop_map(|(a, b, t1, t2)| env(10f64.powf(a), 10f64.powf(b), t1, t2))
        .prop_filter("not both unit samples", |e| {
            !(e.theta1.is_unit() && e.theta2.is_unit())
        })
}

/// No stationary state is near-marginal, so every limit is reached at an
/// exponential rate bounded away from zero.
fn clear_of_marginal(e: &Environment) -> bool {
    find_stationary_two_pop(e)
        .states()
        .iter()
        .all(|s| (s.slope_product - 1.0).abs() > 0.1)
}

fn unit_square() -> impl Strategy<Value = State> {
    (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| State::Two(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn trajectories_stay_in_the_unit_square(e in arb_env(), s in unit_square()) {
        let tr = integrate(&e, s, 30.0, DEFAULT_DT).unwrap();
        prop_assert!(tr.max_clamp < 1e-8, "clamp {}", tr.max_clamp);
        prop_assert!(tr.samples.iter().all(|(_, x)| x.is_in_unit_box()));
        prop_assert!(tr.samples.windows(2).all(|w| w[0].0 < w[1].0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn limits_exist_and_are_robust(e in arb_env(), s in unit_square()) {
        prop_assume!(clear_of_marginal(&e));
        let a = integrate(&e, s, 500.0, DEFAULT_DT).unwrap();
        prop_assert!(a.outcome.is_converged(), "{:?}", a.outcome);
        prop_assert!(a.outcome.index().is_some());
        let b = integrate(&e, s, 500.0, DEFAULT_DT / 2.0).unwrap();
        prop_assert!(a.final_state().distance(&b.final_state()) < 1e-8);

        let set = find_stationary_two_pop(&e);
        let target = set.states()[a.outcome.index().unwrap()].state;
        let n = a.samples.len();
        let tail = &a.samples[n - n / 10 - 1..];
        for w in tail.windows(2) {
            prop_assert!(w[1].1.distance(&target) <= w[0].1.distance(&target) + 1e-13);
        }
    }

    #[test]
    fn pure_state_labels_match_trajectories(e in arb_env()) {
        let set = find_stationary_two_pop(&e);
        let ps = classify_pure_states(&e);
        for (pure, corner, inward) in [(&ps.a, 1.0, -1e-3), (&ps.b, 0.0, 1e-3)] {
            let others_far = set
                .states()
                .iter()
                .all(|s| s.state.distance(&pure.state) == 0.0 || s.state.distance(&pure.state) > 0.02);
            if (pure.slope_product - 1.0).abs() <= 0.1 || !others_far {
                continue;
            }
            let start = State::Two(corner + inward, corner + inward);
            let tr = integrate(&e, start, DEFAULT_T_MAX, DEFAULT_DT).unwrap();
            if pure.is_stable() {
                prop_assert!(tr.final_state().distance(&pure.state) <= 1e-4, "{:?}", tr.outcome);
            } else {
                let far = tr.samples.iter().map(|(_, x)| x.distance(&pure.state)).fold(0.0, f64::max);
                prop_assert!(far > 1e-2, "max departure {far}");
            }
        }
    }
}

#[test]
fn favor_b_environment_integrates() {
    let e = sym(1.0, deg(2)).with_tie(TieBreakRule::FavorB);
    assert_eq!(limit(&e, State::One(0.9)), State::One(0.0));
}
