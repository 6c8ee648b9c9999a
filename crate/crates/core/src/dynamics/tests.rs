use super::*;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

fn theta(pairs: &[(u32, f64)]) -> SampleSizeDistribution {
    SampleSizeDistribution::new(pairs.iter().copied()).unwrap()
}

fn sampling(u: f64, pairs: &[(u32, f64)]) -> SamplingResponse {
    SamplingResponse::new(u, theta(pairs), TieBreakRule::FavorA).unwrap()
}

#[test]
fn threshold_examples() {
    assert_eq!(sampling_threshold(3, 1.2, TieBreakRule::FavorA), 2);
    assert_eq!(sampling_threshold(2, 1.0, TieBreakRule::FavorA), 1);
    assert_eq!(sampling_threshold(2, 1.0, TieBreakRule::FavorB), 2);
    for &u in &[0.05, 0.5, 1.0, 7.0, 20.0] {
        for rule in [TieBreakRule::FavorA, TieBreakRule::FavorB] {
            assert_eq!(sampling_threshold(1, u, rule), 1);
        }
    }
    // 6/(0.2 + 1) = 5 up to rounding.
    assert_eq!(sampling_threshold(6, 0.2, TieBreakRule::FavorA), 5);
    assert_eq!(sampling_threshold(6, 0.2, TieBreakRule::FavorB), 6);
}

#[test]
fn threshold_matches_direct_comparison() {
    // m is the least x with u·x ≥ k − x (favor-a) or u·x > k − x (favor-b).
    for k in 1..=40u32 {
        for &u in &[0.05, 0.2, 0.37, 1.0, 1.2, 1.5, 2.5, 3.0, 5.0, 20.0] {
            let least = |strict: bool| {
                (0..=k)
                    .find(|&x| {
                        let lhs = u * x as f64;
                        let rhs = (k - x) as f64;
                        if (lhs - rhs).abs() <= 1e-9 {
                            !strict
                        } else {
                            lhs > rhs
                        }
                    })
                    .unwrap()
            };
            assert_eq!(
                sampling_threshold(k, u, TieBreakRule::FavorA),
                least(false),
                "k={k} u={u}"
            );
            assert_eq!(
                sampling_threshold(k, u, TieBreakRule::FavorB),
                least(true),
                "k={k} u={u}"
            );
        }
    }
}

#[test]
fn sampling_response_examples() {
    let w1 = sampling(1.2, &[(1, 1.0)]);
    for i in 0..=1000 {
        let p = i as f64 / 1000.0;
        assert!((w1.value(p) - p).abs() < 1e-12);
    }
    let w2 = sampling(1.2, &[(2, 1.0)]);
    assert!((w2.value(0.5) - 0.75).abs() < 1e-15);
    let w3 = sampling(1.2, &[(3, 1.0)]);
    assert!((w3.value(0.5) - 0.5).abs() < 1e-15);
    assert!((w3.value(0.2) - (3.0 * 0.04 * 0.8 + 0.008)).abs() < 1e-15);
}

#[test]
fn sampling_response_boundary_values() {
    for &u in &[0.05, 0.3, 1.0, 2.5, 20.0] {
        let w = sampling(u, &[(1, 0.2), (3, 0.3), (17, 0.25), (1000, 0.25)]);
        assert_eq!(w.value(0.0), 0.0);
        assert!((w.value(1.0) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn derivative_examples() {
    let w1 = sampling(1.2, &[(1, 1.0)]);
    for &p in &[0.0, 0.3, 1.0] {
        assert_eq!(w1.derivative(p), 1.0);
    }
    let w2 = sampling(1.2, &[(2, 1.0)]);
    assert_eq!(w2.derivative(0.0), 2.0);
    assert!((w2.derivative(0.3) - 1.4).abs() < 1e-15);
    let w3 = sampling(1.2, &[(3, 1.0)]);
    assert!((w3.derivative(0.5) - 1.5).abs() < 1e-15);
}

#[test]
fn pure_state_slopes_equal_derivatives() {
    for &u in &[0.05, 0.2, 0.5, 1.0, 1.5, 4.0, 20.0] {
        for tie in [TieBreakRule::FavorA, TieBreakRule::FavorB] {
            let w = SamplingResponse::new(u, theta(&[(1, 0.3), (2, 0.2), (5, 0.3), (21, 0.2)]), tie).unwrap();
            assert!((w.slope_at_zero() - w.derivative(0.0)).abs() < 1e-12, "u={u}");
            assert!((w.slope_at_one() - w.derivative(1.0)).abs() < 1e-12, "u={u}");
        }
    }
}

#[test]
fn inverse_examples() {
    let w2 = sampling(1.2, &[(2, 1.0)]);
    assert!((w2.inverse(0.75).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(w2.inverse(0.0).unwrap(), 0.0);
    assert_eq!(w2.inverse(1.0).unwrap(), 1.0);
    let w1 = sampling(3.0, &[(1, 1.0)]);
    assert_eq!(w1.inverse(0.123).unwrap(), 0.123);
    let w = sampling(1.5, &[(2, 0.55), (1000, 0.45)]);
    let y = w.value(0.3);
    assert!((w.inverse(y).unwrap() - 0.3).abs() < 1e-10);
}

#[test]
fn logit_examples() {
    let sym = LogitResponse::homogeneous(1.0, 0.3).unwrap();
    assert!((sym.value(0.5) - 0.5).abs() < 1e-15);
    let hom = LogitResponse::homogeneous(2.5, 1.0).unwrap();
    assert!((hom.value(0.0) - 1.0 / (1.0 + 1f64.exp())).abs() < 1e-15);
    let het = LogitResponse::new(
        2.5,
        vec![
            LogitGroup {
                mass: 0.55,
                eta: 0.55,
            },
            LogitGroup {
                mass: 0.45,
                eta: 0.01,
            },
        ],
    )
    .unwrap();
    let expected = 0.55 / (1.0 + (1.0f64 / 0.55).exp()) + 0.45 / (1.0 + 100f64.exp());
    assert!((het.value(0.0) - expected).abs() < 1e-15);
    assert!((het.value(0.0) - 0.077).abs() < 5e-4);
    assert!(het.value(0.0) > 0.0 && het.value(1.0) < 1.0);
}

#[test]
fn logit_stays_finite_at_low_noise() {
    let w = LogitResponse::homogeneous(2.5, 1e-4).unwrap();
    for i in 0..=100 {
        let p = i as f64 / 100.0;
        assert!(w.value(p).is_finite() && w.derivative(p).is_finite());
    }
}

#[test]
fn logit_validation_and_inverse_range() {
    assert!(matches!(
        LogitResponse::homogeneous(2.5, 0.0),
        Err(DynamicsError::InvalidNoise(_))
    ));
    assert!(LogitResponse::new(2.5, vec![LogitGroup { mass: 0.7, eta: 1.0 }]).is_err());
    assert!(LogitResponse::new(2.5, vec![]).is_err());
    let w = LogitResponse::homogeneous(2.5, 1.0).unwrap();
    assert!(matches!(w.inverse(0.01), Err(DynamicsError::OutsideRange { .. })));
    assert!(matches!(
        w.inverse(0.999),
        Err(DynamicsError::OutsideRange { .. })
    ));
    let y = w.value(0.3);
    assert!((w.inverse(y).unwrap() - 0.3).abs() < 1e-10);
}

/// Exact rational value of a finite double as `(numerator, log2 denominator)`.
fn dyadic(x: f64) -> (BigInt, u32) {
    assert!(x.is_finite() && x >= 0.0);
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    if e >= 0 {
        (BigInt::from(mant) << e as usize, 0)
    } else {
        (BigInt::from(mant), (-e) as u32)
    }
}

/// Exact evaluation of `Σ θ(k) Σ_j c_j p^j` from integer tail coefficients,
/// rounded to the nearest double at the end.
fn exact_polynomial_value(w: &SamplingResponse, p: f64) -> f64 {
    let (pn, ps) = dyadic(p);
    let mut num = BigInt::zero();
    let mut den_log2: u32 = 0;
    let mut terms: Vec<(BigInt, u32)> = Vec::new();
    for c in w.tails().components() {
        let (wn, ws) = dyadic(c.weight);
        let coeffs = tail_coefficients(c.k, c.m).unwrap();
        let mut poly = BigInt::zero();
        let mut pow = BigInt::one();
        let d = c.k;
        for (j, &cj) in coeffs.iter().enumerate() {
            // c_j · pn^j · 2^{ps (d − j)} over 2^{ps d}
            let scale = ps * (d - j as u32);
            poly += (BigInt::from(cj) * &pow) << scale as usize;
            pow *= &pn;
        }
        terms.push((wn * poly, ws + ps * d));
    }
    for (_, s) in &terms {
        den_log2 = den_log2.max(*s);
    }
    for (n, s) in terms {
        num += n << (den_log2 - s) as usize;
    }
    // Scale down to a double without losing the leading bits.
    let shift = (num.bits() as i64 - 60).max(0) as u32;
    let top = (num.abs() >> shift as usize).to_f64().unwrap() * num.signum().to_f64().unwrap();
    top * 2f64.powi(shift as i32 - den_log2 as i32)
}

#[test]
fn polynomial_identity_matches_tail_summation() {
    let envs: Vec<SamplingResponse> = vec![
        sampling(1.2, &[(3, 1.0)]),
        sampling(1.5, &[(2, 0.55), (50, 0.45)]),
        sampling(0.3, &[(1, 0.25), (7, 0.25), (19, 0.25), (44, 0.25)]),
        sampling(5.0, &[(1, 0.5), (5, 0.5)]),
        sampling(2.0, &[(50, 1.0)]),
        sampling(0.05, &[(3, 0.5), (50, 0.5)]),
    ];
    for w in &envs {
        for i in 0..=64 {
            let p = i as f64 / 64.0;
            let exact = exact_polynomial_value(w, p);
            assert!(
                (exact - w.value(p)).abs() < 1e-10,
                "p={p}: {exact} vs {}",
                w.value(p)
            );
        }
    }
}

#[test]
fn polynomial_degree_is_max_support() {
    for pairs in [
        vec![(3u32, 1.0)],
        vec![(1, 0.5), (5, 0.5)],
        vec![(2, 0.3), (9, 0.3), (40, 0.4)],
    ] {
        let w = sampling(1.3, &pairs);
        let c = w.coefficients().unwrap();
        let max = pairs.iter().map(|p| p.0).max().unwrap() as usize;
        assert_eq!(c.len(), max + 1);
        assert!(c[max] != 0.0);
    }
}

/// Strict increase, except where both values sit within rounding of a
/// saturated end of the range `[lo, hi]` and the true increment is below
/// one ulp.
fn increases(prev: f64, v: f64, lo: f64, hi: f64) -> bool {
    v > prev || (v == prev && (v >= hi - 1e-14 || v <= lo * (1.0 + 1e-14) + 1e-300))
}

fn arb_theta() -> impl Strategy<Value = SampleSizeDistribution> {
    prop::collection::btree_map(1u32..=30, 0.05f64..1.0, 1..5).prop_map(|m| {
        let total: f64 = m.values().sum();
        let mut pairs: Vec<(u32, f64)> = m.into_iter().map(|(k, w)| (k, w / total)).collect();
        let tail: f64 = pairs[1..].iter().map(|p| p.1).sum();
        pairs[0].1 = 1.0 - tail;
        SampleSizeDistribution::new(pairs).unwrap()
    })
}

proptest! {
    #[test]
    fn sampling_is_strictly_increasing(u in 0.05f64..20.0, t in arb_theta()) {
        let w = SamplingResponse::new(u, t, TieBreakRule::FavorA).unwrap();
        let mut prev = w.value(0.0);
        for i in 1..=1000 {
            let v = w.value(i as f64 / 1000.0);
            prop_assert!(increases(prev, v, w.value(0.0), w.value(1.0)), "{} then {}", prev, v);
            prev = v;
        }
    }

    #[test]
    fn logit_is_strictly_increasing(u in 0.05f64..20.0, eta in 0.02f64..5.0, mass in 0.05f64..0.95, eta2 in 0.02f64..5.0) {
        let w = LogitResponse::new(u, vec![LogitGroup { mass, eta }, LogitGroup { mass: 1.0 - mass, eta: eta2 }]).unwrap();
        let mut prev = w.value(0.0);
        for i in 1..=1000 {
            let v = w.value(i as f64 / 1000.0);
            prop_assert!(increases(prev, v, w.value(0.0), w.value(1.0)), "{} then {}", prev, v);
            prev = v;
        }
    }

    #[test]
    fn tie_rules_agree_off_integer_cutoffs(u in 0.05f64..20.0, t in arb_theta()) {
        let integral = t.iter().any(|(k, _)| {
            let x = k as f64 / (u + 1.0);
            (x - x.round()).abs() <= 1e-9
        });
        prop_assume!(!integral);
        let a = SamplingResponse::new(u, t.clone(), TieBreakRule::FavorA).unwrap();
        let b = SamplingResponse::new(u, t, TieBreakRule::FavorB).unwrap();
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            prop_assert_eq!(a.value(p), b.value(p));
        }
    }

    #[test]
    fn derivative_matches_central_differences(u in 0.05f64..20.0, t in arb_theta(), big in prop::bool::ANY) {
        let t = if big { t.mixture(0.5, 1000).unwrap() } else { t };
        let w = SamplingResponse::new(u, t, TieBreakRule::FavorA).unwrap();
        for i in 1..=99 {
            let p = i as f64 / 100.0;
            let h = 1e-6;
            let fd = (w.value(p + h) - w.value(p - h)) / (2.0 * h);
            prop_assert!((fd - w.derivative(p)).abs() < 1e-6, "p={} fd={} an={}", p, fd, w.derivative(p));
        }
    }

    #[test]
    fn logit_derivative_matches_central_differences(u in 0.05f64..20.0, eta in 0.05f64..5.0) {
        let w = LogitResponse::homogeneous(u, eta).unwrap();
        for i in 1..=99 {
            let p = i as f64 / 100.0;
            let h = 1e-6;
            let fd = (w.value(p + h) - w.value(p - h)) / (2.0 * h);
            prop_assert!((fd - w.derivative(p)).abs() < 1e-6);
        }
    }

    #[test]
    fn inverse_round_trips(u in 0.2f64..5.0, t in arb_theta(), p in 0.05f64..0.95) {
        let w = SamplingResponse::new(u, t, TieBreakRule::FavorA).unwrap();
        prop_assume!(w.derivative(p) > 1e-3);
        let back = w.inverse(w.value(p)).unwrap();
        prop_assert!((back - p).abs() < 1e-10);
        prop_assert!((w.value(back) - w.value(p)).abs() < 1e-12);
    }
}
