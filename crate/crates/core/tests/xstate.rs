use proptest::prelude::*;
use steerharvest::xstate::{self, concurrence, j_terms, steering, witness_state, Direction};
use steerharvest::{Complex, Error, Regime, XState};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

fn bell() -> XState {
    XState::new([0.5, 0.0, 0.0, 0.5], Complex::new(0.5, 0.0), Complex::new(0.0, 0.0)).unwrap()
}

fn product() -> XState {
    XState::new([1.0, 0.0, 0.0, 0.0], Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)).unwrap()
}

#[test]
fn validation_examples() {
    assert!(xstate::validate_xstate(product()).is_ok());
    assert!(xstate::validate_xstate(bell()).is_ok());
    let bad = XState { rho11: 1.01, ..product() };
    assert!(matches!(xstate::validate_xstate(bad), Err(Error::Trace { .. })));
    let negative = XState { rho11: 1.1, rho22: -0.1, ..product() };
    assert!(matches!(
        xstate::validate_xstate(negative),
        Err(Error::NegativeDiagonal { index: 2, .. })
    ));
}

#[test]
fn concurrence_examples() {
    assert_eq!(concurrence(&bell()).unwrap(), 1.0);
    assert_eq!(concurrence(&product()).unwrap(), 0.0);
    let rho = XState::new([0.6, 0.2, 0.2, 0.0], Complex::new(0.0, 0.0), Complex::new(0.1, 0.0)).unwrap();
    assert!((concurrence(&rho).unwrap() - 0.2).abs() <= 1e-15);
}

/// Concurrence of a real X state from the Wootters formula: eigenvalues of
/// rho (sigma_y x sigma_y) rho* (sigma_y x sigma_y), which for this structure
/// split into two 2x2 blocks.
fn wootters(rho: &XState) -> f64 {
    let block = |d1: f64, d2: f64, off: f64| {
        // Eigenvalues of [[d1 d2 + off^2, 2 d1 off], [2 d2 off, d1 d2 + off^2]].
        let (a, b) = (d1 * d2 + off * off, 2.0 * off * (d1 * d2).sqrt());
        [(a + b).max(0.0).sqrt(), (a - b).max(0.0).sqrt()]
    };
    let mut roots = [
        block(rho.rho11, rho.rho44, rho.rho14.norm()),
        block(rho.rho22, rho.rho33, rho.rho23.norm()),
    ]
    .concat();
    roots.sort_by(|a, b| b.total_cmp(a));
    (roots[0] - roots[1] - roots[2] - roots[3]).max(0.0)
}

#[test]
fn concurrence_matches_wootters_on_physical_states() {
    let states = [
        ([0.6, 0.2, 0.2, 0.0], 0.0, 0.1),
        ([0.4, 0.1, 0.2, 0.3], 0.3, 0.05),
        ([0.25, 0.25, 0.25, 0.25], 0.1, 0.2),
        ([0.5, 0.0, 0.0, 0.5], 0.5, 0.0),
    ];
    for (diag, x, c) in states {
        let rho = XState::new(diag, Complex::new(x, 0.0), Complex::new(c, 0.0)).unwrap();
        let expected = wootters(&rho);
        assert!((concurrence(&rho).unwrap() - expected).abs() <= 1e-12, "{diag:?}");
    }
}

#[test]
fn witness_examples() {
    let mixed = XState::new([0.25; 4], Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)).unwrap();
    for d in [Direction::BToA, Direction::AToB] {
        let tau = witness_state(&mixed, d).unwrap();
        for entry in tau.diagonal() {
            assert!((entry - 0.25).abs() <= 1e-15);
        }
    }
    let tau = witness_state(&bell(), Direction::BToA).unwrap();
    let expected = 0.5 / SQRT_3 + (3.0 - SQRT_3) / 12.0;
    assert!((tau.rho11 - expected).abs() <= 1e-15);
    assert!((tau.rho11 - 0.394_337).abs() <= 1e-6);
}

#[test]
fn j_term_examples() {
    let j = j_terms(&bell());
    assert!((j.j_a - (2.0 - SQRT_3) / 8.0).abs() <= 1e-15);
    assert_eq!(j.j_b, 0.0);
    assert!((j.j_c - (2.0 + SQRT_3) / 8.0).abs() <= 1e-15);
    assert!((j.j_a - 0.033_493_6).abs() <= 1e-7 && (j.j_c - 0.466_506_4).abs() <= 1e-7);
    let j = j_terms(&product());
    assert_eq!((j.j_a, j.j_b, j.j_c), (0.0, 0.0, 0.0));
}

#[test]
fn steering_examples() {
    let s = steering(&bell()).unwrap();
    let expected = 0.5 - ((2.0 - SQRT_3) / 8.0).sqrt();
    assert!((s.s_a_to_b - expected).abs() <= 1e-15);
    assert_eq!(s.s_a_to_b, s.s_b_to_a);
    assert!((expected - 0.316_987).abs() <= 1e-6);
    assert_eq!(s.asymmetry, 0.0);
    assert_eq!(s.regime, Regime::TwoWay);
    let s = steering(&product()).unwrap();
    assert_eq!((s.s_a_to_b, s.s_b_to_a, s.asymmetry, s.regime), (0.0, 0.0, 0.0, Regime::NoWay));
}

prop_compose! {
    fn any_xstate()(
        raw in prop::array::uniform4(0.0..1.0_f64),
        zero in 0usize..5,
        x in 0.0..0.5_f64, phase_x in 0.0..std::f64::consts::TAU,
        c in 0.0..0.5_f64, phase_c in 0.0..std::f64::consts::TAU,
    ) -> XState {
        let mut raw = raw;
        // Sometimes pin one population to zero, as in the harvested state.
        if zero < 4 {
            raw[zero] = 0.0;
        }
        let total: f64 = raw.iter().sum::<f64>().max(1e-3);
        let mut diag = raw.map(|r| r / total);
        if diag.iter().sum::<f64>() == 0.0 {
            diag = [1.0, 0.0, 0.0, 0.0];
        }
        XState::new(diag, Complex::from_polar(x, phase_x), Complex::from_polar(c, phase_c)).unwrap()
    }
}

prop_compose! {
    fn symmetric_xstate()(rho in any_xstate()) -> XState {
        let mid = 0.5 * (rho.rho22 + rho.rho33);
        XState { rho22: mid, rho33: mid, ..rho }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn witness_consistency(rho in any_xstate()) {
        let s = steering(&rho).unwrap();
        for d in [Direction::BToA, Direction::AToB] {
            let tau = witness_state(&rho, d).unwrap();
            prop_assert!((tau.trace() - 1.0).abs() <= 1e-12);
            let c = concurrence(&tau).unwrap();
            prop_assert_eq!(s.get(d) > 1e-12, c > 1e-12);
            // The witness concurrence is the steering measure up to 2/sqrt(3).
            prop_assert!((c - 2.0 / SQRT_3 * s.get(d)).abs() <= 1e-12);
        }
    }

    #[test]
    fn radicands_dominate_concurrence_radicands(rho in any_xstate()) {
        let j = j_terms(&rho);
        let tol = 1e-15;
        prop_assert!(j.j_a >= -tol && j.j_c >= -tol);
        prop_assert!(j.j_a - j.j_b >= rho.rho22 * rho.rho33 - tol);
        prop_assert!(j.j_a + j.j_b >= rho.rho22 * rho.rho33 - tol);
        prop_assert!(j.j_c - j.j_b >= rho.rho11 * rho.rho44 - tol);
        prop_assert!(j.j_c + j.j_b >= rho.rho11 * rho.rho44 - tol);
    }

    #[test]
    fn steering_is_bounded_by_concurrence(rho in any_xstate()) {
        let s = steering(&rho).unwrap();
        let c = concurrence(&rho).unwrap();
        prop_assert!(s.s_a_to_b <= c / 2.0 + 1e-12);
        prop_assert!(s.s_b_to_a <= c / 2.0 + 1e-12);
        prop_assert!(s.asymmetry == (s.s_a_to_b - s.s_b_to_a).abs());
        prop_assert_eq!(s.regime, Regime::classify(s.s_a_to_b, s.s_b_to_a));
    }

    #[test]
    fn equal_mixed_populations_are_symmetric(rho in symmetric_xstate()) {
        let s = steering(&rho).unwrap();
        prop_assert_eq!(s.asymmetry, 0.0);
        prop_assert_eq!(j_terms(&rho).j_b, 0.0);
    }
}
