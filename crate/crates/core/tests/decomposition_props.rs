use cobound_core::decomposition::{
    check_condition_2, decompose, verify_decomposition, DecompositionResult,
};
use cobound_core::measure::RandomVariable;
use cobound_core::process::{
    presets, CoordinateLaw, ExactProcess, ExactProcessModel, Functional, FunctionalPattern,
};
use proptest::prelude::*;

/// Linear functionals on offsets `-2..=1`, possibly two-periodic.
fn pattern() -> impl Strategy<Value = FunctionalPattern> {
    let entry = prop::collection::vec(prop_oneof![Just(0.0), -2.0f64..2.0], 4).prop_map(|c| {
        Functional::linear(c.into_iter().enumerate().map(|(j, v)| (j as i64 - 2, v))).unwrap()
    });
    prop_oneof![
        entry.clone().prop_map(FunctionalPattern::stationary),
        (entry.clone(), entry).prop_map(|(a, b)| FunctionalPattern::new(0, vec![a, b]).unwrap()),
    ]
}

fn build(pattern: FunctionalPattern) -> ExactProcess {
    ExactProcessModel::new((-5, 5), CoordinateLaw::rademacher(), pattern)
        .build()
        .unwrap()
}

fn x_minus_y(p: &ExactProcess, r: &DecompositionResult, j: i64) -> RandomVariable {
    let mut d = p.x_or_zero(j);
    d.sub_assign(&r.entry(j).expect("decomposed index").y);
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_identities_hold(pat in pattern()) {
        let p = build(pat);
        let r = decompose(&p, -2, 2, None).unwrap();
        prop_assert!(r.exact());
        let v = verify_decomposition(&r, &p).unwrap();
        prop_assert!(v.eq1_residual <= 1e-12, "eq1 {}", v.eq1_residual);
        prop_assert!(v.mds_l1 <= 1e-12, "mds {}", v.mds_l1);
        prop_assert!(v.adapted_residual <= 1e-12, "adapted {}", v.adapted_residual);
        prop_assert!(v.part_b_residual <= 1e-12, "part B {}", v.part_b_residual);
    }

    #[test]
    fn coboundary_telescopes(pat in pattern(), n in 1i64..=4) {
        let p = build(pat);
        let r = decompose(&p, 0, n, None).unwrap();
        let mut sum = RandomVariable::zero(p.space().clone());
        for i in 0..n {
            sum.add_assign(&x_minus_y(&p, &r, i));
        }
        let mut want = r.u(0).unwrap().clone();
        want.sub_assign(r.u(n).unwrap());
        prop_assert!(sum.max_abs_diff(&want) <= 1e-12);
    }

    /// Any `U` satisfying both the identity and the tail condition is fixed
    /// by `D = X - Y`: forward columns give `E(U_k|F_{k-1})` and backward
    /// columns give the rest. Re-deriving it from `D` alone must land on the
    /// decomposition's `U`.
    #[test]
    fn tail_condition_pins_down_u(pat in pattern()) {
        let p = build(pat);
        let r = decompose(&p, -4, 4, None).unwrap();
        let c2 = check_condition_2(&r, &p, 0, 4).unwrap();
        prop_assert!(c2.vanishing_from(1e-12).is_some_and(|j| j <= 3));
        let f = p.filtration();
        let mut u = RandomVariable::zero(p.space().clone());
        for i in 0..=4 {
            u.add_assign(&f.cond_expect(&x_minus_y(&p, &r, i), -1).unwrap());
        }
        for i in 1..=4 {
            let d = x_minus_y(&p, &r, -i);
            u.sub_assign(&d);
            u.add_assign(&f.cond_expect(&d, -1).unwrap());
        }
        prop_assert!(u.max_abs_diff(r.u(0).unwrap()) <= 1e-12, "{}", u.max_abs_diff(r.u(0).unwrap()));
    }
}

#[test]
fn presets_have_their_hand_derived_parts() {
    let cases: [(FunctionalPattern, f64, f64); 3] = [
        (presets::martingale(), 0.0, 1.0),
        (presets::ma1(0.5), 0.5, 1.5),
        (presets::coboundary(), 1.0, 0.0),
    ];
    for (pat, u_l2, y_l2) in cases {
        let p = build(pat);
        let r = decompose(&p, -1, 1, None).unwrap();
        for row in r.summary() {
            assert!((row.u_l2 - u_l2).abs() <= 1e-12, "{row:?}");
            assert!((row.y_l2 - y_l2).abs() <= 1e-12, "{row:?}");
        }
    }
}
