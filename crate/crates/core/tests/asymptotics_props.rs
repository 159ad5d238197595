use cobound_core::asymptotics::{
    azuma_bound, empirical_tails, limit_diagnostics, tightness_probe, PathModel,
};
use cobound_core::decomposition::decompose;
use cobound_core::measure::{lp_norm, RandomVariable};
use cobound_core::process::{presets, CoordinateLaw, ExactProcessModel, FunctionalPattern};
use proptest::prelude::*;

fn exact(pattern: FunctionalPattern) -> ExactProcessModel {
    ExactProcessModel::new((-6, 6), CoordinateLaw::rademacher(), pattern)
}

fn path(pattern: FunctionalPattern) -> PathModel {
    PathModel::from_model(&exact(pattern)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Two-sided Azuma-Hoeffding for `S_n = ΣY_i + U_1 - U_{n+1}`.
    #[test]
    fn tails_respect_the_two_sided_azuma_bound(a in -1.0f64..1.0, seed in any::<u64>()) {
        let m = path(presets::ma1(a));
        let (ya, ub) = (m.y_sup(), m.u_sup());
        for n in [8usize, 32] {
            let xs = [0.3, 0.6, 0.9];
            for t in empirical_tails(&m, n, &xs, 2000, seed).unwrap() {
                let shift = t.x - 2.0 * ub / n as f64;
                if shift > 0.0 && ya > 0.0 {
                    let bound = 2.0 * (-(n as f64) * shift * shift / (2.0 * ya * ya)).exp();
                    prop_assert!(t.p_hat - t.ci_half_width <= bound, "{t:?} vs {bound}");
                }
            }
        }
    }

    #[test]
    fn g1_from_partial_sums_matches_coboundary_form(a in -1.0f64..1.0, b in -1.0f64..1.0, n in 1usize..=4) {
        let pattern = FunctionalPattern::new(0, vec![
            presets::ma1(a).entries()[0].clone(),
            presets::ma1(b).entries()[0].clone(),
        ]).unwrap();
        let p = exact(pattern.clone()).build().unwrap();
        let r = decompose(&p, 1, n as i64 + 1, None).unwrap();
        let mut s = RandomVariable::zero(p.space().clone());
        for i in 1..=n as i64 {
            s.add_assign(&p.x_or_zero(i));
            s.sub_assign(&r.entry(i).unwrap().y);
        }
        let direct = lp_norm(&s, 2.0).unwrap() / (n as f64).sqrt();
        let diag = limit_diagnostics(&path(pattern), &[n], 0, 0, 0.5).unwrap();
        let via_u = diag.rows[0].g1;
        prop_assert!((direct - via_u).abs() <= 1e-10, "{direct} vs {via_u}");
    }
}

/// Exact enumeration: for `X_i = ξ_i - 0.82ξ_{i-1}` and `n = 8`,
/// `|S_8| > 2.4` needs `ξ_8 = -ξ_0` and at least six of `ξ_1..ξ_7` agreeing
/// with `ξ_8`, so the tail is `2 · ¼ · 8/128 = 1/32`. The one-sided form
/// without the coboundary doubling sits below that.
#[test]
fn one_sided_azuma_form_undershoots_at_small_n() {
    let m = path(presets::ma1(-0.82));
    let exact = 1.0 / 32.0;
    let stated = azuma_bound(8, 0.3, m.y_sup(), m.u_sup()).unwrap();
    assert!(stated < exact, "{stated} vs {exact}");
    let t = empirical_tails(&m, 8, &[0.3], 200_000, 3).unwrap()[0];
    assert!((t.p_hat - exact).abs() <= t.ci_half_width, "{t:?}");
    assert!(t.p_hat - t.ci_half_width > stated);
}

#[test]
fn ratio_constant_is_stable_for_ma1() {
    let m = path(presets::ma1(0.5));
    let ns = [10usize, 100, 1000, 10_000, 100_000];
    let d = limit_diagnostics(&m, &ns, 0, 0, 0.5).unwrap();
    let c = d.ratio_constants[ns.len() - 1];
    for (row, ci) in d.rows.iter().zip(&d.ratio_constants) {
        assert!(
            (ci - c).abs() <= 0.05 * c,
            "C = {ci} at n = {} vs {c}",
            row.n
        );
        let rel = (row.ratio - 1.0).abs();
        assert!(rel <= 1.05 * c / row.n as f64, "n = {}", row.n);
    }
}

#[test]
fn coboundary_is_flagged_degenerate_both_ways() {
    let m = path(presets::coboundary());
    let ns = [10usize, 100, 1000];
    let t = tightness_probe(&m, &ns, 2000, 17, 0.99).unwrap();
    assert!(t.bounded);
    let d = limit_diagnostics(&m, &ns, 0, 0, 0.5).unwrap();
    assert!(!d.cond4_holds);
    assert!(d.rows.iter().all(|r| r.sigma_n_sq.abs() <= 1e-12));
}

#[test]
fn monte_carlo_is_bit_identical_across_runs_and_pools() {
    let m = path(presets::ma1(0.5));
    let run = || empirical_tails(&m, 50, &[0.2, 0.4], 3000, 99).unwrap();
    let a = run();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(a, b);
    let c = limit_diagnostics(&m, &[20], 3000, 5, 0.5).unwrap();
    let d = limit_diagnostics(&m, &[20], 3000, 5, 0.5).unwrap();
    assert_eq!(c, d);
}
