use cobound_core::measure::{is_measurable, RandomVariable};
use cobound_core::process::{
    CoordinateLaw, ExactProcess, ExactProcessModel, Functional, FunctionalPattern, LawKind,
    ModelDescription, SamplerModel,
};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// A centered iid law on two or three symbols.
fn centered_law() -> impl Strategy<Value = CoordinateLaw> {
    (2usize..=3).prop_flat_map(|k| {
        (
            prop::collection::vec(-3.0f64..3.0, k),
            prop::collection::vec(0.1f64..1.0, k),
        )
            .prop_filter_map("distinct symbols", |(a, w)| {
                let total: f64 = w.iter().sum();
                let p: Vec<f64> = w.iter().map(|x| x / total).collect();
                let mean: f64 = a.iter().zip(&p).map(|(x, q)| x * q).sum();
                let a: Vec<f64> = a.iter().map(|x| x - mean).collect();
                let spread = a.iter().fold(f64::INFINITY, |m, x| {
                    a.iter()
                        .filter(|y| *y != x)
                        .fold(m, |m, y| m.min((x - y).abs()))
                });
                (spread > 0.1)
                    .then(|| CoordinateLaw::new(a, p, LawKind::Iid, true).ok())
                    .flatten()
            })
    })
}

/// `X_i = Σ_{o=-q}^{0} c_o ξ_{i+o}` with `q ≤ 2`.
fn backward_ma() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (0usize..=2).prop_flat_map(|q| (Just(q), prop::collection::vec(-2.0f64..2.0, q + 1)))
}

fn build(law: CoordinateLaw, coeffs: &[f64]) -> ExactProcess {
    let terms = coeffs.iter().enumerate().map(|(j, &c)| (-(j as i64), c));
    let f = Functional::linear(terms).unwrap();
    let window = if law.size() == 2 { (-5, 5) } else { (-3, 3) };
    ExactProcessModel::new(window, law, FunctionalPattern::stationary(f))
        .build()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn backward_functionals_are_adapted(law in centered_law(), (_q, c) in backward_ma()) {
        let p = build(law, &c);
        let f = p.filtration();
        for i in p.indices().collect::<Vec<_>>() {
            prop_assert!(is_measurable(p.x(i).unwrap(), f.at(i), 1e-12), "X_{i} not F_{i}-measurable");
        }
    }

    #[test]
    fn conditional_expectations_vanish_beyond_the_window(law in centered_law(), (q, c) in backward_ma()) {
        let p = build(law, &c);
        let f = p.filtration();
        let (lo, hi) = p.support().unwrap();
        for k in lo..=hi {
            for i in (q as i64 + 1)..=(hi - k) {
                let e = f.cond_expect(p.x(k + i).unwrap(), k - 1).unwrap();
                prop_assert!(e.is_zero(1e-12), "E(X_{} | F_{}) = {}", k + i, k - 1, e.max_abs());
            }
        }
    }
}

/// Pearson statistic of sampled `X_1` against its exact law, compared with
/// the 99% chi-square quantile.
fn chi_square_agrees(desc: &ModelDescription) {
    let exact = desc.exact_model().unwrap().build().unwrap();
    // Sums of products can land on the same real value by different float
    // routes; merge support points closer than 1e-9.
    let mut law: Vec<(f64, f64)> = Vec::new();
    for (v, m) in exact.x(1).expect("X_1 defined").distribution() {
        match law.last_mut() {
            Some((u, mass)) if (v - *u).abs() <= 1e-9 => *mass += m,
            _ => law.push((v, m)),
        }
    }
    let sampler: SamplerModel = desc.sampler().unwrap();
    let replicas = 100_000u64;
    let mut counts = vec![0u64; law.len()];
    for r in 0..replicas {
        let x = sampler.sample_path(1, r)[0];
        let cell = law
            .iter()
            .position(|(v, _)| (v - x).abs() <= 1e-9)
            .unwrap_or_else(|| panic!("sampled value {x} outside the exact support"));
        counts[cell] += 1;
    }
    let stat: f64 = law
        .iter()
        .zip(&counts)
        .map(|((_, m), &c)| {
            let e = m * replicas as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let df = (law.len() - 1) as f64;
    let crit = ChiSquared::new(df).unwrap().inverse_cdf(0.99);
    assert!(stat <= crit, "chi-square {stat} above {crit} (df {df})");
}

fn desc(json: &str) -> ModelDescription {
    ModelDescription::from_json(json).unwrap()
}

#[test]
fn sampler_matches_exact_law_for_ma1() {
    chi_square_agrees(&desc(
        r#"{"law": {"alphabet": [-1, 1], "probabilities": [0.5, 0.5]},
            "window": [-3, 3], "functionals": [{"i": 0, "coeffs": {"0": 1, "-1": 0.5}}], "seed": 3}"#,
    ));
}

#[test]
fn sampler_matches_exact_law_for_skewed_three_point_law() {
    chi_square_agrees(&desc(
        r#"{"law": {"alphabet": [-2, 0, 1], "probabilities": [0.2, 0.2, 0.6]},
            "window": [-3, 3], "functionals": [{"i": 0, "coeffs": {"0": 1, "-1": -0.7, "1": 0.3}}], "seed": 5}"#,
    ));
}

#[test]
fn sampler_matches_exact_law_for_markov_innovations() {
    chi_square_agrees(&desc(
        r#"{"law": {"alphabet": [-1, 1], "probabilities": [0.5, 0.5], "kind": "markov",
                    "transition": [[0.8, 0.2], [0.2, 0.8]]},
            "window": [-3, 3], "functionals": [{"i": 0, "coeffs": {"0": 1, "-1": 1}}], "seed": 9}"#,
    ));
}

#[test]
fn sampler_paths_are_reproducible() {
    let d = desc(
        r#"{"law": {"alphabet": [-1, 1], "probabilities": [0.5, 0.5]},
            "window": [-3, 3], "functionals": [{"i": 0, "coeffs": {"0": 1}}], "seed": 1}"#,
    );
    let s = d.sampler().unwrap();
    assert_eq!(s.sample_path(50, 7), s.sample_path(50, 7));
    assert_ne!(s.sample_path(50, 7), s.sample_path(50, 8));
}

#[test]
fn zero_variable_is_measurable_everywhere() {
    let p = build(CoordinateLaw::rademacher(), &[1.0]);
    let z = RandomVariable::zero(p.space().clone());
    assert!(is_measurable(&z, p.filtration().at(-100), 0.0));
}
