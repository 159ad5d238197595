use std::sync::Arc;

use cobound_core::measure::{
    cond_expect, lp_norm, orlicz_norm, projection, Filtration, Partition, ProbabilitySpace,
    RandomVariable,
};
use proptest::prelude::*;

/// A random space with `n` atoms, a variable on it, and for every atom a
/// stack of three labels used to build nested partitions.
#[derive(Debug, Clone)]
struct Setup {
    weights: Vec<f64>,
    values: Vec<f64>,
    labels: Vec<[u8; 3]>,
}

fn setup() -> impl Strategy<Value = Setup> {
    (2usize..14).prop_flat_map(|n| {
        (
            prop::collection::vec(0.05f64..1.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(prop::array::uniform3(0u8..3), n),
        )
            .prop_map(|(w, values, labels)| {
                let total: f64 = w.iter().sum();
                Setup {
                    weights: w.iter().map(|x| x / total).collect(),
                    values,
                    labels,
                }
            })
    })
}

impl Setup {
    fn space(&self) -> Arc<ProbabilitySpace> {
        ProbabilitySpace::new(self.weights.clone()).unwrap()
    }

    fn x(&self) -> RandomVariable {
        RandomVariable::new(self.space(), self.values.clone()).unwrap()
    }

    /// Partition generated by the first `depth` labels; deeper is finer.
    fn level(&self, depth: usize) -> Partition {
        Partition::from_keys(self.labels.iter().map(|l| l[..depth].to_vec()))
    }

    fn filtration(&self) -> Filtration {
        Filtration::new(0, (0..=3).map(|d| self.level(d)).collect()).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tower_property(s in setup(), coarse in 0usize..3, extra in 1usize..3) {
        let fine = (coarse + extra).min(3);
        let x = s.x();
        let g1 = s.level(coarse);
        let g2 = s.level(fine);
        let inner = cond_expect(&x, &g2).unwrap();
        let lhs = cond_expect(&inner, &g1).unwrap();
        let rhs = cond_expect(&x, &g1).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn conditional_expectation_contracts(s in setup(), depth in 0usize..4) {
        let x = s.x();
        let e = cond_expect(&x, &s.level(depth)).unwrap();
        for p in [1.0, 2.0, f64::INFINITY] {
            prop_assert!(lp_norm(&e, p).unwrap() <= lp_norm(&x, p).unwrap() + 1e-12);
        }
    }

    #[test]
    fn projections_telescope(s in setup(), a in 0i64..4, len in 0i64..4) {
        let b = (a + len).min(3);
        let f = s.filtration();
        let x = s.x();
        let mut sum = RandomVariable::zero(s.space());
        for i in a..=b {
            sum.add_assign(&projection(&x, &f, i).unwrap());
        }
        let mut want = f.cond_expect(&x, b).unwrap();
        want.sub_assign(&f.cond_expect(&x, a - 1).unwrap());
        prop_assert!(sum.max_abs_diff(&want) <= 1e-12);
    }

    #[test]
    fn projections_are_orthogonal(s in setup()) {
        let f = s.filtration();
        let x = s.x();
        let ps: Vec<RandomVariable> = (0..=3).map(|i| projection(&x, &f, i).unwrap()).collect();
        for i in 0..ps.len() {
            for j in 0..i {
                let inner = ps[i].zip_with(&ps[j], |a, b| a * b).unwrap().expectation();
                prop_assert!(inner.abs() <= 1e-10, "E[P_{i} P_{j}] = {inner}");
            }
        }
    }

    #[test]
    fn orlicz_norm_is_homogeneous(s in setup(), t in prop_oneof![-3.0f64..-0.25, 0.25f64..3.0]) {
        let tol = 1e-10;
        let x = s.x();
        let base = orlicz_norm(&x, tol).unwrap();
        let scaled = orlicz_norm(&x.scale(t), tol).unwrap();
        // Each bisection lands within tol/2 of its root, so |t| ≤ 3 keeps the
        // combined error inside 2·tol.
        prop_assert!((scaled - t.abs() * base).abs() <= 2.0 * tol);
    }
}

#[test]
fn orlicz_norm_of_zero() {
    let space = ProbabilitySpace::uniform(4).unwrap();
    assert_eq!(
        orlicz_norm(&RandomVariable::zero(space), 1e-9).unwrap(),
        0.0
    );
}
