use super::{CoordinateLaw, ExactProcess, ExactProcessModel, Functional, FunctionalPattern};
use crate::error::{domain, invalid, Result};
use crate::measure::RandomVariable;

/// A stationary sequence `f ∘ T^i` on the product space of a window, where
/// `T` is the left shift of innovations.
#[derive(Debug, Clone)]
pub struct StationaryShiftModel {
    f: Functional,
    process: ExactProcess,
}

impl StationaryShiftModel {
    pub fn new(law: CoordinateLaw, f: Functional, window: (i64, i64)) -> Result<Self> {
        if !law.is_iid() {
            // A Markov chain started from an arbitrary initial law is not
            // shift invariant on the window.
            let pi = law.probabilities();
            let stationary = (0..law.size()).all(|t| {
                let next: f64 = (0..law.size()).map(|s| pi[s] * law.step(s, t)).sum();
                (next - pi[t]).abs() <= 1e-12
            });
            if !stationary {
                return Err(invalid(
                    "stationary shift model",
                    "Markov initial law is not stationary",
                ));
            }
        }
        let model = ExactProcessModel::new(window, law, FunctionalPattern::stationary(f.clone()));
        let process = model.build()?;
        if process.x(0).is_none() {
            return Err(domain(format!(
                "window [{}, {}] cannot hold f itself",
                window.0, window.1
            )));
        }
        Ok(StationaryShiftModel { f, process })
    }

    pub fn f(&self) -> &Functional {
        &self.f
    }

    pub fn process(&self) -> &ExactProcess {
        &self.process
    }

    /// `f ∘ T^i`.
    pub fn shift_compose(&self, i: i64) -> Result<RandomVariable> {
        self.process.x(i).cloned().ok_or_else(|| {
            let (lo, hi) = self.process.window();
            domain(format!(
                "f∘T^{i} reads coordinates outside window [{lo}, {hi}]"
            ))
        })
    }

    /// Largest atomwise gap between `f∘T^{i+1}` and `(f∘T^i)∘T`.
    pub fn shift_invariance_residual(&self, i: i64, tol: f64) -> Result<f64> {
        let here = self.shift_compose(i)?;
        let next = self.shift_compose(i + 1)?;
        Ok(self.process.shift(&here, 1, tol)?.max_abs_diff(&next))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::LawKind;

    fn model(terms: &[(i64, f64)]) -> StationaryShiftModel {
        StationaryShiftModel::new(
            CoordinateLaw::rademacher(),
            Functional::linear(terms.iter().copied()).unwrap(),
            (-3, 3),
        )
        .unwrap()
    }

    #[test]
    fn identity_shift() {
        let m = model(&[(0, 1.0), (-1, 0.5)]);
        let f = m.process().variable(|xi| xi(0) + 0.5 * xi(-1)).unwrap();
        assert_eq!(m.shift_compose(0).unwrap().max_abs_diff(&f), 0.0);
    }

    #[test]
    fn coordinate_shift() {
        let m = model(&[(0, 1.0)]);
        let xi1 = m.process().coordinate(1).unwrap();
        assert_eq!(m.shift_compose(1).unwrap().max_abs_diff(&xi1), 0.0);
    }

    #[test]
    fn difference_shift_keeps_distribution() {
        let m = model(&[(0, 1.0), (1, -1.0)]);
        let s = m.shift_compose(1).unwrap();
        let oracle = m.process().variable(|xi| xi(1) - xi(2)).unwrap();
        assert_eq!(s.max_abs_diff(&oracle), 0.0);
        assert_eq!(s.distribution(), m.shift_compose(0).unwrap().distribution());
        assert_eq!(m.shift_invariance_residual(0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn overflow_is_a_domain_error() {
        let m = model(&[(0, 1.0), (1, -1.0)]);
        assert!(m.shift_compose(3).is_err());
        assert!(m.shift_compose(-4).is_err());
    }

    #[test]
    fn nonstationary_markov_start_rejected() {
        let law = CoordinateLaw::new(
            vec![-1.0, 1.0],
            vec![0.9, 0.1],
            LawKind::Markov {
                transition: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            },
            false,
        )
        .unwrap();
        let f = Functional::linear([(0, 1.0)]).unwrap();
        assert!(StationaryShiftModel::new(law, f, (-1, 1)).is_err());
    }
}
