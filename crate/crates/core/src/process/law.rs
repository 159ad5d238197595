use crate::error::{invalid, Result};
use crate::measure::WEIGHT_SUM_TOL;

#[derive(Debug, Clone, PartialEq)]
pub enum LawKind {
    Iid,
    /// Row-stochastic transition matrix over the alphabet; the law's
    /// `probabilities` are the distribution of the first coordinate.
    Markov {
        transition: Vec<Vec<f64>>,
    },
}

/// Distribution of the innovation coordinates `ξ_j` on a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateLaw {
    alphabet: Vec<f64>,
    probabilities: Vec<f64>,
    kind: LawKind,
    centered: bool,
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(invalid(
            "coordinate law",
            format!("{what}: bad probability {x}"),
        ));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(invalid("coordinate law", format!("{what} sums to {total}")));
    }
    Ok(())
}

impl CoordinateLaw {
    /// Validates the law. With `centered` set, the first-coordinate mean
    /// must vanish to within 1e-12.
    pub fn new(
        alphabet: Vec<f64>,
        probabilities: Vec<f64>,
        kind: LawKind,
        centered: bool,
    ) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(invalid("coordinate law", "empty alphabet"));
        }
        if alphabet.len() > u16::MAX as usize {
            return Err(invalid("coordinate law", "alphabet too large"));
        }
        if let Some(v) = alphabet.iter().find(|v| !v.is_finite()) {
            return Err(invalid("coordinate law", format!("non-finite symbol {v}")));
        }
        if probabilities.len() != alphabet.len() {
            return Err(invalid(
                "coordinate law",
                "alphabet and probabilities differ in length",
            ));
        }
        check_distribution(&probabilities, "probabilities")?;
        if let LawKind::Markov { transition } = &kind {
            if transition.len() != alphabet.len() {
                return Err(invalid(
                    "coordinate law",
                    "transition matrix has wrong row count",
                ));
            }
            for (r, row) in transition.iter().enumerate() {
                if row.len() != alphabet.len() {
                    return Err(invalid(
                        "coordinate law",
                        format!("transition row {r} has wrong length"),
                    ));
                }
                check_distribution(row, &format!("transition row {r}"))?;
            }
        }
        let law = CoordinateLaw {
            alphabet,
            probabilities,
            kind,
            centered,
        };
        if centered && law.mean().abs() > WEIGHT_SUM_TOL {
            return Err(invalid(
                "coordinate law",
                format!("flagged centered but mean is {}", law.mean()),
            ));
        }
        Ok(law)
    }

    pub fn iid(alphabet: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        Self::new(alphabet, probabilities, LawKind::Iid, false)
    }

    /// Uniform ±1 innovations.
    pub fn rademacher() -> Self {
        Self::new(vec![-1.0, 1.0], vec![0.5, 0.5], LawKind::Iid, true).expect("valid law")
    }

    pub fn alphabet(&self) -> &[f64] {
        &self.alphabet
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    pub fn is_iid(&self) -> bool {
        matches!(self.kind, LawKind::Iid)
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn symbol(&self, s: usize) -> f64 {
        self.alphabet[s]
    }

    /// Mean of the first coordinate.
    pub fn mean(&self) -> f64 {
        self.alphabet
            .iter()
            .zip(&self.probabilities)
            .map(|(v, p)| v * p)
            .sum()
    }

    /// Probability of moving from symbol `from` to symbol `to` (iid laws
    /// ignore `from`).
    pub fn step(&self, from: usize, to: usize) -> f64 {
        match &self.kind {
            LawKind::Iid => self.probabilities[to],
            LawKind::Markov { transition } => transition[from][to],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(CoordinateLaw::iid(vec![-1.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(CoordinateLaw::iid(vec![-1.0, 1.0], vec![1.0]).is_err());
        assert!(CoordinateLaw::new(vec![0.0, 1.0], vec![0.5, 0.5], LawKind::Iid, true).is_err());
        let bad_row = LawKind::Markov {
            transition: vec![vec![0.9, 0.2], vec![0.1, 0.9]],
        };
        assert!(CoordinateLaw::new(vec![-1.0, 1.0], vec![0.5, 0.5], bad_row, false).is_err());
    }

    #[test]
    fn rademacher_is_centered() {
        let law = CoordinateLaw::rademacher();
        assert!(law.is_centered());
        assert_eq!(law.mean(), 0.0);
        assert_eq!(law.step(0, 1), 0.5);
    }
}
