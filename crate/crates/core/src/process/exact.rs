use std::collections::BTreeMap;
use std::sync::Arc;

use super::functional::table_len;
use super::{CoordinateLaw, FunctionalPattern, LocalTable};
use crate::error::{domain, invalid, Error, Result};
use crate::measure::{Filtration, Partition, ProbabilitySpace, RandomVariable};

pub const DEFAULT_ATOM_BUDGET: usize = 1 << 20;

/// A process on the finite product space of innovations `ξ_lo, …, ξ_hi`.
///
/// `X_i` is defined for every index whose functional reads only coordinates
/// inside the window (optionally restricted to `index_range`).
#[derive(Debug, Clone)]
pub struct ExactProcessModel {
    pub window: (i64, i64),
    pub law: CoordinateLaw,
    pub functionals: FunctionalPattern,
    pub index_range: Option<(i64, i64)>,
    pub atom_budget: usize,
}

impl ExactProcessModel {
    pub fn new(window: (i64, i64), law: CoordinateLaw, functionals: FunctionalPattern) -> Self {
        ExactProcessModel {
            window,
            law,
            functionals,
            index_range: None,
            atom_budget: DEFAULT_ATOM_BUDGET,
        }
    }

    pub fn with_index_range(mut self, lo: i64, hi: i64) -> Self {
        self.index_range = Some((lo, hi));
        self
    }

    pub fn with_atom_budget(mut self, budget: usize) -> Self {
        self.atom_budget = budget;
        self
    }

    /// `|alphabet|^(window length)`, saturating.
    pub fn atom_count(&self) -> u128 {
        let len = (self.window.1 - self.window.0 + 1).max(0) as u32;
        (self.law.size() as u128).saturating_pow(len)
    }

    pub fn build(&self) -> Result<ExactProcess> {
        build_exact(self)
    }
}

/// The realized product space, natural filtration and process variables.
#[derive(Debug, Clone)]
pub struct ExactProcess {
    law: CoordinateLaw,
    window: (i64, i64),
    space: Arc<ProbabilitySpace>,
    filtration: Filtration,
    xs: BTreeMap<i64, RandomVariable>,
    spans: BTreeMap<i64, Option<(i64, i64)>>,
    /// `place[j - lo] = |alphabet|^(hi - j)`; coordinate `lo` is the most
    /// significant digit of the atom index.
    place: Vec<usize>,
}

/// Enumerates the product space, its natural filtration
/// `F_k = σ(ξ_j : j ≤ k)` and the variables `X_i`.
pub fn build_exact(model: &ExactProcessModel) -> Result<ExactProcess> {
    let (lo, hi) = model.window;
    if lo > hi {
        return Err(invalid("exact model", format!("empty window [{lo}, {hi}]")));
    }
    let required = model.atom_count();
    if required > model.atom_budget as u128 {
        return Err(Error::AtomBudget {
            required,
            budget: model.atom_budget,
        });
    }
    let law = model.law.clone();
    let radix = law.size();
    let len = (hi - lo + 1) as usize;
    let atoms = required as usize;
    let mut place = vec![1usize; len];
    for p in (0..len.saturating_sub(1)).rev() {
        place[p] = place[p + 1] * radix;
    }
    let digit = |atom: usize, p: usize| (atom / place[p]) % radix;

    let weights: Vec<f64> = (0..atoms)
        .map(|a| {
            let first = digit(a, 0);
            let mut w = law.probabilities()[first];
            let mut prev = first;
            for p in 1..len {
                let s = digit(a, p);
                w *= law.step(prev, s);
                prev = s;
            }
            w
        })
        .collect();
    let space = ProbabilitySpace::new(weights)?;

    let partitions = (0..len)
        .map(|p| {
            let labels = (0..atoms).map(|a| (a / place[p]) as u32).collect();
            Partition::from_dense_labels(labels, atoms / place[p])
        })
        .collect();
    let filtration = Filtration::new(lo, partitions)?;

    let pattern_span = model.functionals.span();
    let (ilo, ihi) = match (model.index_range, pattern_span) {
        (Some(r), _) => r,
        (None, Some((smin, smax))) => (lo - smin, hi - smax),
        (None, None) => (lo, hi),
    };
    let mut xs = BTreeMap::new();
    let mut spans = BTreeMap::new();
    for i in ilo..=ihi {
        let f = model.functionals.at(i);
        let span = f.span().map(|(a, b)| (i + a, i + b));
        if let Some((a, b)) = span {
            if a < lo || b > hi {
                if model.index_range.is_some() {
                    return Err(domain(format!(
                        "X_{i} reads coordinates [{a}, {b}] outside window [{lo}, {hi}]"
                    )));
                }
                continue;
            }
        }
        let values = (0..atoms)
            .map(|atom| f.eval_at(i, |j| law.symbol(digit(atom, (j - lo) as usize))))
            .collect();
        xs.insert(i, RandomVariable::new(space.clone(), values)?);
        spans.insert(i, span);
    }

    Ok(ExactProcess {
        law,
        window: (lo, hi),
        space,
        filtration,
        xs,
        spans,
        place,
    })
}

impl ExactProcess {
    pub fn law(&self) -> &CoordinateLaw {
        &self.law
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn space(&self) -> &Arc<ProbabilitySpace> {
        &self.space
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn atom_count(&self) -> usize {
        self.space.atom_count()
    }

    /// Indices with a defined `X_i`, ascending.
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.xs.keys().copied()
    }

    /// Smallest and largest defined index.
    pub fn support(&self) -> Option<(i64, i64)> {
        Some((*self.xs.keys().next()?, *self.xs.keys().next_back()?))
    }

    pub fn x(&self, i: i64) -> Option<&RandomVariable> {
        self.xs.get(&i)
    }

    /// `X_i`, or the zero variable where the process is undefined.
    pub fn x_or_zero(&self, i: i64) -> RandomVariable {
        self.xs
            .get(&i)
            .cloned()
            .unwrap_or_else(|| RandomVariable::zero(self.space.clone()))
    }

    /// Absolute coordinates read by `X_i`; `None` if `X_i` is undefined or
    /// reads nothing.
    pub fn coordinate_span(&self, i: i64) -> Option<(i64, i64)> {
        self.spans.get(&i).copied().flatten()
    }

    fn position(&self, j: i64) -> Result<usize> {
        let (lo, hi) = self.window;
        if j < lo || j > hi {
            return Err(domain(format!(
                "coordinate {j} outside window [{lo}, {hi}]"
            )));
        }
        Ok((j - lo) as usize)
    }

    /// Symbol index of coordinate `j` at `atom`.
    pub fn symbol_at(&self, atom: usize, j: i64) -> usize {
        let p = (j - self.window.0) as usize;
        (atom / self.place[p]) % self.law.size()
    }

    /// The innovation `ξ_j` as a random variable.
    pub fn coordinate(&self, j: i64) -> Result<RandomVariable> {
        self.position(j)?;
        RandomVariable::from_fn(self.space.clone(), |a| {
            self.law.symbol(self.symbol_at(a, j))
        })
    }

    /// Builds a variable from a function of the innovation values; the
    /// closure receives an accessor `j ↦ ξ_j`.
    pub fn variable(&self, f: impl Fn(&dyn Fn(i64) -> f64) -> f64) -> Result<RandomVariable> {
        let (lo, hi) = self.window;
        RandomVariable::from_fn(self.space.clone(), |a| {
            let xi = |j: i64| {
                assert!(lo <= j && j <= hi, "coordinate {j} outside window");
                self.law.symbol(self.symbol_at(a, j))
            };
            f(&xi)
        })
    }

    /// True iff changing coordinate `j` alone can change `x` by more than
    /// `tol` between two non-null atoms.
    pub fn depends_on(&self, x: &RandomVariable, j: i64, tol: f64) -> bool {
        let Ok(p) = self.position(j) else {
            return false;
        };
        let radix = self.law.size();
        let step = self.place[p];
        let w = self.space.weights();
        let v = x.values();
        (0..self.atom_count())
            .filter(|&a| (a / step).is_multiple_of(radix) && w[a] > 0.0)
            .any(|a| {
                (1..radix).any(|s| {
                    let b = a + s * step;
                    w[b] > 0.0 && (v[a] - v[b]).abs() > tol
                })
            })
    }

    /// Coordinates `x` depends on, ascending.
    pub fn dependence(&self, x: &RandomVariable, tol: f64) -> Vec<i64> {
        let (lo, hi) = self.window;
        (lo..=hi).filter(|&j| self.depends_on(x, j, tol)).collect()
    }

    /// `x ∘ T^by`: the variable read on innovations translated by `by`.
    ///
    /// Fails when `x` depends on a coordinate that the shift would move
    /// outside the window.
    pub fn shift(&self, x: &RandomVariable, by: i64, tol: f64) -> Result<RandomVariable> {
        let (lo, hi) = self.window;
        if let Some(j) = self
            .dependence(x, tol)
            .into_iter()
            .find(|j| j + by < lo || j + by > hi)
        {
            return Err(domain(format!(
                "shift by {by} moves coordinate {j} of the variable outside window [{lo}, {hi}]"
            )));
        }
        let values = (0..self.atom_count())
            .map(|a| {
                let mut target = 0;
                for j in lo..=hi {
                    let src = j + by;
                    let s = if (lo..=hi).contains(&src) {
                        self.symbol_at(a, src)
                    } else {
                        0
                    };
                    target += s * self.place[(j - lo) as usize];
                }
                x.values()[target]
            })
            .collect();
        RandomVariable::new(self.space.clone(), values)
    }

    /// Tabulates `x` as a function of the coordinates it depends on, with
    /// offsets taken relative to `origin`.
    pub fn local_table(&self, x: &RandomVariable, origin: i64, tol: f64) -> Result<LocalTable> {
        let deps = self.dependence(x, tol);
        let radix = self.law.size();
        let len = table_len(radix, deps.len())?;
        let mut values = vec![0.0; len];
        let mut filled = vec![false; len];
        let w = self.space.weights();
        for (a, &wa) in w.iter().enumerate().take(self.atom_count()) {
            if wa <= 0.0 {
                continue;
            }
            let idx = deps
                .iter()
                .fold(0, |acc, &j| acc * radix + self.symbol_at(a, j));
            if !filled[idx] {
                filled[idx] = true;
                values[idx] = x.values()[a];
            }
        }
        LocalTable::new(deps.iter().map(|j| j - origin).collect(), radix, values)
    }
}
