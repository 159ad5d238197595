//! Pathwise form of a decomposed model: `X_i` and `U_i` as lookup tables
//! over the innovations, so that long paths can be simulated and exact
//! second moments computed by local enumeration.

use serde::Serialize;

use crate::decomposition::{decompose, ZERO_TOL};
use crate::error::{invalid, Result};
use crate::process::{
    replica_rng, CoordinateLaw, ExactProcessModel, FunctionalPattern, LocalTable, SymbolDrawer,
};

/// Local table of `U` at one phase, with its distribution.
type PhaseTable = (LocalTable, Vec<(f64, f64)>);

/// Tolerance for matching `U` tables one period apart.
pub const PERIODICITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractionReport {
    pub window: (i64, i64),
    /// First index of the decomposed range the tables were read from.
    pub k_from: i64,
    pub i_max: usize,
    /// Largest difference between `U` tables one period apart.
    pub periodicity_residual: f64,
    /// Every series behind the tables terminated exactly.
    pub exact: bool,
}

/// A value `coef · table(at + ·)`, part of a linear combination of tables.
#[derive(Debug, Clone, Copy)]
pub struct Term<'a> {
    pub coef: f64,
    pub table: &'a LocalTable,
    pub at: i64,
}

#[derive(Debug, Clone)]
pub struct PathModel {
    law: CoordinateLaw,
    pattern: FunctionalPattern,
    x_tables: Vec<LocalTable>,
    u_tables: Vec<LocalTable>,
    u_distributions: Vec<Vec<(f64, f64)>>,
    y_sup: f64,
    u_sup: f64,
    offsets: (i64, i64),
    drawer: SymbolDrawer,
    pub extraction: ExtractionReport,
}

/// Symbols drawn for one replica, covering every coordinate the first
/// `n` values of `X` and the first `n + 1` values of `U` read.
pub struct Symbols<'a> {
    model: &'a PathModel,
    start: i64,
    data: Vec<u16>,
}

impl Symbols<'_> {
    #[inline]
    fn at(&self, j: i64) -> usize {
        self.data[(j - self.start) as usize] as usize
    }

    #[inline]
    pub fn x(&self, i: i64) -> f64 {
        let m = self.model;
        m.x_tables[m.pattern.phase(i)].eval_at(i, |j| self.at(j))
    }

    #[inline]
    pub fn u(&self, i: i64) -> f64 {
        let m = self.model;
        m.u_tables[m.pattern.phase(i)].eval_at(i, |j| self.at(j))
    }
}

/// `X_1..X_n` and `U_1..U_{n+1}` of one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl PathSample {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `Y_i = X_i - U_i + U_{i+1}` for `i = 1..=n`.
    pub fn y(&self) -> Vec<f64> {
        (0..self.x.len())
            .map(|i| self.x[i] - self.u[i] + self.u[i + 1])
            .collect()
    }
}

fn span_of(t: &LocalTable) -> (i64, i64) {
    t.span().unwrap_or((0, 0))
}

impl PathModel {
    /// Decomposes `model` on two consecutive periods near the middle of its
    /// support and tabulates `U` per phase. Fails when the tables do not
    /// repeat with the pattern's period, which means the window is too
    /// narrow for the dependence range.
    pub fn from_model(model: &ExactProcessModel) -> Result<Self> {
        let p = model.build()?;
        let pattern = model.functionals.clone();
        let law = model.law.clone();
        let period = pattern.period() as i64;
        let (s_lo, s_hi) = p
            .support()
            .ok_or_else(|| invalid("path model", "no X_i fits in the window"))?;
        let k_from = (s_lo + s_hi).div_euclid(2) - period;
        let r = decompose(&p, k_from, k_from + 2 * period - 1, None)?;

        let mut u_tables = Vec::with_capacity(period as usize);
        let mut u_distributions = Vec::with_capacity(period as usize);
        let mut residual: f64 = 0.0;
        let mut slots: Vec<Option<PhaseTable>> = vec![None; period as usize];
        for e in r.entries.iter().take(period as usize) {
            let a = p.local_table(&e.u, e.k, ZERO_TOL)?;
            let later = r.entry(e.k + period).expect("two periods decomposed");
            let b = p.local_table(&later.u, later.k, ZERO_TOL)?;
            residual = residual.max(a.max_abs_diff(&b).unwrap_or(f64::INFINITY));
            slots[pattern.phase(e.k)] = Some((a, e.u.distribution()));
        }
        if residual > PERIODICITY_TOL {
            return Err(invalid(
                "path model",
                format!(
                    "U is not periodic on window [{}, {}] (residual {residual}); widen the window",
                    model.window.0, model.window.1
                ),
            ));
        }
        for slot in slots {
            let (t, d) = slot.expect("every phase visited");
            u_tables.push(t);
            u_distributions.push(d);
        }
        let x_tables = pattern
            .entries()
            .iter()
            .map(|f| f.to_table(&law))
            .collect::<Result<Vec<_>>>()?;
        let y_sup = r.entries.iter().map(|e| e.y.max_abs()).fold(0.0, f64::max);
        let u_sup = r.entries.iter().map(|e| e.u.max_abs()).fold(0.0, f64::max);
        let offsets = x_tables
            .iter()
            .chain(&u_tables)
            .map(span_of)
            .fold((0, 0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
        Ok(PathModel {
            drawer: SymbolDrawer::new(&law),
            law,
            pattern,
            x_tables,
            u_tables,
            u_distributions,
            y_sup,
            u_sup,
            offsets,
            extraction: ExtractionReport {
                window: model.window,
                k_from,
                i_max: r.i_max,
                periodicity_residual: residual,
                exact: r.exact(),
            },
        })
    }

    pub fn law(&self) -> &CoordinateLaw {
        &self.law
    }

    pub fn pattern(&self) -> &FunctionalPattern {
        &self.pattern
    }

    pub fn period(&self) -> usize {
        self.pattern.period()
    }

    pub fn x_table(&self, i: i64) -> &LocalTable {
        &self.x_tables[self.pattern.phase(i)]
    }

    pub fn u_table(&self, i: i64) -> &LocalTable {
        &self.u_tables[self.pattern.phase(i)]
    }

    /// Law of `U_i` as sorted `(value, mass)` pairs.
    pub fn u_distribution(&self, i: i64) -> &[(f64, f64)] {
        &self.u_distributions[self.pattern.phase(i)]
    }

    /// `sup_i ‖Y_i‖_∞`.
    pub fn y_sup(&self) -> f64 {
        self.y_sup
    }

    /// `sup_i ‖U_i‖_∞`.
    pub fn u_sup(&self) -> f64 {
        self.u_sup
    }

    /// Second moments can be enumerated locally.
    pub fn moments_exact(&self) -> bool {
        self.law.is_iid()
    }

    /// Innovations for replica `replica`; deterministic in `(seed, replica)`.
    pub fn symbols(&self, n: usize, seed: u64, replica: u64) -> Symbols<'_> {
        let start = 1 + self.offsets.0;
        let end = n as i64 + 1 + self.offsets.1;
        let mut data = vec![0u16; (end - start + 1).max(0) as usize];
        self.drawer.fill(&mut replica_rng(seed, replica), &mut data);
        Symbols {
            model: self,
            start,
            data,
        }
    }

    /// `S_n = X_1 + … + X_n` for one replica.
    pub fn partial_sum(&self, n: usize, seed: u64, replica: u64) -> f64 {
        let s = self.symbols(n, seed, replica);
        (1..=n as i64).map(|i| s.x(i)).sum()
    }

    pub fn sample(&self, n: usize, seed: u64, replica: u64) -> PathSample {
        let s = self.symbols(n, seed, replica);
        PathSample {
            x: (1..=n as i64).map(|i| s.x(i)).collect(),
            u: (1..=n as i64 + 1).map(|i| s.u(i)).collect(),
        }
    }

    /// `E f(A_1, …, A_m)` for linear combinations `A_r` of tables, by
    /// enumerating the coordinates they read. Valid for iid laws only.
    pub fn local_expectation(
        &self,
        vars: &[Vec<Term<'_>>],
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<f64> {
        if !self.law.is_iid() {
            return Err(invalid("local expectation", "needs an iid law"));
        }
        let mut coords: Vec<i64> = vars
            .iter()
            .flatten()
            .flat_map(|t| t.table.offsets().iter().map(move |o| t.at + o))
            .collect();
        coords.sort_unstable();
        coords.dedup();
        let radix = self.law.size();
        let len = crate::process::table_len(radix, coords.len())?;
        let probs = self.law.probabilities();
        let mut digits = vec![0usize; coords.len()];
        let mut vals = vec![0.0; vars.len()];
        let mut acc = 0.0;
        for idx in 0..len {
            let mut rest = idx;
            let mut w = 1.0;
            for d in digits.iter_mut().rev() {
                *d = rest % radix;
                rest /= radix;
                w *= probs[*d];
            }
            if w == 0.0 {
                continue;
            }
            let sym = |j: i64| digits[coords.binary_search(&j).expect("enumerated coordinate")];
            for (v, terms) in vals.iter_mut().zip(vars) {
                *v = terms
                    .iter()
                    .map(|t| t.coef * t.table.eval_at(t.at, sym))
                    .sum();
            }
            acc += w * f(&vals);
        }
        Ok(acc)
    }

    pub fn x_terms(&self, i: i64) -> Vec<Term<'_>> {
        vec![Term {
            coef: 1.0,
            table: self.x_table(i),
            at: i,
        }]
    }

    pub fn u_terms(&self, i: i64) -> Vec<Term<'_>> {
        vec![Term {
            coef: 1.0,
            table: self.u_table(i),
            at: i,
        }]
    }

    /// `Y_i = X_i - U_i + U_{i+1}`.
    pub fn y_terms(&self, i: i64) -> Vec<Term<'_>> {
        vec![
            Term {
                coef: 1.0,
                table: self.x_table(i),
                at: i,
            },
            Term {
                coef: -1.0,
                table: self.u_table(i),
                at: i,
            },
            Term {
                coef: 1.0,
                table: self.u_table(i + 1),
                at: i + 1,
            },
        ]
    }

    /// `E(A_1 + … + A_n)²` for a periodic family of combinations, from the
    /// covariances at each phase and lag. Terms farther apart than their
    /// joint reach are independent.
    pub fn second_moment_of_sum<'a>(
        &'a self,
        n: usize,
        combo: impl Fn(i64) -> Vec<Term<'a>>,
    ) -> Result<f64> {
        let period = self.period() as i64;
        // A_i reads coordinates in i + [lo, hi]; beyond lag hi - lo the
        // summands are independent.
        let (lo, hi) = (1..=period)
            .flat_map(|i| {
                combo(i).into_iter().map(move |t| {
                    let (a, b) = span_of(t.table);
                    (t.at + a - i, t.at + b - i)
                })
            })
            .fold((i64::MAX, i64::MIN), |acc, (a, b)| {
                (acc.0.min(a), acc.1.max(b))
            });
        let max_lag = (hi - lo).max(0) as usize;
        let mut cov = vec![vec![0.0; max_lag + 1]; period as usize];
        let mut mean = vec![0.0; period as usize];
        for rep in 1..=period {
            let ph = self.pattern.phase(rep);
            mean[ph] = self.local_expectation(&[combo(rep)], |v| v[0])?;
        }
        for rep in 1..=period {
            let ph = self.pattern.phase(rep);
            for (lag, c) in cov[ph].iter_mut().enumerate() {
                let j = rep + lag as i64;
                let e = self.local_expectation(&[combo(rep), combo(j)], |v| v[0] * v[1])?;
                *c = e - mean[ph] * mean[self.pattern.phase(j)];
            }
        }
        let mut var = 0.0;
        let mut total_mean = 0.0;
        for i in 1..=n as i64 {
            let ph = self.pattern.phase(i);
            total_mean += mean[ph];
            var += cov[ph][0];
            let top = max_lag.min(n - i as usize);
            var += 2.0 * cov[ph][1..=top].iter().sum::<f64>();
        }
        Ok(var + total_mean * total_mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::presets;

    fn model(pattern: FunctionalPattern) -> PathModel {
        PathModel::from_model(&ExactProcessModel::new(
            (-6, 6),
            CoordinateLaw::rademacher(),
            pattern,
        ))
        .unwrap()
    }

    #[test]
    fn ma1_tables() {
        let m = model(presets::ma1(0.5));
        assert!(m.extraction.exact);
        assert_eq!(m.u_table(3).offsets(), &[-1]);
        assert_eq!(m.u_sup(), 0.5);
        assert_eq!(m.y_sup(), 1.5);
        let path = m.sample(50, 3, 0);
        for (i, y) in path.y().iter().enumerate() {
            assert!(y.abs() == 1.5, "Y_{} = {y}", i + 1);
        }
    }

    #[test]
    fn exact_second_moments() {
        let m = model(presets::ma1(0.5));
        for n in [1usize, 2, 7, 40] {
            let nf = n as f64;
            let sb = m.second_moment_of_sum(n, |i| m.x_terms(i)).unwrap();
            let s = m.second_moment_of_sum(n, |i| m.y_terms(i)).unwrap();
            assert!(
                (sb - (1.25 * nf + (nf - 1.0))).abs() <= 1e-9,
                "n = {n}: {sb}"
            );
            assert!((s - 2.25 * nf).abs() <= 1e-9, "n = {n}: {s}");
        }
    }

    #[test]
    fn alternating_pattern_phases() {
        let m = model(presets::alternating_ma1(0.5, 0.6));
        assert_eq!(m.period(), 2);
        let path = m.sample(40, 9, 1);
        let y = path.y();
        for (idx, yi) in y.iter().enumerate() {
            let i = idx as i64 + 1;
            let a_next = if (i + 1).rem_euclid(2) == 0 { 0.5 } else { 0.6 };
            assert!((yi.abs() - (1.0 + a_next)).abs() <= 1e-12);
        }
    }

    #[test]
    fn narrow_window_is_rejected() {
        let pat = presets::ma1(0.5);
        let r = PathModel::from_model(&ExactProcessModel::new(
            (-1, 1),
            CoordinateLaw::rademacher(),
            pat,
        ));
        assert!(r.is_err());
    }
}
