//! Interval counterexamples on `[0, 1]` showing that backward martingale
//! convergence fails in the exponential Orlicz space and in `L^∞`.
//!
//! `[0, 1]` is cut into blocks `B_1, B_2, …`; block `B_n` holds the pairs
//! `(A'_{n,k}, A''_{n,k})` for `k ≥ 2`, each of length
//! `c·2^{-n}·e^{-k}/(k ln²k)`. `X` is `k` on `A'` and `-k` on `A''` (or `±1`
//! for the bounded variant). `F_n` is generated by the intervals of the
//! blocks `B_m`, `m ≥ n`. The infinite layout is truncated at `k ≤ K_max`
//! and `n ≤ N_max`; the uncovered mass is a final slack atom with `X = 0`.

mod series;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::measure::{
    cond_expect, is_measurable, is_refinement, lp_norm, Partition, ProbabilitySpace, RandomVariable,
};

pub use series::{
    compute_c, exp_abs_moment, k_series_sum, orlicz_norm_lower_bound, verify_divergence,
    verify_divergence_with_cap, DivergenceCertificate, ExpAbsMoment, KSeries, OrliczLowerBound,
    DEFAULT_SEARCH_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Values taken by `X` on the intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `±k` on `A'_{n,k}`, `A''_{n,k}`.
    Orlicz,
    /// `±1`, the uniformly bounded variant.
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub n: u32,
    pub k: u32,
    pub sign: Sign,
    pub left: f64,
    pub length: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleLayout {
    pub k_max: u32,
    pub n_max: u32,
    pub c: f64,
    /// Bound on `|S - Σ_{k ≤ K} e^{-k}/(k ln²k)|` for the `K` used in `c`.
    pub c_series_error: f64,
    pub variant: Variant,
    pub intervals: Vec<Interval>,
    pub tail_mass: f64,
}

/// `e^{-k}/(k ln²k)`.
pub(crate) fn k_weight(k: u32) -> f64 {
    let kf = f64::from(k);
    let l = kf.ln();
    (-kf).exp() / (kf * l * l)
}

/// Lays out the truncated construction. `tol` bounds the error of the
/// series that fixes `c`.
pub fn build_counterexample(k_max: u32, n_max: u32, tol: f64) -> Result<CounterexampleLayout> {
    if k_max < 3 || n_max < 2 {
        return Err(domain(format!(
            "layout needs K_max ≥ 3 and N_max ≥ 2, got K_max = {k_max}, N_max = {n_max}"
        )));
    }
    let series = compute_c(tol)?;
    let c = series.c;
    let mut intervals = Vec::with_capacity(2 * (k_max as usize - 1) * n_max as usize);
    let mut left = 0.0;
    for n in 1..=n_max {
        let block = c * 0.5f64.powi(n as i32);
        for k in 2..=k_max {
            let length = block * k_weight(k);
            for sign in [Sign::Plus, Sign::Minus] {
                intervals.push(Interval {
                    n,
                    k,
                    sign,
                    left,
                    length,
                    value: sign.as_f64() * f64::from(k),
                });
                left += length;
            }
        }
    }
    let covered: f64 = intervals.iter().map(|iv| iv.length).sum();
    Ok(CounterexampleLayout {
        k_max,
        n_max,
        c,
        c_series_error: series.tail_bound,
        variant: Variant::Orlicz,
        intervals,
        tail_mass: (1.0 - covered).max(0.0),
    })
}

impl CounterexampleLayout {
    /// Same intervals with `X = ±1`.
    pub fn bounded(&self) -> Self {
        let mut out = self.clone();
        out.variant = Variant::Bounded;
        for iv in &mut out.intervals {
            iv.value = iv.sign.as_f64();
        }
        out
    }

    /// Left endpoint of the slack block.
    pub fn slack_left(&self) -> f64 {
        self.intervals.last().map_or(0.0, |iv| iv.left + iv.length)
    }

    /// Atoms are the intervals in order followed by the slack block.
    pub fn space(&self) -> Result<Arc<ProbabilitySpace>> {
        let mut w: Vec<f64> = self.intervals.iter().map(|iv| iv.length).collect();
        w.push(self.tail_mass);
        ProbabilitySpace::new(w)
    }

    pub fn x(&self, space: &Arc<ProbabilitySpace>) -> Result<RandomVariable> {
        let mut v: Vec<f64> = self.intervals.iter().map(|iv| iv.value).collect();
        v.push(0.0);
        RandomVariable::new(space.clone(), v)
    }

    /// `μ(B_n)` on the layout.
    pub fn block_mass(&self, n: u32) -> f64 {
        self.intervals
            .iter()
            .filter(|iv| iv.n == n)
            .map(|iv| iv.length)
            .sum()
    }

    /// `μ(C_n)` on the layout, `C_n = ∪_{m ≥ n} B_m`.
    pub fn c_mass(&self, n: u32) -> f64 {
        self.intervals
            .iter()
            .filter(|iv| iv.n >= n)
            .map(|iv| iv.length)
            .sum()
    }

    /// The partition generating `F_n`: one block per interval of `C_n`, one
    /// block for `∪_{m<n} B_m` (when nonempty) and one for the slack.
    pub fn sigma_field(&self, n: u32) -> Partition {
        let slack = self.intervals.len() as i64;
        Partition::from_keys(
            self.intervals
                .iter()
                .enumerate()
                .map(|(idx, iv)| if iv.n >= n { idx as i64 } else { -1 })
                .chain(std::iter::once(slack)),
        )
    }

    pub fn filtration(&self) -> DecreasingFiltrationView {
        DecreasingFiltrationView {
            partitions: (1..=self.n_max).map(|n| self.sigma_field(n)).collect(),
        }
    }
}

/// `F_1 ⊇ F_2 ⊇ … ⊇ F_{N_max}` on the layout atoms.
#[derive(Debug, Clone)]
pub struct DecreasingFiltrationView {
    partitions: Vec<Partition>,
}

impl DecreasingFiltrationView {
    pub fn n_max(&self) -> u32 {
        self.partitions.len() as u32
    }

    pub fn at(&self, n: u32) -> Option<&Partition> {
        self.partitions.get((n as usize).checked_sub(1)?)
    }

    /// Every block of `F_{n+1}` is a union of blocks of `F_n`.
    pub fn is_decreasing(&self) -> bool {
        self.partitions
            .windows(2)
            .all(|w| is_refinement(&w[1], &w[0]))
    }
}

#[derive(Debug, Clone)]
pub struct BackwardProjection {
    pub n: u32,
    pub x_n: RandomVariable,
    /// `|E(X|F_n) - X·𝕀_{C_n}|` atomwise.
    pub indicator_residual: f64,
    pub c_mass: f64,
    /// `μ(X_n ≠ 0)`.
    pub nonzero_mass: f64,
    pub sup_norm: f64,
    pub l1_norm: f64,
}

/// `X_n = E(X | F_n)` computed exactly on the layout and compared with
/// `X·𝕀_{C_n}`.
pub fn backward_projection(layout: &CounterexampleLayout, n: u32) -> Result<BackwardProjection> {
    if n < 1 || n > layout.n_max {
        return Err(domain(format!("n = {n} outside 1..={}", layout.n_max)));
    }
    let space = layout.space()?;
    let x = layout.x(&space)?;
    let x_n = cond_expect(&x, &layout.sigma_field(n))?;
    let mut indicator: Vec<f64> = layout
        .intervals
        .iter()
        .map(|iv| if iv.n >= n { iv.value } else { 0.0 })
        .collect();
    indicator.push(0.0);
    let indicator = RandomVariable::new(space.clone(), indicator)?;
    let nonzero_mass = x_n
        .values()
        .iter()
        .zip(space.weights())
        .filter(|(v, _)| **v != 0.0)
        .map(|(_, w)| w)
        .sum();
    Ok(BackwardProjection {
        n,
        indicator_residual: x_n.max_abs_diff(&indicator),
        c_mass: layout.c_mass(n),
        nonzero_mass,
        sup_norm: lp_norm(&x_n, f64::INFINITY)?,
        l1_norm: lp_norm(&x_n, 1.0)?,
        x_n,
    })
}

/// `X` is `F_1`-measurable on the layout.
pub fn x_is_f1_measurable(layout: &CounterexampleLayout) -> Result<bool> {
    let space = layout.space()?;
    Ok(is_measurable(
        &layout.x(&space)?,
        &layout.sigma_field(1),
        0.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> CounterexampleLayout {
        build_counterexample(40, 8, 1e-16).unwrap()
    }

    #[test]
    fn lengths_follow_the_formula() {
        let l = layout();
        for iv in &l.intervals {
            let k = f64::from(iv.k);
            let want = l.c / 2f64.powi(iv.n as i32) / (k.exp() * k * k.ln().powi(2));
            assert!((iv.length - want).abs() <= 1e-14 * want);
        }
    }

    #[test]
    fn intervals_are_adjacent_and_cover() {
        let l = layout();
        let mut edge = 0.0;
        for iv in &l.intervals {
            assert_eq!(iv.left, edge);
            edge = iv.left + iv.length;
        }
        let total: f64 = l.intervals.iter().map(|iv| iv.length).sum();
        assert!((total + l.tail_mass - 1.0).abs() <= 1e-12);
        assert!(l.tail_mass < 2f64.powi(-8) + 1e-15);
    }

    #[test]
    fn block_masses_are_dyadic() {
        let l = layout();
        for n in 1..=8 {
            assert!((l.block_mass(n) - 0.5f64.powi(n as i32)).abs() <= 1e-12);
        }
        let cm = l.c_mass(3);
        assert!((cm - (0.25 - 2f64.powi(-8))).abs() <= 1e-12);
    }

    #[test]
    fn x_takes_every_value_on_each_block() {
        let l = layout();
        for n in 1..=8 {
            for k in 2..=40 {
                for s in [1.0, -1.0] {
                    assert!(l
                        .intervals
                        .iter()
                        .any(|iv| iv.n == n && iv.value == s * f64::from(k)));
                }
            }
        }
        let space = l.space().unwrap();
        assert!(l.x(&space).unwrap().expectation().abs() <= 1e-15);
    }

    #[test]
    fn filtration_decreases_and_projection_is_restriction() {
        let l = layout();
        assert!(l.filtration().is_decreasing());
        assert!(x_is_f1_measurable(&l).unwrap());
        let p1 = backward_projection(&l, 1).unwrap();
        let space = l.space().unwrap();
        assert!(p1.x_n.max_abs_diff(&l.x(&space).unwrap()) <= 1e-12);
        for n in 1..=8 {
            let p = backward_projection(&l, n).unwrap();
            assert!(p.indicator_residual <= 1e-12);
            assert!((p.nonzero_mass - p.c_mass).abs() <= 1e-15);
        }
        assert!(backward_projection(&l, 9).is_err());
    }

    #[test]
    fn bounded_variant_keeps_sup_norm() {
        let l = layout().bounded();
        for n in 1..=8 {
            let p = backward_projection(&l, n).unwrap();
            assert_eq!(p.sup_norm, 1.0);
            assert!(p.indicator_residual <= 1e-12);
        }
    }

    #[test]
    fn small_layouts_are_rejected() {
        assert!(build_counterexample(2, 5, 1e-12).is_err());
        assert!(build_counterexample(5, 1, 1e-12).is_err());
    }
}
