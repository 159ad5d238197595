//! Martingale-coboundary decomposition `X_k = Y_k + U_k - U_{k+1}` of an
//! exact process, with `U_k = V_k - W_k` built from the series in
//! [`series`], and the checks that certify it.

pub mod series;
mod stationary;
mod verify;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::measure::{lp_norm, RandomVariable};
use crate::process::ExactProcess;

pub use series::{compute_v, compute_w, default_i_max, SeriesSum, TailReport, ZERO_TOL};
pub use stationary::{
    gordin_criterion, l2_series_criterion, stationary_decompose, GordinSeries, L2Criterion,
    StationaryDecomposition, StationaryReport,
};
pub use verify::{
    check_condition_2, verify_decomposition, ConditionTwoReport, ConditionTwoRow,
    VerificationReport,
};

#[derive(Debug, Clone)]
pub struct DecompositionEntry {
    pub k: i64,
    pub v: RandomVariable,
    pub w: RandomVariable,
    pub u: RandomVariable,
    pub y: RandomVariable,
    pub v_tail: TailReport,
    pub w_tail: TailReport,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub k_range: (i64, i64),
    pub i_max: usize,
    pub entries: Vec<DecompositionEntry>,
    /// `U_{k_hi + 1}`, needed for `Y_{k_hi}`.
    pub u_after: RandomVariable,
    pub u_after_tails: (TailReport, TailReport),
}

impl DecompositionResult {
    pub fn entry(&self, k: i64) -> Option<&DecompositionEntry> {
        let idx = k.checked_sub(self.k_range.0)?;
        self.entries.get(usize::try_from(idx).ok()?)
    }

    /// `U_k` for `k` in the range or `k_hi + 1`.
    pub fn u(&self, k: i64) -> Option<&RandomVariable> {
        if k == self.k_range.1 + 1 {
            Some(&self.u_after)
        } else {
            self.entry(k).map(|e| &e.u)
        }
    }

    /// Every series in the result terminated exactly.
    pub fn exact(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.v_tail.exact && e.w_tail.exact)
            && self.u_after_tails.0.exact
            && self.u_after_tails.1.exact
    }

    /// Per-k summary rows `(k, ‖V_k‖₁, ‖W_k‖₁, ‖U_k‖₂, ‖Y_k‖₂)`.
    pub fn summary(&self) -> Vec<SummaryRow> {
        self.entries
            .iter()
            .map(|e| SummaryRow {
                k: e.k,
                v_l1: lp_norm(&e.v, 1.0).expect("p = 1"),
                w_l1: lp_norm(&e.w, 1.0).expect("p = 1"),
                u_l2: lp_norm(&e.u, 2.0).expect("p = 2"),
                y_l2: lp_norm(&e.y, 2.0).expect("p = 2"),
                exact: e.v_tail.exact && e.w_tail.exact,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryRow {
    pub k: i64,
    pub v_l1: f64,
    pub w_l1: f64,
    pub u_l2: f64,
    pub y_l2: f64,
    pub exact: bool,
}

/// `U_k = V_k - W_k` together with both tail reports.
pub fn compute_u(
    p: &ExactProcess,
    k: i64,
    i_max: usize,
) -> Result<(RandomVariable, TailReport, TailReport)> {
    let v = compute_v(p, k, i_max)?;
    let w = compute_w(p, k, i_max)?;
    let mut u = v.value;
    u.sub_assign(&w.value);
    Ok((u, v.tail, w.tail))
}

/// Decomposes `X_k` for `k` in `k_lo..=k_hi`.
///
/// With `i_max = None` the truncation is the shortest one certified exact
/// for the whole range (see [`default_i_max`]).
pub fn decompose(
    p: &ExactProcess,
    k_lo: i64,
    k_hi: i64,
    i_max: Option<usize>,
) -> Result<DecompositionResult> {
    if k_lo > k_hi {
        return Err(domain(format!("empty k range [{k_lo}, {k_hi}]")));
    }
    let i_max = i_max.unwrap_or_else(|| default_i_max(p, k_lo, k_hi + 1));
    let parts: Vec<(i64, SeriesSum, SeriesSum)> = (k_lo..=k_hi + 1)
        .into_par_iter()
        .map(|k| Ok((k, compute_v(p, k, i_max)?, compute_w(p, k, i_max)?)))
        .collect::<Result<_>>()?;
    let us: Vec<RandomVariable> = parts.iter().map(|(_, v, w)| &v.value - &w.value).collect();
    let mut entries = Vec::with_capacity(parts.len() - 1);
    for (idx, (k, v, w)) in parts.iter().take(parts.len() - 1).enumerate() {
        let mut y = p.x_or_zero(*k);
        y.sub_assign(&us[idx]);
        y.add_assign(&us[idx + 1]);
        entries.push(DecompositionEntry {
            k: *k,
            v: v.value.clone(),
            w: w.value.clone(),
            u: us[idx].clone(),
            y,
            v_tail: v.tail,
            w_tail: w.tail,
        });
    }
    let (_, v_last, w_last) = parts.last().expect("at least two indices");
    Ok(DecompositionResult {
        k_range: (k_lo, k_hi),
        i_max,
        entries,
        u_after: us.last().expect("nonempty").clone(),
        u_after_tails: (v_last.tail, w_last.tail),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{presets, CoordinateLaw, ExactProcessModel};

    fn build(pattern: crate::process::FunctionalPattern) -> ExactProcess {
        ExactProcessModel::new((-4, 4), CoordinateLaw::rademacher(), pattern)
            .build()
            .unwrap()
    }

    #[test]
    fn ma1_closed_form() {
        let p = build(presets::ma1(0.5));
        let r = decompose(&p, -2, 2, None).unwrap();
        assert!(r.exact());
        for e in &r.entries {
            let u = p.coordinate(e.k - 1).unwrap().scale(0.5);
            let y = p.coordinate(e.k).unwrap().scale(1.5);
            assert!(e.u.max_abs_diff(&u) <= 1e-12);
            assert!(e.y.max_abs_diff(&y) <= 1e-12);
            assert!(e.w.is_zero(1e-15));
        }
    }

    #[test]
    fn martingale_is_its_own_martingale_part() {
        let p = build(presets::martingale());
        let r = decompose(&p, -3, 3, None).unwrap();
        for e in &r.entries {
            assert!(e.u.is_zero(1e-15));
            assert!(e.y.max_abs_diff(p.x(e.k).unwrap()) <= 1e-15);
        }
    }

    #[test]
    fn coboundary_has_no_martingale_part() {
        let p = build(presets::coboundary());
        let r = decompose(&p, -2, 2, None).unwrap();
        for e in &r.entries {
            assert!(e.y.is_zero(1e-15));
            assert!(e.u.max_abs_diff(&p.coordinate(e.k).unwrap()) <= 1e-15);
        }
    }

    #[test]
    fn alternating_ma_uses_forward_coefficient() {
        let p = build(presets::alternating_ma1(0.5, 0.6));
        let a = |i: i64| 0.5 + 0.1 * i.rem_euclid(2) as f64;
        let r = decompose(&p, -2, 2, None).unwrap();
        for e in &r.entries {
            let u = p.coordinate(e.k - 1).unwrap().scale(a(e.k));
            let y = p.coordinate(e.k).unwrap().scale(1.0 + a(e.k + 1));
            assert!(e.u.max_abs_diff(&u) <= 1e-12);
            assert!(e.y.max_abs_diff(&y) <= 1e-12);
        }
    }

    #[test]
    fn zero_process_gives_zero_everything() {
        let p = build(presets::zero());
        let r = decompose(&p, -4, 4, None).unwrap();
        for e in &r.entries {
            for x in [&e.v, &e.w, &e.u, &e.y] {
                assert!(x.is_zero(0.0));
            }
        }
    }

    #[test]
    fn empty_range_is_rejected() {
        let p = build(presets::martingale());
        assert!(decompose(&p, 2, 1, None).is_err());
    }
}
