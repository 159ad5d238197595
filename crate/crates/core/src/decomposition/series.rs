//! The two series that define the coboundary term:
//!
//! ```text
//! V_k = Σ_{i≥0} E(X_{k+i} | F_{k-1})
//! W_k = Σ_{i≥1} [X_{k-i} - E(X_{k-i} | F_{k-1})]
//! ```
//!
//! Both are truncated at `i_max`. A truncation is certified exact when
//! every omitted term vanishes identically: past terms vanish once `X_{k-i}`
//! reads only coordinates `≤ k-1`; future terms vanish, for iid innovations,
//! once `X_{k+i}` is centered and reads only coordinates `≥ k`. Outside its
//! support the process is zero.

use serde::Serialize;

use crate::error::Result;
use crate::measure::{lp_norm, RandomVariable};
use crate::process::ExactProcess;

/// Numerical zero for "identically vanishing" terms.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailReport {
    pub last_included_l1: f64,
    pub first_excluded_l1: f64,
    /// Every omitted term is identically zero.
    pub exact: bool,
}

impl TailReport {
    /// Last included term below `tol` and the first excluded term zero.
    pub fn converged(&self, tol: f64) -> bool {
        self.exact || (self.last_included_l1 < tol && self.first_excluded_l1 <= ZERO_TOL)
    }
}

#[derive(Debug, Clone)]
pub struct SeriesSum {
    pub value: RandomVariable,
    pub tail: TailReport,
}

fn l1(x: &RandomVariable) -> f64 {
    lp_norm(x, 1.0).expect("p = 1 is valid")
}

fn forward_term(p: &ExactProcess, k: i64, j: i64) -> Result<Option<RandomVariable>> {
    p.x(j)
        .map(|x| p.filtration().cond_expect(x, k - 1))
        .transpose()
}

fn backward_term(p: &ExactProcess, k: i64, j: i64) -> Result<Option<RandomVariable>> {
    p.x(j)
        .map(|x| {
            let mut t = x.clone();
            t.sub_assign(&p.filtration().cond_expect(x, k - 1)?);
            Ok(t)
        })
        .transpose()
}

/// `E(X_j | F_{k-1}) = 0` is guaranteed without computing it.
fn forward_vanishes(p: &ExactProcess, k: i64, j: i64) -> bool {
    let Some(x) = p.x(j) else {
        return true;
    };
    let independent = match p.coordinate_span(j) {
        None => true,
        Some((lo, _)) => p.law().is_iid() && lo >= k,
    };
    independent && x.expectation().abs() <= ZERO_TOL
}

/// `X_j - E(X_j | F_{k-1}) = 0` is guaranteed without computing it.
fn backward_vanishes(p: &ExactProcess, k: i64, j: i64) -> bool {
    p.x(j).is_none() || p.coordinate_span(j).is_none_or(|(_, hi)| hi < k)
}

fn after(p: &ExactProcess, from: i64) -> impl Iterator<Item = i64> + '_ {
    let top = p.support().map_or(i64::MIN, |s| s.1);
    from..=top
}

fn before(p: &ExactProcess, to: i64) -> impl Iterator<Item = i64> + '_ {
    let bottom = p.support().map_or(i64::MAX, |s| s.0);
    bottom..=to
}

/// True iff truncating `V_k` after `i_max` terms omits only zero terms.
pub fn v_certified(p: &ExactProcess, k: i64, i_max: usize) -> bool {
    after(p, k + i_max as i64 + 1).all(|j| forward_vanishes(p, k, j))
}

/// True iff truncating `W_k` after `i_max` terms omits only zero terms.
pub fn w_certified(p: &ExactProcess, k: i64, i_max: usize) -> bool {
    before(p, k - i_max as i64 - 1).all(|j| backward_vanishes(p, k, j))
}

/// Smallest truncation certified exact for every `k` in the range, or the
/// full support length when no shorter one is.
pub fn default_i_max(p: &ExactProcess, k_lo: i64, k_hi: i64) -> usize {
    let Some((s_lo, s_hi)) = p.support() else {
        return 0;
    };
    let full = ((s_hi - s_lo).max(0) as usize)
        + (k_hi - s_lo).unsigned_abs() as usize
        + (s_hi - k_lo).unsigned_abs() as usize
        + 1;
    (0..=full)
        .find(|&i| (k_lo..=k_hi).all(|k| v_certified(p, k, i) && w_certified(p, k, i)))
        .unwrap_or(full)
}

fn sum_terms(
    p: &ExactProcess,
    indices: impl Iterator<Item = i64>,
    term: impl Fn(i64) -> Result<Option<RandomVariable>>,
) -> Result<(RandomVariable, f64)> {
    let mut acc = RandomVariable::zero(p.space().clone());
    let mut last = 0.0;
    for j in indices {
        last = 0.0;
        if let Some(t) = term(j)? {
            last = l1(&t);
            acc.add_assign(&t);
        }
    }
    Ok((acc, last))
}

/// Partial sum `Σ_{i=0}^{i_max} E(X_{k+i} | F_{k-1})`.
pub fn compute_v(p: &ExactProcess, k: i64, i_max: usize) -> Result<SeriesSum> {
    let (value, last) = sum_terms(p, k..=k + i_max as i64, |j| forward_term(p, k, j))?;
    let first_excluded = forward_term(p, k, k + i_max as i64 + 1)?.map_or(0.0, |t| l1(&t));
    Ok(SeriesSum {
        value,
        tail: TailReport {
            last_included_l1: last,
            first_excluded_l1: first_excluded,
            exact: v_certified(p, k, i_max),
        },
    })
}

/// Partial sum `Σ_{i=1}^{i_max} [X_{k-i} - E(X_{k-i} | F_{k-1})]`.
pub fn compute_w(p: &ExactProcess, k: i64, i_max: usize) -> Result<SeriesSum> {
    let (value, last) = sum_terms(p, (1..=i_max as i64).map(|i| k - i), |j| {
        backward_term(p, k, j)
    })?;
    let first_excluded = backward_term(p, k, k - i_max as i64 - 1)?.map_or(0.0, |t| l1(&t));
    Ok(SeriesSum {
        value,
        tail: TailReport {
            last_included_l1: last,
            first_excluded_l1: first_excluded,
            exact: w_certified(p, k, i_max),
        },
    })
}
