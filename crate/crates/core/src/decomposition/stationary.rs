//! Stationary form `f = m + g - g∘T`, the `L²` series criterion and the
//! Gordin-type partial sums.
//!
//! The invariant σ-algebra `ℳ` is taken to be `F_{-1}`, so `g = U_0`,
//! `g∘T = U_1` and `m = Y_0`; the sequence `m∘T^i` is then adapted to
//! `F_i = T^{-i-1}ℳ` with `E(m∘T^i | F_{i-1}) = 0`.

use serde::Serialize;

use super::{decompose, series::ZERO_TOL};
use crate::error::{domain, Result};
use crate::measure::{lp_norm, projection, RandomVariable};
use crate::process::{ExactProcess, StationaryShiftModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryReport {
    /// `|f - m - g + g∘T|` atomwise, with `m` computed as `Σ_i P_0(f∘T^i)`.
    pub identity_residual: f64,
    /// `|g∘T - U_1|` atomwise: the shifted `g` against the directly
    /// computed coboundary term at index 1.
    pub shift_residual: f64,
    /// Largest `‖E(m∘T^i | F_{i-1})‖₁` over the checked shifts.
    pub mds_l1: f64,
    /// Largest `|m∘T^i - E(m∘T^i | F_i)|` over the checked shifts.
    pub adapted_residual: f64,
    /// Shifts `i` for which `m∘T^i` fits in the window.
    pub shifts_checked: usize,
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct StationaryDecomposition {
    pub m: RandomVariable,
    pub g: RandomVariable,
    pub g_shifted: RandomVariable,
    pub report: StationaryReport,
}

/// Splits `f` into a martingale difference `m` and a coboundary
/// `g - g∘T`.
pub fn stationary_decompose(
    sm: &StationaryShiftModel,
    i_max: Option<usize>,
) -> Result<StationaryDecomposition> {
    let p = sm.process();
    let f = p.filtration();
    let r = decompose(p, 0, 0, i_max)?;
    let g = r.entries[0].u.clone();
    let g_shifted = p.shift(&g, 1, ZERO_TOL)?;
    let shift_residual = g_shifted.max_abs_diff(&r.u_after);

    let mut m = RandomVariable::zero(p.space().clone());
    for j in p.indices() {
        m.add_assign(&projection(p.x(j).expect("support index"), f, 0)?);
    }
    let f0 = sm.shift_compose(0)?;
    let mut resid = &m + &g;
    resid.sub_assign(&g_shifted);
    let identity_residual = f0.max_abs_diff(&resid);

    let (lo, hi) = p.window();
    let mut mds: f64 = 0.0;
    let mut adapted: f64 = 0.0;
    let mut checked = 0;
    for i in (lo - hi)..=(hi - lo) {
        let Ok(mi) = p.shift(&m, i, ZERO_TOL) else {
            continue;
        };
        checked += 1;
        mds = mds.max(lp_norm(&f.cond_expect(&mi, i - 1)?, 1.0)?);
        adapted = adapted.max(mi.max_abs_diff(&f.cond_expect(&mi, i)?));
    }

    Ok(StationaryDecomposition {
        m,
        g,
        g_shifted,
        report: StationaryReport {
            identity_residual,
            shift_residual,
            mds_l1: mds,
            adapted_residual: adapted,
            shifts_checked: checked,
            exact: r.exact(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L2Criterion {
    /// Term `n` (from 1) is `‖Σ_{j≥n} P_0(f∘T^j)‖² + ‖Σ_{j≥n} P_0(f∘T^{-j})‖²`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// The window holds every nonzero `P_0(f∘T^{±j})`.
    pub exact: bool,
}

/// Partial sums of the `L²` series criterion for `n = 1..=n_max`, with
/// `P_0 = E(·|F_0) - E(·|F_{-1})`.
pub fn l2_series_criterion(sm: &StationaryShiftModel, n_max: usize) -> Result<L2Criterion> {
    let p = sm.process();
    let f = p.filtration();
    let Some((s_lo, s_hi)) = p.support() else {
        return Err(domain("stationary model has no defined shifts"));
    };
    let p0 = |j: i64| -> Result<RandomVariable> {
        match p.x(j) {
            Some(x) => projection(x, f, 0),
            None => Ok(RandomVariable::zero(p.space().clone())),
        }
    };
    // suffix[n] = Σ_{j ≥ n} P_0(f∘T^{±j}) over the defined shifts.
    let suffix = |sign: i64| -> Result<Vec<RandomVariable>> {
        let reach = if sign > 0 {
            s_hi.max(0)
        } else {
            (-s_lo).max(0)
        } as usize;
        let len = reach.max(n_max) + 2;
        let mut out = vec![RandomVariable::zero(p.space().clone()); len];
        for n in (0..len - 1).rev() {
            let mut s = out[n + 1].clone();
            s.add_assign(&p0(sign * n as i64)?);
            out[n] = s;
        }
        Ok(out)
    };
    let fwd = suffix(1)?;
    let back = suffix(-1)?;
    let sq = |x: &RandomVariable| lp_norm(x, 2.0).map(|v| v * v);
    let mut terms = Vec::with_capacity(n_max);
    let mut partial_sums = Vec::with_capacity(n_max);
    let mut acc = 0.0;
    for n in 1..=n_max {
        let t = sq(&fwd[n])? + sq(&back[n])?;
        acc += t;
        terms.push(t);
        partial_sums.push(acc);
    }
    // Undefined shifts beyond the support must contribute nothing: for iid
    // innovations P_0 h = 0 when h reads only coordinates ≥ 1 or ≤ -1.
    let exact = p.law().is_iid()
        && match sm.f().span() {
            None => true,
            Some((a, b)) => s_hi + 1 + a >= 1 && s_lo - 1 + b <= -1,
        };
    Ok(L2Criterion {
        terms,
        partial_sums,
        exact,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GordinSeries {
    /// Entry `n` is `Σ_{i=0}^{n} ‖E(X_i | F_0)‖_p`.
    pub forward: Vec<f64>,
    /// Entry `n` is `Σ_{i=1}^{n} ‖X_{-i} - E(X_{-i} | F_0)‖_p` (entry 0 is 0).
    pub backward: Vec<f64>,
}

/// Partial sums of the two Gordin series up to `i_max`; undefined `X_i`
/// count as zero.
pub fn gordin_criterion(p: &ExactProcess, exponent: f64, i_max: usize) -> Result<GordinSeries> {
    let f = p.filtration();
    let mut forward = Vec::with_capacity(i_max + 1);
    let mut backward = Vec::with_capacity(i_max + 1);
    let (mut fa, mut ba) = (0.0, 0.0);
    for i in 0..=i_max as i64 {
        if let Some(x) = p.x(i) {
            fa += lp_norm(&f.cond_expect(x, 0)?, exponent)?;
        }
        if i >= 1 {
            if let Some(x) = p.x(-i) {
                ba += lp_norm(&(x - &f.cond_expect(x, 0)?), exponent)?;
            }
        }
        forward.push(fa);
        backward.push(ba);
    }
    Ok(GordinSeries { forward, backward })
}
