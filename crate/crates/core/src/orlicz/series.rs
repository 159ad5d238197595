//! Scalar series of the counterexample: the normalizing constant, the
//! divergent exponential moments of `X_n` and the finite one of `X`.

use serde::Serialize;

use super::{k_weight, CounterexampleLayout};
use crate::error::{domain, Error, Result};

/// Largest `k` the divergence search will reach.
pub const DEFAULT_SEARCH_CAP: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KSeries {
    /// `S = Σ_{k≥2} e^{-k}/(k ln²k)`, summed up to `terms_to`.
    pub s: f64,
    pub terms_to: u32,
    /// Geometric bound on the omitted tail.
    pub tail_bound: f64,
    /// `1/(2S)`.
    pub c: f64,
}

/// `S` summed until the tail bound `e^{-(K+1)}/(1-e^{-1})` is below `tol`.
/// The bound holds because `k ln²k ≥ 1` for `k ≥ 3`.
pub fn compute_c(tol: f64) -> Result<KSeries> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let bound = |k: u32| (-f64::from(k + 1)).exp() / (1.0 - (-1.0f64).exp());
    let mut k = 2;
    let mut s = k_weight(2);
    while k < 3 || bound(k) >= tol {
        k += 1;
        s += k_weight(k);
        if k > 1000 {
            break;
        }
    }
    Ok(KSeries {
        s,
        terms_to: k,
        tail_bound: bound(k),
        c: 0.5 / s,
    })
}

/// `Σ_{k=2}^{K} e^{-k}/(k ln²k)`.
pub fn k_series_sum(k_max: u32) -> f64 {
    (2..=k_max).map(k_weight).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceCertificate {
    pub n: u32,
    pub lambda: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub k_star: u64,
    pub partial_sum: f64,
}

/// Smallest `k*` with `2c Σ_{m=n}^{N_max} 2^{-m} Σ_{k=2}^{k*} e^{k(λ-1)}/(k ln²k) > M`.
///
/// The `m`-sum stops at the layout's `N_max`, so the partial sum is a lower
/// bound for `E e^{λ|X_n|}` on the infinite construction.
pub fn verify_divergence(
    layout: &CounterexampleLayout,
    n: u32,
    lambda: f64,
    m: f64,
) -> Result<DivergenceCertificate> {
    verify_divergence_with_cap(layout, n, lambda, m, DEFAULT_SEARCH_CAP)
}

pub fn verify_divergence_with_cap(
    layout: &CounterexampleLayout,
    n: u32,
    lambda: f64,
    m: f64,
    cap: u64,
) -> Result<DivergenceCertificate> {
    if !(lambda > 1.0) {
        return Err(domain(format!(
            "λ = {lambda}: the series converges for λ ≤ 1, use the integrability check"
        )));
    }
    if !(m > 0.0) {
        return Err(domain(format!("M must be positive, got {m}")));
    }
    if n < 1 || n > layout.n_max {
        return Err(domain(format!("n = {n} outside 1..={}", layout.n_max)));
    }
    let m_factor = 0.5f64.powi(n as i32 - 1) - 0.5f64.powi(layout.n_max as i32);
    let scale = 2.0 * layout.c * m_factor;
    let mut acc = 0.0;
    for k in 2..=cap.max(2) {
        let kf = k as f64;
        let l = kf.ln();
        acc += (kf * (lambda - 1.0)).exp() / (kf * l * l);
        let partial = scale * acc;
        if partial > m {
            return Ok(DivergenceCertificate {
                n,
                lambda,
                m,
                k_star: k,
                partial_sum: partial,
            });
        }
    }
    Err(Error::SearchCap {
        cap,
        context: format!("divergence search for n = {n}, λ = {lambda}, M = {m}"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpAbsMoment {
    /// Midpoint of the certified bracket for `E e^{|X|}` on the infinite
    /// construction.
    pub value: f64,
    pub half_width: f64,
    pub terms: u64,
}

/// `E e^{|X|} = 2c Σ_{k≥2} 1/(k ln²k)`. The tail beyond `K` is bracketed
/// with the integral bounds for the convex decreasing `f(x) = 1/(x ln²x)`:
/// `1/ln(K+1) + f(K+1)/2 ≤ Σ_{k>K} f(k) ≤ 1/ln(K+1/2)`.
pub fn exp_abs_moment(layout: &CounterexampleLayout, tol: f64) -> Result<ExpAbsMoment> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let f = |x: f64| 1.0 / (x * x.ln().powi(2));
    let scale = 2.0 * layout.c;
    // Relative error of c from truncating S.
    let c_rel = layout.c_series_error / (0.5 / layout.c);
    let mut head = 0.0;
    let mut k: u64 = 1;
    loop {
        k += 1;
        head += f(k as f64);
        let kf = k as f64;
        let lo = head + 1.0 / (kf + 1.0).ln() + f(kf + 1.0) / 2.0;
        let hi = head + 1.0 / (kf + 0.5).ln();
        let half = scale * (hi - lo) / 2.0 + scale * hi * c_rel;
        if half <= tol || k >= DEFAULT_SEARCH_CAP {
            if half > tol {
                return Err(Error::SearchCap {
                    cap: DEFAULT_SEARCH_CAP,
                    context: format!("E e^|X| to tolerance {tol}"),
                });
            }
            return Ok(ExpAbsMoment {
                value: scale * (lo + hi) / 2.0,
                half_width: half,
                terms: k - 1,
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrliczLowerBound {
    pub n: u32,
    /// Largest tested scale `c` for which `E e^{|X_n|/c} > 2` is certified.
    pub bound: f64,
    pub grid_step: f64,
    pub certificate: Option<DivergenceCertificate>,
    pub exp_abs_moment: ExpAbsMoment,
}

/// Tests `c = 1 - step, 1 - 2·step, …` and returns the first `c` with a
/// divergence certificate at `λ = 1/c`, `M = 2`; `‖X_n‖_ψ ≥ c` then follows
/// since `E e^{|X_n|/c}` is decreasing in `c`.
pub fn orlicz_norm_lower_bound(
    layout: &CounterexampleLayout,
    n: u32,
    grid_step: f64,
) -> Result<OrliczLowerBound> {
    if !(grid_step > 0.0 && grid_step < 1.0) {
        return Err(domain(format!(
            "grid step must lie in (0, 1), got {grid_step}"
        )));
    }
    let exp_abs_moment = exp_abs_moment(layout, 1e-10)?;
    let mut j = 1u32;
    loop {
        let c = 1.0 - grid_step * f64::from(j);
        if c <= 0.0 {
            return Ok(OrliczLowerBound {
                n,
                bound: 0.0,
                grid_step,
                certificate: None,
                exp_abs_moment,
            });
        }
        match verify_divergence(layout, n, 1.0 / c, 2.0) {
            Ok(cert) => {
                return Ok(OrliczLowerBound {
                    n,
                    bound: c,
                    grid_step,
                    certificate: Some(cert),
                    exp_abs_moment,
                })
            }
            Err(Error::SearchCap { .. }) => j += 1,
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::build_counterexample;

    #[test]
    fn c_normalizes_the_layout() {
        let s = compute_c(1e-16).unwrap();
        let direct: f64 = (2..200u32)
            .map(|k| {
                let k = f64::from(k);
                1.0 / (k.exp() * k * k.ln() * k.ln())
            })
            .sum();
        assert!((s.s - direct).abs() <= 1e-15);
        assert!((2.0 * s.c * direct - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn divergence_search_properties() {
        let l = build_counterexample(50, 20, 1e-16).unwrap();
        let a = verify_divergence(&l, 1, 1.1, 2.0).unwrap();
        assert!(a.partial_sum > 2.0);
        let b = verify_divergence(&l, 1, 1.1, 10.0).unwrap();
        assert!(b.k_star >= a.k_star);
        let slow = verify_divergence(&l, 3, 1.1, 10.0).unwrap();
        let fast = verify_divergence(&l, 3, 1.5, 10.0).unwrap();
        assert!(fast.k_star < slow.k_star);
        assert!(verify_divergence(&l, 1, 1.0, 2.0).is_err());
        assert!(matches!(
            verify_divergence_with_cap(&l, 5, 1.01, 2.0, 10),
            Err(Error::SearchCap { cap: 10, .. })
        ));
    }

    #[test]
    fn exp_moment_matches_long_direct_sum() {
        let l = build_counterexample(50, 20, 1e-16).unwrap();
        let e = exp_abs_moment(&l, 1e-9).unwrap();
        assert!(e.half_width <= 1e-9 && e.value.is_finite());
        // Independent estimate: a million terms plus the midpoint tail integral.
        let big = 1_000_000u32;
        let head: f64 = (2..=big)
            .map(|k| {
                let k = f64::from(k);
                1.0 / (k * k.ln() * k.ln())
            })
            .sum();
        let oracle = 2.0 * l.c * (head + 1.0 / (f64::from(big) + 0.5).ln());
        assert!((e.value - oracle).abs() <= 1e-7, "{} vs {oracle}", e.value);
    }

    #[test]
    fn lower_bound_reaches_grid_top() {
        let l = build_counterexample(50, 20, 1e-16).unwrap();
        for n in 1..=3 {
            let b = orlicz_norm_lower_bound(&l, n, 0.01).unwrap();
            assert!((b.bound - 0.99).abs() < 1e-12);
            assert!(b.certificate.unwrap().partial_sum > 2.0);
        }
    }
}
