//! Large-deviation bounds against simulated tails, and the diagnostics that
//! transfer limit theorems between `X` and its martingale part `Y`.
//!
//! Every Monte Carlo statistic draws replica `r` from the stream
//! `(seed, r)` and aggregates in replica order, so results do not depend on
//! the thread count.

mod diagnostics;
mod path;
mod stats;

use serde::Serialize;

use crate::error::{domain, Result};

pub use diagnostics::{
    clt_ks, condition_7, empirical_tail, empirical_tails, ip_max_discrepancy, lil_normalized_max,
    limit_diagnostics, poly_tail_slope, sigmas, tightness_probe, Condition7Report, Condition7Row,
    IpMaxReport, KsReport, LilReport, LimitDiagnostics, LimitRow, PolyTailSlope, Sigmas,
    TightnessReport, TightnessRow, DEGENERACY_TOL, MIN_TAIL_REPLICAS,
};
pub use path::{ExtractionReport, PathModel, PathSample, Symbols, Term, PERIODICITY_TOL};
pub use stats::{ks_statistic, normal_ci_half_width, quantile, Z_99};

/// `μ(|S_n| > xn)` estimated from `replicas` paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub n: usize,
    pub x: f64,
    pub p_hat: f64,
    /// 99% normal-approximation half-width.
    pub ci_half_width: f64,
    pub replicas: u64,
    pub seed: u64,
}

/// Azuma-type bound `exp(-n(x - b/n)²/(2a²))` for `‖Y‖_∞ ≤ a`, `‖U‖_∞ ≤ b`.
pub fn azuma_bound(n: usize, x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b >= 0.0) || n == 0 {
        return Err(domain(format!(
            "need a > 0, b ≥ 0, n ≥ 1 (a = {a}, b = {b}, n = {n})"
        )));
    }
    let nf = n as f64;
    let shift = x - b / nf;
    if !(shift > 0.0) {
        return Err(domain(format!(
            "x = {x} ≤ b/n = {}: the bound is vacuous",
            b / nf
        )));
    }
    Ok((-nf * shift * shift / (2.0 * a * a)).exp())
}

/// Subexponential bound `exp(-½(1-ε)λ^{2/3}x^{2/3}n^{1/3})`. It holds only
/// for `n` beyond an unspecified threshold depending on `ε`.
pub fn subexp_bound(n: usize, x: f64, lambda: f64, eps: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(x > 0.0) || !(0.0..1.0).contains(&eps) || n == 0 {
        return Err(domain(format!(
            "need λ > 0, x > 0, 0 ≤ ε < 1, n ≥ 1 (λ = {lambda}, x = {x}, ε = {eps}, n = {n})"
        )));
    }
    let e = -0.5 * (1.0 - eps) * (lambda * x).powf(2.0 / 3.0) * (n as f64).cbrt();
    Ok(e.exp())
}

/// `ln ln n`, evaluated at `max(n, 3)`.
pub fn loglog(n: usize) -> f64 {
    (n.max(3) as f64).ln().ln()
}
