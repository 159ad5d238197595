use super::RandomVariable;
use crate::error::{domain, Result};

/// A norm on random variables that depends only on their distribution.
pub trait Norm {
    fn norm(&self, x: &RandomVariable) -> Result<f64>;
}

/// `L^p` norm; `p = f64::INFINITY` selects the essential supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpNorm(pub f64);

impl Norm for LpNorm {
    fn norm(&self, x: &RandomVariable) -> Result<f64> {
        lp_norm(x, self.0)
    }
}

/// Orlicz norm for `ψ(x) = e^{|x|} - 1`, computed to within `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrliczNorm {
    pub tol: f64,
}

impl Norm for OrliczNorm {
    fn norm(&self, x: &RandomVariable) -> Result<f64> {
        orlicz_norm(x, self.tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YoungFunction {
    /// `ψ(x) = e^{|x|} - 1`
    #[default]
    ExpMinusOne,
}

impl YoungFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            YoungFunction::ExpMinusOne => x.abs().exp_m1(),
        }
    }
}

fn weighted(x: &RandomVariable) -> impl Iterator<Item = (f64, f64)> + '_ {
    x.space()
        .weights()
        .iter()
        .zip(x.values())
        .filter(|(w, _)| **w > 0.0)
        .map(|(&w, &v)| (w, v))
}

/// `(Σ w_a |X_a|^p)^{1/p}`, or the largest `|X_a|` on non-null atoms when
/// `p` is infinite.
pub fn lp_norm(x: &RandomVariable, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(weighted(x).fold(0.0, |m, (_, v)| m.max(v.abs())));
    }
    if p == 1.0 {
        return Ok(weighted(x).map(|(w, v)| w * v.abs()).sum());
    }
    if p == 2.0 {
        return Ok(weighted(x).map(|(w, v)| w * v * v).sum::<f64>().sqrt());
    }
    let s: f64 = weighted(x).map(|(w, v)| w * v.abs().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// `inf { c > 0 : E e^{|X|/c} < 2 }` by bisection on `c`.
///
/// `c ↦ E e^{|X|/c}` is strictly decreasing unless `X = 0` a.s., and the
/// bracket's upper end `max(1, ‖X‖_∞ / ln 2)` always satisfies `E ≤ 2`.
pub fn orlicz_norm(x: &RandomVariable, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(domain(format!(
            "Orlicz tolerance must be positive, got {tol}"
        )));
    }
    let sup = lp_norm(x, f64::INFINITY)?;
    if sup == 0.0 {
        return Ok(0.0);
    }
    let moment = |c: f64| -> f64 { weighted(x).map(|(w, v)| w * (v.abs() / c).exp()).sum() };
    let mut lo = tol;
    let mut hi = f64::max(1.0, sup / std::f64::consts::LN_2);
    if moment(lo) < 2.0 {
        return Ok(lo);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if moment(mid) < 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
