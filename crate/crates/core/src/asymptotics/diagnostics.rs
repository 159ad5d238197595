use rayon::prelude::*;
use serde::Serialize;

use super::path::{PathModel, Term};
use super::stats::{ks_statistic, normal_ci_half_width, quantile};
use super::{loglog, TailEstimate};
use crate::error::{domain, invalid, Result};

/// Smallest replica count accepted for tail estimates.
pub const MIN_TAIL_REPLICAS: u64 = 1000;

/// Second moments at or below this (per step for `σ_n²`) count as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

fn per_replica<T: Send>(replicas: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..replicas).into_par_iter().map(f).collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    Ok(())
}

/// Tail estimates at several thresholds from one set of paths.
pub fn empirical_tails(
    model: &PathModel,
    n: usize,
    xs: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<Vec<TailEstimate>> {
    check_n(n)?;
    if replicas < MIN_TAIL_REPLICAS {
        return Err(domain(format!(
            "tail estimates need at least {MIN_TAIL_REPLICAS} replicas, got {replicas}"
        )));
    }
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(domain(format!("threshold x must be positive, got {x}")));
    }
    let sums = per_replica(replicas, |r| model.partial_sum(n, seed, r).abs());
    Ok(xs
        .iter()
        .map(|&x| {
            let level = x * n as f64;
            let hits = sums.iter().filter(|s| **s > level).count();
            let p_hat = hits as f64 / replicas as f64;
            TailEstimate {
                n,
                x,
                p_hat,
                ci_half_width: normal_ci_half_width(p_hat, replicas),
                replicas,
                seed,
            }
        })
        .collect())
}

pub fn empirical_tail(
    model: &PathModel,
    n: usize,
    x: f64,
    replicas: u64,
    seed: u64,
) -> Result<TailEstimate> {
    Ok(empirical_tails(model, n, &[x], replicas, seed)?[0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyTailSlope {
    pub x: f64,
    pub points: Vec<TailEstimate>,
    /// Values of `n` whose estimate was zero and left out of the fit.
    pub dropped: Vec<usize>,
    /// Least-squares slope of `ln p_hat` against `ln n`.
    pub slope: Option<f64>,
    /// Fewer than two nonzero estimates remained.
    pub inconclusive: bool,
}

pub fn poly_tail_slope(
    model: &PathModel,
    x: f64,
    n_list: &[usize],
    replicas: u64,
    seed: u64,
) -> Result<PolyTailSlope> {
    if n_list.len() < 3 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain(
            "n_list must be strictly increasing with at least 3 entries",
        ));
    }
    let points = n_list
        .iter()
        .map(|&n| empirical_tail(model, n, x, replicas, seed))
        .collect::<Result<Vec<_>>>()?;
    let (kept, dropped): (Vec<&TailEstimate>, Vec<&TailEstimate>) =
        points.iter().partition(|p| p.p_hat > 0.0);
    let slope = (kept.len() >= 2).then(|| {
        let xs: Vec<f64> = kept.iter().map(|p| (p.n as f64).ln()).collect();
        let ys: Vec<f64> = kept.iter().map(|p| p.p_hat.ln()).collect();
        let (mx, my) = (mean(&xs), mean(&ys));
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
        sxy / sxx
    });
    Ok(PolyTailSlope {
        x,
        dropped: dropped.iter().map(|p| p.n).collect(),
        inconclusive: slope.is_none(),
        slope,
        points,
    })
}

/// `σ_n² = E(Σ Y_i)²` and `σ̄_n² = E(Σ X_i)²` over `i = 1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sigmas {
    pub n: usize,
    pub sigma_sq: f64,
    pub sigma_bar_sq: f64,
    /// Computed by enumeration rather than estimated from replicas.
    pub exact: bool,
}

impl Sigmas {
    pub fn degenerate(&self) -> bool {
        self.sigma_sq <= DEGENERACY_TOL * self.n as f64 || self.sigma_bar_sq <= DEGENERACY_TOL
    }
}

/// Exact for iid laws; otherwise estimated from the replicas.
pub fn sigmas(model: &PathModel, n: usize, replicas: u64, seed: u64) -> Result<Sigmas> {
    check_n(n)?;
    if model.moments_exact() {
        return Ok(Sigmas {
            n,
            sigma_sq: model.second_moment_of_sum(n, |i| model.y_terms(i))?,
            sigma_bar_sq: model.second_moment_of_sum(n, |i| model.x_terms(i))?,
            exact: true,
        });
    }
    if replicas == 0 {
        return Err(domain("estimated moments need at least one replica"));
    }
    let pairs = per_replica(replicas, |r| {
        let p = model.sample(n, seed, r);
        let sx: f64 = p.x.iter().sum();
        let sy: f64 = p.y().iter().sum();
        (sx * sx, sy * sy)
    });
    Ok(Sigmas {
        n,
        sigma_sq: pairs.iter().map(|p| p.1).sum::<f64>() / replicas as f64,
        sigma_bar_sq: pairs.iter().map(|p| p.0).sum::<f64>() / replicas as f64,
        exact: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub n: usize,
    pub sigma_n_sq: f64,
    pub sigma_bar_n_sq: f64,
    /// `σ_n/σ̄_n`.
    pub ratio: f64,
    /// `(1/√n)‖Σ_{i=1}^n (X_i - Y_i)‖₂ = (1/√n)‖U_1 - U_{n+1}‖₂`.
    pub g1: f64,
    /// `‖U_n‖₂/√n`.
    pub cond5: f64,
    /// `(1/n) Σ_{i≤n} E[U_i² ; |U_i| > ε√n]`.
    pub cond6: f64,
    /// Kolmogorov–Smirnov distance of `S_n/σ̄_n` from `N(0,1)`; absent when
    /// the normalization is degenerate.
    pub ks: Option<f64>,
    pub moments_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitDiagnostics {
    pub epsilon: f64,
    pub replicas: u64,
    pub seed: u64,
    pub rows: Vec<LimitRow>,
    /// `min_n σ_n²/n` over the rows.
    pub cond4_min_rate: f64,
    pub cond4_holds: bool,
    /// `n·|σ_n/σ̄_n - 1|` per row.
    pub ratio_constants: Vec<f64>,
}

fn cond6_exact(model: &PathModel, n: usize, eps: f64) -> f64 {
    let level = eps * (n as f64).sqrt();
    let period = model.period() as i64;
    let per_phase: Vec<f64> = (1..=period)
        .map(|i| {
            model
                .u_distribution(i)
                .iter()
                .filter(|(v, _)| v.abs() > level)
                .map(|(v, m)| m * v * v)
                .fold(0.0, |a, b| a + b)
        })
        .collect();
    let total: f64 = (1..=n as i64)
        .map(|i| per_phase[((i - 1).rem_euclid(period)) as usize])
        .sum();
    total / n as f64
}

fn limit_row(model: &PathModel, n: usize, replicas: u64, seed: u64, eps: f64) -> Result<LimitRow> {
    let nf = n as f64;
    let s = sigmas(model, n, replicas, seed)?;
    let (g1_sq, u_n_sq) = if model.moments_exact() {
        let mut diff: Vec<Term<'_>> = model.u_terms(1);
        diff.extend(
            model
                .u_terms(n as i64 + 1)
                .into_iter()
                .map(|t| Term { coef: -1.0, ..t }),
        );
        (
            model.local_expectation(&[diff], |v| v[0] * v[0])?,
            model.local_expectation(&[model.u_terms(n as i64)], |v| v[0] * v[0])?,
        )
    } else {
        let pairs = per_replica(replicas, |r| {
            let p = model.sample(n, seed, r);
            let d = p.u[0] - p.u[n];
            (d * d, p.u[n - 1] * p.u[n - 1])
        });
        (
            pairs.iter().map(|p| p.0).sum::<f64>() / replicas as f64,
            pairs.iter().map(|p| p.1).sum::<f64>() / replicas as f64,
        )
    };
    let ks = if s.degenerate() || replicas == 0 {
        None
    } else {
        let sb = s.sigma_bar_sq.sqrt();
        let z = sorted(per_replica(replicas, |r| {
            model.partial_sum(n, seed, r) / sb
        }));
        Some(ks_statistic(&z))
    };
    Ok(LimitRow {
        n,
        sigma_n_sq: s.sigma_sq,
        sigma_bar_n_sq: s.sigma_bar_sq,
        ratio: (s.sigma_sq / s.sigma_bar_sq).sqrt(),
        g1: (g1_sq / nf).sqrt(),
        cond5: (u_n_sq / nf).sqrt(),
        cond6: cond6_exact(model, n, eps),
        ks,
        moments_exact: s.exact,
    })
}

/// Variances, `g1`, the variance-growth and negligibility conditions, the ratio `σ_n/σ̄_n` and the KS
/// distance for every `n` in `n_list`. With `replicas = 0` the Monte Carlo
/// part is skipped (iid laws only).
pub fn limit_diagnostics(
    model: &PathModel,
    n_list: &[usize],
    replicas: u64,
    seed: u64,
    eps: f64,
) -> Result<LimitDiagnostics> {
    if !(eps > 0.0) {
        return Err(domain(format!("ε must be positive, got {eps}")));
    }
    if n_list.is_empty() {
        return Err(domain("n_list is empty"));
    }
    if replicas == 0 && !model.moments_exact() {
        return Err(domain("non-iid laws need replicas to estimate moments"));
    }
    let rows = n_list
        .iter()
        .map(|&n| limit_row(model, n, replicas, seed, eps))
        .collect::<Result<Vec<_>>>()?;
    let cond4_min_rate = rows
        .iter()
        .map(|r| r.sigma_n_sq / r.n as f64)
        .fold(f64::INFINITY, f64::min);
    Ok(LimitDiagnostics {
        epsilon: eps,
        replicas,
        seed,
        cond4_holds: cond4_min_rate > DEGENERACY_TOL,
        cond4_min_rate,
        ratio_constants: rows
            .iter()
            .map(|r| r.n as f64 * (r.ratio - 1.0).abs())
            .collect(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsReport {
    pub n: usize,
    pub statistic: f64,
    pub sigma_bar: f64,
    pub replicas: u64,
    pub seed: u64,
}

/// KS distance between the law of `S_n/σ̄_n` over the replicas and `N(0,1)`.
pub fn clt_ks(model: &PathModel, n: usize, replicas: u64, seed: u64) -> Result<KsReport> {
    if replicas == 0 {
        return Err(domain("need at least one replica"));
    }
    let s = sigmas(model, n, replicas, seed)?;
    if s.degenerate() {
        return Err(domain(format!(
            "degenerate normalization at n = {n}: σ_n² = {}, σ̄_n² = {}",
            s.sigma_sq, s.sigma_bar_sq
        )));
    }
    let sb = s.sigma_bar_sq.sqrt();
    let z = sorted(per_replica(replicas, |r| {
        model.partial_sum(n, seed, r) / sb
    }));
    Ok(KsReport {
        n,
        statistic: ks_statistic(&z),
        sigma_bar: sb,
        replicas,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IpMaxReport {
    pub n: usize,
    pub sigma: f64,
    pub sigma_bar: f64,
    /// 99th percentile of `max_k |S_k(X)/σ̄_n - S_k(Y)/σ_n|`.
    pub p99: f64,
    pub mean: f64,
    pub max: f64,
    /// 99th percentile of the pathwise right side
    /// `max_k [|U_1 - U_{k+1}|/σ̄_n + |σ_n/σ̄_n - 1|·|S_k(Y)|/σ_n]`.
    pub bound_p99: f64,
    /// Replicas where the statistic exceeds its pathwise right side.
    pub bound_violations: u64,
    pub replicas: u64,
    pub seed: u64,
}

pub fn ip_max_discrepancy(
    model: &PathModel,
    n: usize,
    replicas: u64,
    seed: u64,
) -> Result<IpMaxReport> {
    if replicas == 0 {
        return Err(domain("need at least one replica"));
    }
    let s = sigmas(model, n, replicas, seed)?;
    if s.degenerate() {
        return Err(domain(format!("degenerate normalization at n = {n}")));
    }
    let (sigma, sigma_bar) = (s.sigma_sq.sqrt(), s.sigma_bar_sq.sqrt());
    let gap = (sigma / sigma_bar - 1.0).abs();
    let pairs = per_replica(replicas, |r| {
        let p = model.sample(n, seed, r);
        let (mut sx, mut sy) = (0.0, 0.0);
        let (mut lhs, mut rhs): (f64, f64) = (0.0, 0.0);
        for k in 0..n {
            sx += p.x[k];
            sy += p.x[k] - p.u[k] + p.u[k + 1];
            lhs = lhs.max((sx / sigma_bar - sy / sigma).abs());
            rhs = rhs.max((p.u[0] - p.u[k + 1]).abs() / sigma_bar + gap * sy.abs() / sigma);
        }
        (lhs, rhs)
    });
    let violations = pairs
        .iter()
        .filter(|(l, r)| *l > r + 1e-12 * (1.0 + r))
        .count() as u64;
    let lhs = sorted(pairs.iter().map(|p| p.0).collect());
    let rhs = sorted(pairs.iter().map(|p| p.1).collect());
    Ok(IpMaxReport {
        n,
        sigma,
        sigma_bar,
        p99: quantile(&lhs, 0.99),
        mean: mean(&lhs),
        max: *lhs.last().expect("replicas > 0"),
        bound_p99: quantile(&rhs, 0.99),
        bound_violations: violations,
        replicas,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LilReport {
    pub n: usize,
    /// `√(n ln ln n)`.
    pub scale: f64,
    /// 99th percentile of `max_{k≤n} |U_k|/scale`.
    pub p99: f64,
    pub mean: f64,
    pub max: f64,
    /// `sup ‖U‖_∞ / scale`, a deterministic ceiling for the statistic.
    pub sup_bound: f64,
    pub replicas: u64,
    pub seed: u64,
}

pub fn lil_normalized_max(
    model: &PathModel,
    n: usize,
    replicas: u64,
    seed: u64,
) -> Result<LilReport> {
    if n < 3 {
        return Err(domain(format!("ln ln n needs n ≥ 3, got {n}")));
    }
    if replicas == 0 {
        return Err(domain("need at least one replica"));
    }
    let scale = (n as f64 * loglog(n)).sqrt();
    let v = sorted(per_replica(replicas, |r| {
        let s = model.symbols(n, seed, r);
        (1..=n as i64).map(|k| s.u(k).abs()).fold(0.0, f64::max) / scale
    }));
    Ok(LilReport {
        n,
        scale,
        p99: quantile(&v, 0.99),
        mean: mean(&v),
        max: *v.last().expect("replicas > 0"),
        sup_bound: model.u_sup() / scale,
        replicas,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition7Row {
    pub n: usize,
    /// `min_x [μ(|Z| > x/√(n ln ln n)) - μ(|U_n| > x)]`.
    pub worst_margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition7Report {
    pub rows: Vec<Condition7Row>,
    pub holds: bool,
}

/// Checks `μ(|U_n| > x) ≤ μ(|Z| > x/√(n ln ln n))` for all `x > 0` against a
/// discrete `Z` given as `(value, mass)` pairs. Both sides are step
/// functions, so it is enough to compare each constant piece of the left
/// side with the infimum of the right side over that piece.
pub fn condition_7(
    model: &PathModel,
    z: &[(f64, f64)],
    n_list: &[usize],
) -> Result<Condition7Report> {
    let total: f64 = z.iter().map(|p| p.1).sum();
    if z.is_empty()
        || z.iter().any(|p| !(p.1 >= 0.0) || !p.0.is_finite())
        || (total - 1.0).abs() > 1e-12
    {
        return Err(invalid(
            "dominating law",
            "masses must be nonnegative and sum to 1",
        ));
    }
    // μ(|Z| ≥ t)
    let z_at_least = |t: f64| -> f64 { z.iter().filter(|p| p.0.abs() >= t).map(|p| p.1).sum() };
    let rows = n_list
        .iter()
        .map(|&n| {
            check_n(n)?;
            let scale = (n.max(3) as f64 * loglog(n)).sqrt();
            let mut points: Vec<(f64, f64)> = Vec::new();
            for &(v, m) in model.u_distribution(n as i64) {
                let a = v.abs();
                if a > 0.0 && m > 0.0 {
                    match points.iter_mut().find(|p| p.0 == a) {
                        Some(p) => p.1 += m,
                        None => points.push((a, m)),
                    }
                }
            }
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut worst = f64::INFINITY;
            // On [u_{j-1}, u_j) the left side is μ(|U| ≥ u_j); the right side
            // decreases towards μ(|Z| ≥ u_j/scale).
            let mut tail: f64 = points.iter().map(|p| p.1).sum();
            for &(u, m) in &points {
                worst = worst.min(z_at_least(u / scale) - tail);
                tail -= m;
            }
            let worst = if points.is_empty() { 0.0 } else { worst };
            Ok(Condition7Row {
                n,
                worst_margin: worst,
                holds: worst >= -1e-15,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Condition7Report {
        holds: rows.iter().all(|r| r.holds),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TightnessRow {
    pub n: usize,
    pub quantile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub q: f64,
    pub replicas: u64,
    pub seed: u64,
    pub rows: Vec<TightnessRow>,
    /// The quantile at the largest `n` is at most twice the one at the
    /// smallest `n`.
    pub bounded: bool,
}

/// Empirical `q`-quantile of `|S_n|` for each `n`.
pub fn tightness_probe(
    model: &PathModel,
    n_list: &[usize],
    replicas: u64,
    seed: u64,
    q: f64,
) -> Result<TightnessReport> {
    if !(q > 0.0 && q < 1.0) {
        return Err(domain(format!("q must lie in (0, 1), got {q}")));
    }
    if n_list.is_empty() || replicas == 0 {
        return Err(domain("need a nonempty n_list and at least one replica"));
    }
    let rows = n_list
        .iter()
        .map(|&n| {
            check_n(n)?;
            let s = sorted(per_replica(replicas, |r| {
                model.partial_sum(n, seed, r).abs()
            }));
            Ok(TightnessRow {
                n,
                quantile: quantile(&s, q),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = rows.first().expect("nonempty").quantile;
    let last = rows.last().expect("nonempty").quantile;
    Ok(TightnessReport {
        q,
        replicas,
        seed,
        bounded: last <= 2.0 * first + 1e-12,
        rows,
    })
}
