use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.576;

pub fn normal_ci_half_width(p_hat: f64, replicas: u64) -> f64 {
    Z_99 * (p_hat * (1.0 - p_hat) / replicas as f64).sqrt()
}

/// Nearest-rank `q`-quantile of an ascending sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// `sup_t |F_emp(t) - Φ(t)|` for an ascending sample; ties are handled
/// by evaluating the empirical CDF on both sides of each distinct value.
pub fn ks_statistic(sorted: &[f64]) -> f64 {
    let normal = Normal::standard();
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let phi = normal.cdf(v);
        d = d.max(j as f64 / n - phi).max(phi - i as f64 / n);
        i = j;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_ks() {
        let s = [-1.0, -1.0, 1.0, 1.0];
        let want = 0.841_344_746_068_542_9 - 0.5;
        let got = ks_statistic(&s);
        assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
    }

    #[test]
    fn quantile_ranks() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&s, 0.99), 99.0);
        assert_eq!(quantile(&s, 1.0), 100.0);
        assert_eq!(quantile(&s, 0.0), 1.0);
    }
}
