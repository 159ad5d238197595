//! Ready-made functional patterns for the standard test processes, all
//! driven by innovations `ξ_i`.

use super::{Functional, FunctionalPattern};

fn lin(terms: &[(i64, f64)]) -> Functional {
    Functional::linear(terms.iter().copied()).expect("finite coefficients")
}

/// `X_i = ξ_i`.
pub fn martingale() -> FunctionalPattern {
    FunctionalPattern::stationary(lin(&[(0, 1.0)]))
}

/// `X_i = ξ_i + a ξ_{i-1}`.
pub fn ma1(a: f64) -> FunctionalPattern {
    FunctionalPattern::stationary(lin(&[(0, 1.0), (-1, a)]))
}

/// `X_i = ξ_i + a_i ξ_{i-1}` with `a_i = a_even` for even `i` and
/// `a_odd` for odd `i`.
pub fn alternating_ma1(a_even: f64, a_odd: f64) -> FunctionalPattern {
    FunctionalPattern::new(
        0,
        vec![
            lin(&[(0, 1.0), (-1, a_even)]),
            lin(&[(0, 1.0), (-1, a_odd)]),
        ],
    )
    .expect("two entries")
}

/// `X_i = ξ_i - ξ_{i+1}`.
pub fn coboundary() -> FunctionalPattern {
    FunctionalPattern::stationary(lin(&[(0, 1.0), (1, -1.0)]))
}

/// `X_i = 0`.
pub fn zero() -> FunctionalPattern {
    FunctionalPattern::stationary(Functional::Linear(Vec::new()))
}
