use rayon::prelude::*;
use serde::Serialize;

use super::{compute_u, default_i_max, DecompositionResult};
use crate::error::Result;
use crate::measure::{lp_norm, projection, RandomVariable};
use crate::process::ExactProcess;

/// Residuals of the identities a decomposition must satisfy. Every field
/// is a maximum over the decomposed range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationReport {
    /// `|X_k - Y_k - U_k + U_{k+1}|` atomwise.
    pub eq1_residual: f64,
    /// `|U_k - (V_k - W_k)|` atomwise.
    pub u_identity_residual: f64,
    /// `‖E(Y_k | F_{k-1})‖₁`.
    pub mds_l1: f64,
    /// `|Y_k - E(Y_k | F_k)|` atomwise.
    pub adapted_residual: f64,
    /// `|Y_k - Σ_j P_k X_j|` atomwise.
    pub part_b_residual: f64,
    /// `|P_i U_k - g_{k,i}|` atomwise, over every filtration index `i`.
    pub projection_residual: f64,
    pub exact: bool,
}

impl VerificationReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.eq1_residual,
            self.u_identity_residual,
            self.mds_l1,
            self.adapted_residual,
            self.part_b_residual,
            self.projection_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

fn sum_of(p: &ExactProcess, terms: impl Iterator<Item = RandomVariable>) -> RandomVariable {
    terms.fold(RandomVariable::zero(p.space().clone()), |mut acc, t| {
        acc.add_assign(&t);
        acc
    })
}

pub fn verify_decomposition(
    r: &DecompositionResult,
    p: &ExactProcess,
) -> Result<VerificationReport> {
    let f = p.filtration();
    let mut eq1: f64 = 0.0;
    let mut u_id: f64 = 0.0;
    let mut mds: f64 = 0.0;
    let mut adapted: f64 = 0.0;
    let mut part_b: f64 = 0.0;
    let support: Vec<i64> = p.indices().collect();
    for e in &r.entries {
        let u_next = r.u(e.k + 1).expect("decomposition holds U_{k+1}");
        let mut rhs = &e.y + &e.u;
        rhs.sub_assign(u_next);
        eq1 = eq1.max(p.x_or_zero(e.k).max_abs_diff(&rhs));
        u_id = u_id.max(e.u.max_abs_diff(&(&e.v - &e.w)));
        mds = mds.max(lp_norm(&f.cond_expect(&e.y, e.k - 1)?, 1.0)?);
        adapted = adapted.max(e.y.max_abs_diff(&f.cond_expect(&e.y, e.k)?));
        let increments = support
            .iter()
            .map(|&j| projection(p.x(j).expect("support index"), f, e.k))
            .collect::<Result<Vec<_>>>()?;
        part_b = part_b.max(e.y.max_abs_diff(&sum_of(p, increments.into_iter())));
    }

    // P_i U_k against g_{k,i} = Σ_{j≥k} P_i X_j (i < k) or -Σ_{j<k} P_i X_j (i ≥ k).
    let projection_residual = (f.k_min()..=f.k_max())
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let pix = support
                .iter()
                .map(|&j| Ok((j, projection(p.x(j).expect("support index"), f, i)?)))
                .collect::<Result<Vec<_>>>()?;
            let mut worst: f64 = 0.0;
            for e in &r.entries {
                let g = if i < e.k {
                    sum_of(
                        p,
                        pix.iter()
                            .filter(|(j, _)| *j >= e.k)
                            .map(|(_, x)| x.clone()),
                    )
                } else {
                    sum_of(
                        p,
                        pix.iter().filter(|(j, _)| *j < e.k).map(|(_, x)| x.clone()),
                    )
                    .scale(-1.0)
                };
                worst = worst.max(projection(&e.u, f, i)?.max_abs_diff(&g));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    Ok(VerificationReport {
        eq1_residual: eq1,
        u_identity_residual: u_id,
        mds_l1: mds,
        adapted_residual: adapted,
        part_b_residual: part_b,
        projection_residual,
        exact: r.exact(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionTwoRow {
    pub j: i64,
    /// `‖E(U_{k+j} | F_k)‖₁`
    pub forward_l1: f64,
    /// `‖U_{k-j} - E(U_{k-j} | F_k)‖₁`
    pub backward_l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionTwoReport {
    pub k: i64,
    pub rows: Vec<ConditionTwoRow>,
    pub forward_monotone: bool,
    pub backward_monotone: bool,
}

impl ConditionTwoReport {
    /// Smallest `j0` such that both columns vanish (to `tol`) for every
    /// reported `j ≥ j0`.
    pub fn vanishing_from(&self, tol: f64) -> Option<i64> {
        let mut from = None;
        for row in self.rows.iter().rev() {
            if row.forward_l1 <= tol && row.backward_l1 <= tol {
                from = Some(row.j);
            } else {
                break;
            }
        }
        from
    }
}

/// Both decay columns of the tail condition on `U` at a fixed `k`, for
/// `j = 0..=j_max`. `U` values outside the decomposed range are computed
/// with an exact truncation.
pub fn check_condition_2(
    r: &DecompositionResult,
    p: &ExactProcess,
    k: i64,
    j_max: usize,
) -> Result<ConditionTwoReport> {
    let f = p.filtration();
    let u_at = |idx: i64| -> Result<RandomVariable> {
        match r.u(idx) {
            Some(u) => Ok(u.clone()),
            None => Ok(compute_u(p, idx, default_i_max(p, idx, idx))?.0),
        }
    };
    let rows = (0..=j_max as i64)
        .map(|j| {
            let fwd = f.cond_expect(&u_at(k + j)?, k)?;
            let back = u_at(k - j)?;
            let back_resid = &back - &f.cond_expect(&back, k)?;
            Ok(ConditionTwoRow {
                j,
                forward_l1: lp_norm(&fwd, 1.0)?,
                backward_l1: lp_norm(&back_resid, 1.0)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = |col: fn(&ConditionTwoRow) -> f64| {
        rows.windows(2).all(|w| col(&w[1]) <= col(&w[0]) + 1e-15)
    };
    Ok(ConditionTwoReport {
        k,
        forward_monotone: monotone(|r| r.forward_l1),
        backward_monotone: monotone(|r| r.backward_l1),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::decompose;
    use crate::process::{presets, CoordinateLaw, ExactProcessModel, FunctionalPattern};

    fn build(pattern: FunctionalPattern) -> ExactProcess {
        ExactProcessModel::new((-4, 4), CoordinateLaw::rademacher(), pattern)
            .build()
            .unwrap()
    }

    #[test]
    fn ma1_verifies() {
        let p = build(presets::ma1(0.5));
        let r = decompose(&p, -2, 2, None).unwrap();
        let rep = verify_decomposition(&r, &p).unwrap();
        assert!(rep.passes(1e-12), "{rep:?}");
        assert!(rep.exact);
    }

    #[test]
    fn coboundary_verifies_with_zero_martingale() {
        let p = build(presets::coboundary());
        let r = decompose(&p, -2, 2, None).unwrap();
        let rep = verify_decomposition(&r, &p).unwrap();
        assert!(rep.passes(1e-12), "{rep:?}");
        assert_eq!(rep.mds_l1, 0.0);
    }

    #[test]
    fn truncated_series_show_up_in_residuals() {
        let p = build(presets::coboundary());
        let r = decompose(&p, -2, 2, Some(0)).unwrap();
        assert!(!r.exact());
        let rep = verify_decomposition(&r, &p).unwrap();
        assert!(rep.mds_l1 > 0.1 || rep.part_b_residual > 0.1 || rep.projection_residual > 0.1);
    }

    #[test]
    fn condition_two_examples() {
        let p = build(presets::ma1(0.5));
        let r = decompose(&p, -2, 2, None).unwrap();
        let c = check_condition_2(&r, &p, 0, 3).unwrap();
        assert!(c.rows[1].forward_l1 > 0.4);
        for row in &c.rows[2..] {
            assert_eq!(row.forward_l1, 0.0);
        }
        assert!(c.rows.iter().all(|r| r.backward_l1 == 0.0));

        let p = build(presets::coboundary());
        let r = decompose(&p, -2, 2, None).unwrap();
        let c = check_condition_2(&r, &p, 0, 3).unwrap();
        assert!(c.rows.iter().all(|r| r.backward_l1 == 0.0));
        assert_eq!(c.vanishing_from(0.0), Some(1));

        let p = build(presets::martingale());
        let r = decompose(&p, -2, 2, None).unwrap();
        let c = check_condition_2(&r, &p, 0, 3).unwrap();
        assert_eq!(c.vanishing_from(0.0), Some(0));
    }
}
