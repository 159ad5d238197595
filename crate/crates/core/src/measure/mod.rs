//! Exact probability on finite spaces.
//!
//! A [`ProbabilitySpace`] is a list of atom weights. Random variables are
//! value vectors over those atoms, σ-algebras are [`Partition`]s of the atom
//! set, and a [`Filtration`] is an indexed chain of refining partitions.
//! Everything here is immutable once built.

mod norm;
mod partition;

use std::sync::Arc;

use crate::error::{domain, invalid, Result};

pub use norm::{lp_norm, orlicz_norm, LpNorm, Norm, OrliczNorm, YoungFunction};
pub use partition::{cond_expect, is_measurable, is_refinement, projection, Filtration, Partition};

/// Default absolute tolerance used by checks throughout the crate.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Allowed deviation of the total weight from one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A finite probability space: one non-negative weight per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilitySpace {
    weights: Vec<f64>,
}

impl ProbabilitySpace {
    pub fn new(weights: Vec<f64>) -> Result<Arc<Self>> {
        if weights.is_empty() {
            return Err(invalid("probability space", "no atoms"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(invalid("probability space", format!("bad weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(invalid(
                "probability space",
                format!("weights sum to {total}, expected 1"),
            ));
        }
        Ok(Arc::new(ProbabilitySpace { weights }))
    }

    pub fn uniform(atom_count: usize) -> Result<Arc<Self>> {
        if atom_count == 0 {
            return Err(invalid("probability space", "no atoms"));
        }
        Self::new(vec![1.0 / atom_count as f64; atom_count])
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }
}

/// A real-valued random variable on a finite space.
#[derive(Debug, Clone)]
pub struct RandomVariable {
    space: Arc<ProbabilitySpace>,
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(space: Arc<ProbabilitySpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.atom_count() {
            return Err(invalid(
                "random variable",
                format!(
                    "{} values for a space of {} atoms",
                    values.len(),
                    space.atom_count()
                ),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid("random variable", format!("non-finite value {v}")));
        }
        Ok(RandomVariable { space, values })
    }

    pub fn constant(space: Arc<ProbabilitySpace>, value: f64) -> Self {
        let values = vec![value; space.atom_count()];
        RandomVariable { space, values }
    }

    pub fn zero(space: Arc<ProbabilitySpace>) -> Self {
        Self::constant(space, 0.0)
    }

    /// Builds a variable by evaluating `f` on every atom index.
    pub fn from_fn(space: Arc<ProbabilitySpace>, f: impl FnMut(usize) -> f64) -> Result<Self> {
        let values = (0..space.atom_count()).map(f).collect();
        Self::new(space, values)
    }

    pub fn space(&self) -> &Arc<ProbabilitySpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_space(&self, other: &RandomVariable) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    pub fn expectation(&self) -> f64 {
        self.space
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v)
            .sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        RandomVariable {
            space: Arc::clone(&self.space),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &RandomVariable, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_space(other) {
            return Err(domain("random variables live on different spaces"));
        }
        Ok(RandomVariable {
            space: Arc::clone(&self.space),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, t: f64) -> Self {
        self.map(|v| t * v)
    }

    /// In-place `self += other`; panics if the spaces differ.
    pub fn add_assign(&mut self, other: &RandomVariable) {
        assert!(
            self.same_space(other),
            "random variables live on different spaces"
        );
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    /// In-place `self -= other`; panics if the spaces differ.
    pub fn sub_assign(&mut self, other: &RandomVariable) {
        assert!(
            self.same_space(other),
            "random variables live on different spaces"
        );
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a -= b;
        }
    }

    /// Largest atomwise absolute difference, over all atoms.
    pub fn max_abs_diff(&self, other: &RandomVariable) -> f64 {
        assert!(
            self.same_space(other),
            "random variables live on different spaces"
        );
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest absolute value over all atoms, including null ones.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    /// Exact law: distinct values with their total mass, ascending; null
    /// atoms are ignored.
    pub fn distribution(&self) -> Vec<(f64, f64)> {
        let mut pairs: Vec<(f64, f64)> = self
            .values
            .iter()
            .zip(self.space.weights())
            .filter(|(_, w)| **w > 0.0)
            .map(|(&v, &w)| (v, w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (v, w) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => out.push((v, w)),
            }
        }
        out
    }
}

impl std::ops::Add for &RandomVariable {
    type Output = RandomVariable;

    fn add(self, rhs: &RandomVariable) -> RandomVariable {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl std::ops::Sub for &RandomVariable {
    type Output = RandomVariable;

    fn sub(self, rhs: &RandomVariable) -> RandomVariable {
        let mut out = self.clone();
        out.sub_assign(rhs);
        out
    }
}
