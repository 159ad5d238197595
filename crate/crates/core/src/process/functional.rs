use std::fmt;
use std::sync::Arc;

use super::CoordinateLaw;
use crate::error::{invalid, Result};

/// Largest lookup table [`Functional::to_table`] will build.
pub const MAX_TABLE_LEN: usize = 1 << 22;

type CustomFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A map from the innovations near index `i` to the value of `X_i`.
///
/// Offsets are relative: a term `(-1, 0.5)` contributes `0.5 ξ_{i-1}`.
#[derive(Clone)]
pub enum Functional {
    Linear(Vec<(i64, f64)>),
    /// `f` receives the innovation values at `offsets`, in that order.
    Custom {
        offsets: Vec<i64>,
        f: CustomFn,
    },
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Linear(terms) => f.debug_tuple("Linear").field(terms).finish(),
            Functional::Custom { offsets, .. } => f
                .debug_struct("Custom")
                .field("offsets", offsets)
                .finish_non_exhaustive(),
        }
    }
}

impl Functional {
    /// Linear functional; duplicate offsets are merged and zero
    /// coefficients dropped.
    pub fn linear(terms: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        let mut merged: std::collections::BTreeMap<i64, f64> = Default::default();
        for (off, c) in terms {
            if !c.is_finite() {
                return Err(invalid(
                    "functional",
                    format!("coefficient {c} at offset {off}"),
                ));
            }
            *merged.entry(off).or_default() += c;
        }
        Ok(Functional::Linear(
            merged.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        ))
    }

    pub fn custom(
        offsets: Vec<i64>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let mut sorted = offsets.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != offsets.len() {
            return Err(invalid("functional", "repeated offsets"));
        }
        Ok(Functional::Custom {
            offsets,
            f: Arc::new(f),
        })
    }

    /// Offsets the functional reads, ascending.
    pub fn offsets(&self) -> Vec<i64> {
        match self {
            Functional::Linear(terms) => terms.iter().map(|(o, _)| *o).collect(),
            Functional::Custom { offsets, .. } => {
                let mut o = offsets.clone();
                o.sort_unstable();
                o
            }
        }
    }

    /// Smallest and largest offset read, or `None` for a functional that
    /// reads nothing.
    pub fn span(&self) -> Option<(i64, i64)> {
        let o = self.offsets();
        Some((*o.first()?, *o.last()?))
    }

    /// Evaluates at index `i` given innovation values by absolute index.
    pub fn eval_at(&self, i: i64, value: impl Fn(i64) -> f64) -> f64 {
        match self {
            Functional::Linear(terms) => terms.iter().map(|(o, c)| c * value(i + o)).sum(),
            Functional::Custom { offsets, f } => {
                let args: Vec<f64> = offsets.iter().map(|o| value(i + o)).collect();
                f(&args)
            }
        }
    }

    /// Tabulates the functional over every configuration of the symbols it
    /// reads.
    pub fn to_table(&self, law: &CoordinateLaw) -> Result<LocalTable> {
        let offsets = self.offsets();
        let radix = law.size();
        let len = table_len(radix, offsets.len())?;
        let mut values = Vec::with_capacity(len);
        let mut digits = vec![0usize; offsets.len()];
        for idx in 0..len {
            let mut rest = idx;
            for d in digits.iter_mut().rev() {
                *d = rest % radix;
                rest /= radix;
            }
            let v = self.eval_at(0, |j| {
                let pos = offsets
                    .binary_search(&j)
                    .expect("offset read by functional");
                law.symbol(digits[pos])
            });
            values.push(v);
        }
        LocalTable::new(offsets, radix, values)
    }
}

pub(crate) fn table_len(radix: usize, digits: usize) -> Result<usize> {
    let mut len: usize = 1;
    for _ in 0..digits {
        len = len
            .checked_mul(radix)
            .filter(|l| *l <= MAX_TABLE_LEN)
            .ok_or_else(|| {
                invalid(
                    "local table",
                    format!("{radix}^{digits} entries is too many"),
                )
            })?;
    }
    Ok(len)
}

/// A function of the symbols at a few offsets, stored as a lookup table.
///
/// The entry for symbol indices `s_0, …, s_{m-1}` (one per offset, in
/// ascending offset order) sits at `Σ s_j · radix^{m-1-j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTable {
    offsets: Vec<i64>,
    radix: usize,
    values: Vec<f64>,
}

impl LocalTable {
    pub fn new(offsets: Vec<i64>, radix: usize, values: Vec<f64>) -> Result<Self> {
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("local table", "offsets must be strictly ascending"));
        }
        let len = table_len(radix, offsets.len())?;
        if values.len() != len {
            return Err(invalid(
                "local table",
                format!("{} values, expected {len}", values.len()),
            ));
        }
        Ok(LocalTable {
            offsets,
            radix,
            values,
        })
    }

    pub fn constant(value: f64, radix: usize) -> Self {
        LocalTable {
            offsets: Vec::new(),
            radix,
            values: vec![value],
        }
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn radix(&self) -> usize {
        self.radix
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn span(&self) -> Option<(i64, i64)> {
        Some((*self.offsets.first()?, *self.offsets.last()?))
    }

    /// Value at index `i`, reading symbol indices by absolute position.
    #[inline]
    pub fn eval_at(&self, i: i64, symbol: impl Fn(i64) -> usize) -> f64 {
        let mut idx = 0;
        for o in &self.offsets {
            idx = idx * self.radix + symbol(i + o);
        }
        self.values[idx]
    }

    /// Largest absolute entry.
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum entrywise difference after aligning offsets; `None` when
    /// the two tables read different offsets.
    pub fn max_abs_diff(&self, other: &LocalTable) -> Option<f64> {
        if self.offsets != other.offsets || self.radix != other.radix {
            return None;
        }
        Some(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// A periodic assignment of functionals to indices: index `i` uses entry
/// `(i - anchor) mod p`.
#[derive(Debug, Clone)]
pub struct FunctionalPattern {
    anchor: i64,
    entries: Vec<Functional>,
}

impl FunctionalPattern {
    pub fn new(anchor: i64, entries: Vec<Functional>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("functional pattern", "no functionals"));
        }
        Ok(FunctionalPattern { anchor, entries })
    }

    /// The same functional at every index.
    pub fn stationary(f: Functional) -> Self {
        FunctionalPattern {
            anchor: 0,
            entries: vec![f],
        }
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    pub fn period(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Functional] {
        &self.entries
    }

    pub fn phase(&self, i: i64) -> usize {
        (i - self.anchor).rem_euclid(self.entries.len() as i64) as usize
    }

    pub fn at(&self, i: i64) -> &Functional {
        &self.entries[self.phase(i)]
    }

    /// Union of the spans of all entries.
    pub fn span(&self) -> Option<(i64, i64)> {
        self.entries
            .iter()
            .filter_map(Functional::span)
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }
}
