use std::collections::HashMap;

use super::RandomVariable;
use crate::error::{domain, invalid, Result};

/// A σ-algebra on a finite space, stored as a block label per atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<u32>,
    block_count: usize,
}

impl Partition {
    /// Builds a partition from explicit blocks, which must be disjoint,
    /// nonempty and cover `0..atom_count`.
    pub fn from_blocks(atom_count: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        const UNSET: u32 = u32::MAX;
        let mut labels = vec![UNSET; atom_count];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(invalid("partition", format!("block {b} is empty")));
            }
            for &a in block {
                if a >= atom_count {
                    return Err(invalid("partition", format!("atom {a} out of range")));
                }
                if labels[a] != UNSET {
                    return Err(invalid("partition", format!("atom {a} in two blocks")));
                }
                labels[a] = b as u32;
            }
        }
        if let Some(a) = labels.iter().position(|&l| l == UNSET) {
            return Err(invalid("partition", format!("atom {a} not covered")));
        }
        Ok(Partition {
            labels,
            block_count: blocks.len(),
        })
    }

    /// Builds a partition from arbitrary per-atom keys; atoms sharing a key
    /// share a block. Blocks are numbered by first appearance.
    pub fn from_keys<K: std::hash::Hash + Eq>(keys: impl IntoIterator<Item = K>) -> Self {
        let mut seen = HashMap::new();
        let labels: Vec<u32> = keys
            .into_iter()
            .map(|k| {
                let next = seen.len() as u32;
                *seen.entry(k).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            block_count: seen.len(),
        }
    }

    /// Labels must already be dense in `0..block_count` with every block hit.
    pub(crate) fn from_dense_labels(labels: Vec<u32>, block_count: usize) -> Self {
        debug_assert!(labels.iter().all(|&l| (l as usize) < block_count));
        Partition {
            labels,
            block_count,
        }
    }

    pub fn trivial(atom_count: usize) -> Self {
        Partition {
            labels: vec![0; atom_count],
            block_count: usize::from(atom_count > 0),
        }
    }

    pub fn discrete(atom_count: usize) -> Self {
        Partition {
            labels: (0..atom_count as u32).collect(),
            block_count: atom_count,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.labels.len()
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn label(&self, atom: usize) -> usize {
        self.labels[atom] as usize
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count];
        for (a, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(a);
        }
        blocks
    }
}

/// True iff every block of `fine` lies inside some block of `coarse`.
pub fn is_refinement(coarse: &Partition, fine: &Partition) -> bool {
    if coarse.atom_count() != fine.atom_count() {
        return false;
    }
    let mut parent = vec![u32::MAX; fine.block_count];
    for (f, c) in fine.labels.iter().zip(&coarse.labels) {
        let p = &mut parent[*f as usize];
        if *p == u32::MAX {
            *p = *c;
        } else if *p != *c {
            return false;
        }
    }
    true
}

/// Conditional expectation of `x` given the σ-algebra generated by `g`.
///
/// Blocks of zero total weight get the value 0.
pub fn cond_expect(x: &RandomVariable, g: &Partition) -> Result<RandomVariable> {
    let space = x.space();
    if g.atom_count() != space.atom_count() {
        return Err(domain(format!(
            "partition over {} atoms applied to a space of {} atoms",
            g.atom_count(),
            space.atom_count()
        )));
    }
    let mut mass = vec![0.0; g.block_count];
    let mut moment = vec![0.0; g.block_count];
    for ((&l, &w), &v) in g.labels.iter().zip(space.weights()).zip(x.values()) {
        mass[l as usize] += w;
        moment[l as usize] += w * v;
    }
    let means: Vec<f64> = mass
        .iter()
        .zip(&moment)
        .map(|(&m, &s)| if m > 0.0 { s / m } else { 0.0 })
        .collect();
    let values = g.labels.iter().map(|&l| means[l as usize]).collect();
    RandomVariable::new(space.clone(), values)
}

/// True iff `x` is constant (up to `tol`) on every block of `g`.
pub fn is_measurable(x: &RandomVariable, g: &Partition, tol: f64) -> bool {
    if g.atom_count() != x.space().atom_count() {
        return false;
    }
    let mut lo = vec![f64::INFINITY; g.block_count];
    let mut hi = vec![f64::NEG_INFINITY; g.block_count];
    for (&l, &v) in g.labels.iter().zip(x.values()) {
        let l = l as usize;
        lo[l] = lo[l].min(v);
        hi[l] = hi[l].max(v);
    }
    lo.iter().zip(&hi).all(|(a, b)| b - a <= tol)
}

/// An increasing chain of partitions indexed by `k_min..=k_max`.
///
/// Indices below `k_min` resolve to the trivial partition; indices above
/// `k_max` resolve to the partition stored at `k_max`.
#[derive(Debug, Clone)]
pub struct Filtration {
    k_min: i64,
    partitions: Vec<Partition>,
    trivial: Partition,
}

impl Filtration {
    pub fn new(k_min: i64, partitions: Vec<Partition>) -> Result<Self> {
        let first = partitions
            .first()
            .ok_or_else(|| invalid("filtration", "no partitions"))?;
        let n = first.atom_count();
        for (offset, pair) in partitions.windows(2).enumerate() {
            if pair[1].atom_count() != n {
                return Err(invalid(
                    "filtration",
                    "partitions over different atom counts",
                ));
            }
            if !is_refinement(&pair[0], &pair[1]) {
                return Err(invalid(
                    "filtration",
                    format!(
                        "partition at {} does not refine partition at {}",
                        k_min + offset as i64 + 1,
                        k_min + offset as i64
                    ),
                ));
            }
        }
        Ok(Filtration {
            k_min,
            partitions,
            trivial: Partition::trivial(n),
        })
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.partitions.len() as i64 - 1
    }

    pub fn atom_count(&self) -> usize {
        self.trivial.atom_count()
    }

    pub fn at(&self, i: i64) -> &Partition {
        if i < self.k_min {
            &self.trivial
        } else if i > self.k_max() {
            self.partitions.last().expect("nonempty")
        } else {
            &self.partitions[(i - self.k_min) as usize]
        }
    }

    pub fn cond_expect(&self, x: &RandomVariable, i: i64) -> Result<RandomVariable> {
        cond_expect(x, self.at(i))
    }
}

/// The martingale increment `E(X|F_i) - E(X|F_{i-1})`.
pub fn projection(x: &RandomVariable, f: &Filtration, i: i64) -> Result<RandomVariable> {
    let mut now = f.cond_expect(x, i)?;
    now.sub_assign(&f.cond_expect(x, i - 1)?);
    Ok(now)
}
