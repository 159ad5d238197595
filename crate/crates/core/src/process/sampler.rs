use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CoordinateLaw, FunctionalPattern, LawKind};

/// The random stream for one replica: a ChaCha8 generator keyed by `seed`
/// on stream `replica`, so replicas never share keystream.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Draws innovation symbol indices according to a [`CoordinateLaw`].
#[derive(Debug, Clone)]
pub struct SymbolDrawer {
    initial: Vec<f64>,
    rows: Option<Vec<Vec<f64>>>,
    /// Bits per symbol when the law is iid uniform on `2^b` symbols.
    uniform_bits: Option<u32>,
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = p
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY;
    }
    out
}

#[inline]
fn pick(cum: &[f64], u: f64) -> u16 {
    cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1) as u16
}

impl SymbolDrawer {
    pub fn new(law: &CoordinateLaw) -> Self {
        let n = law.size();
        let uniform_bits = (law.is_iid()
            && n.is_power_of_two()
            && n <= 1 << 16
            && law.probabilities().iter().all(|&p| p == 1.0 / n as f64))
        .then(|| n.trailing_zeros());
        let rows = match law.kind() {
            LawKind::Iid => None,
            LawKind::Markov { transition } => {
                Some(transition.iter().map(|r| cumulative(r)).collect())
            }
        };
        SymbolDrawer {
            initial: cumulative(law.probabilities()),
            rows,
            uniform_bits,
        }
    }

    /// Fills `out` with consecutive symbol indices.
    pub fn fill<R: RngCore>(&self, rng: &mut R, out: &mut [u16]) {
        if out.is_empty() {
            return;
        }
        if let Some(bits) = self.uniform_bits {
            if bits == 0 {
                out.fill(0);
                return;
            }
            let mask = (1u64 << bits) - 1;
            let per_word = 64 / bits;
            for chunk in out.chunks_mut(per_word as usize) {
                let mut word = rng.next_u64();
                for s in chunk {
                    *s = (word & mask) as u16;
                    word >>= bits;
                }
            }
            return;
        }
        match &self.rows {
            None => {
                for s in out.iter_mut() {
                    *s = pick(&self.initial, rng.random::<f64>());
                }
            }
            Some(rows) => {
                let mut prev = pick(&self.initial, rng.random::<f64>());
                out[0] = prev;
                for s in out.iter_mut().skip(1) {
                    prev = pick(&rows[prev as usize], rng.random::<f64>());
                    *s = prev;
                }
            }
        }
    }
}

/// Streaming Monte Carlo counterpart of an exact model.
#[derive(Debug, Clone)]
pub struct SamplerModel {
    pub law: CoordinateLaw,
    pub functionals: FunctionalPattern,
    pub seed: u64,
}

impl SamplerModel {
    pub fn new(law: CoordinateLaw, functionals: FunctionalPattern, seed: u64) -> Self {
        SamplerModel {
            law,
            functionals,
            seed,
        }
    }

    /// `(X_1, …, X_n)` for one replica; deterministic in `(seed, replica)`.
    pub fn sample_path(&self, n: usize, replica: u64) -> Vec<f64> {
        let (smin, smax) = self.functionals.span().unwrap_or((0, 0));
        let start = 1 + smin;
        let end = n as i64 + smax;
        let mut symbols = vec![0u16; (end - start + 1).max(0) as usize];
        let mut rng = replica_rng(self.seed, replica);
        SymbolDrawer::new(&self.law).fill(&mut rng, &mut symbols);
        let alphabet = self.law.alphabet();
        (1..=n as i64)
            .map(|i| {
                self.functionals
                    .at(i)
                    .eval_at(i, |j| alphabet[symbols[(j - start) as usize] as usize])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::Functional;

    fn iid_sign(seed: u64) -> SamplerModel {
        SamplerModel::new(
            CoordinateLaw::rademacher(),
            FunctionalPattern::stationary(Functional::linear([(0, 1.0)]).unwrap()),
            seed,
        )
    }

    #[test]
    fn deterministic_replay() {
        let m = iid_sign(7);
        assert_eq!(m.sample_path(1000, 3), m.sample_path(1000, 3));
        assert_ne!(m.sample_path(1000, 3), m.sample_path(1000, 4));
        assert_ne!(m.sample_path(1000, 3), iid_sign(8).sample_path(1000, 3));
    }

    #[test]
    fn iid_sign_mean_is_small() {
        let path = iid_sign(11).sample_path(100_000, 0);
        let mean = path.iter().sum::<f64>() / path.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!(path.iter().all(|&x| x == 1.0 || x == -1.0));
    }

    #[test]
    fn constant_alphabet_gives_zero_path() {
        let law = CoordinateLaw::iid(vec![0.0], vec![1.0]).unwrap();
        let m = SamplerModel::new(
            law,
            FunctionalPattern::stationary(Functional::linear([(0, 1.0)]).unwrap()),
            1,
        );
        assert!(m.sample_path(50, 0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn general_law_frequencies() {
        let law = CoordinateLaw::iid(vec![-2.0, 1.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        let drawer = SymbolDrawer::new(&law);
        let mut out = vec![0u16; 200_000];
        drawer.fill(&mut replica_rng(5, 0), &mut out);
        for (s, p) in [0.2, 0.5, 0.3].iter().enumerate() {
            let freq = out.iter().filter(|&&x| x as usize == s).count() as f64 / out.len() as f64;
            assert!((freq - p).abs() < 0.005, "symbol {s}: {freq}");
        }
    }
}
