//! Seeded random streams and multinomial sampling.
//!
//! A stream is a pure function of `(seed, index)`: the master seed keys a
//! ChaCha8 generator and the index selects one of its 2⁶⁴ streams. The engine
//! assigns stream index = simulation index, so results do not depend on how
//! simulations are scheduled across workers.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::stats::{CountVector, ProbabilityVector};

/// Master seed for a Monte-Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    pub fn master(self) -> u64 {
        self.0
    }

    /// An independent seed for a sub-task, keyed by `tag`.
    pub fn child(self, tag: u64) -> Seed {
        Seed(splitmix64(splitmix64(self.0) ^ splitmix64(tag.wrapping_add(0x632b_e59b_d9b4_e019))))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A single-owner random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    index: u64,
}

impl RngStream {
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub fn derive_stream(seed: Seed, index: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    rng.set_stream(index);
    RngStream { rng, index }
}

/// Multinomial sampler by conditional binomial splitting.
///
/// Bin `j` receives `Binomial(remaining, pⱼ / Σ_{k≥j} pₖ)` draws; the
/// conditional probabilities are computed once per model from compensated
/// suffix sums.
#[derive(Debug, Clone)]
pub struct MultinomialSampler {
    conditional: Vec<f64>,
    last_positive: usize,
}

impl MultinomialSampler {
    pub fn new(model: &ProbabilityVector) -> Self {
        let probs = model.probs();
        let m = probs.len();
        let mut conditional = vec![0.0; m];
        let mut suffix = crate::stats::CompensatedSum::default();
        for j in (0..m).rev() {
            suffix.add(probs[j]);
            let tail = suffix.value();
            conditional[j] = if tail > 0.0 {
                (probs[j] / tail).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
        let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        conditional[last_positive] = 1.0;
        Self {
            conditional,
            last_positive,
        }
    }

    pub fn bins(&self) -> usize {
        self.conditional.len()
    }

    /// Draw `n` i.i.d. samples and return their bin counts.
    pub fn draw<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> CountVector {
        let mut counts = vec![0u64; self.conditional.len()];
        self.draw_into(n, rng, &mut counts);
        CountVector::new(counts).expect("sampler has at least one bin")
    }

    pub fn draw_into<R: Rng + ?Sized>(&self, n: u64, rng: &mut R, counts: &mut [u64]) {
        counts.fill(0);
        let mut remaining = n;
        for (j, &q) in self.conditional.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            if j == self.last_positive {
                counts[j] = remaining;
                break;
            }
            let k = if q <= 0.0 {
                0
            } else {
                Binomial::new(remaining, q)
                    .expect("conditional probability lies in [0, 1]")
                    .sample(rng)
            };
            counts[j] = k;
            remaining -= k;
        }
    }
}

/// Draw `n` samples from `model` with a fresh sampler.
pub fn multinomial_draw(model: &ProbabilityVector, n: u64, rng: &mut RngStream) -> CountVector {
    MultinomialSampler::new(model).draw(n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn first_outputs(seed: u64, index: u64) -> Vec<u64> {
        let mut s = derive_stream(Seed(seed), index);
        (0..1000).map(|_| s.next_u64()).collect()
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        assert_eq!(first_outputs(42, 0), first_outputs(42, 0));
        assert_ne!(first_outputs(42, 0), first_outputs(42, 1));
        assert_ne!(first_outputs(42, 0), first_outputs(43, 0));
        assert_ne!(Seed(42).child(1), Seed(42).child(2));
    }

    #[test]
    fn degenerate_and_empty_draws() {
        let model = ProbabilityVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let mut rng = derive_stream(Seed(1), 0);
        assert_eq!(multinomial_draw(&model, 7, &mut rng).counts(), &[7, 0, 0]);
        let model = ProbabilityVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(multinomial_draw(&model, 7, &mut rng).counts(), &[0, 0, 7]);
        let model = ProbabilityVector::uniform(4).unwrap();
        assert_eq!(multinomial_draw(&model, 0, &mut rng).counts(), &[0, 0, 0, 0]);
    }

    #[test]
    fn zero_bins_never_receive_draws() {
        let model = ProbabilityVector::new(vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let sampler = MultinomialSampler::new(&model);
        for i in 0..200 {
            let c = sampler.draw(50, &mut derive_stream(Seed(5), i));
            assert_eq!(c.total(), 50);
            assert_eq!(c.counts()[0] + c.counts()[2] + c.counts()[4], 0);
        }
    }
}
