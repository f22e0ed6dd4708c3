//! Seeding and step sampling.
//!
//! Every stream is a `ChaCha8Rng` (rand_chacha 0.9) created with
//! `seed_from_u64`. Child seeds come from [`derive_seed`], so sample `i` of a
//! run with seed `s` always uses `derive_seed(s, i)` no matter how the work
//! is split across threads.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::GroupElem;
use crate::error::{Error, Result};
use crate::measures::SparseMeasure;
use crate::rational::to_f64;

pub type WalkRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The seed of child `index` of `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> WalkRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Inverse-CDF sampling over the support in its fixed (sorted) order.
///
/// When the common denominator of the weights fits in a `u64`, draws are
/// exact integer comparisons; otherwise they use `f64` cumulative weights.
#[derive(Clone, Debug)]
pub struct StepSampler {
    elems: Vec<GroupElem>,
    thresholds: Thresholds,
}

#[derive(Clone, Debug)]
enum Thresholds {
    Exact { den: u64, cum: Vec<u64> },
    Float(Vec<f64>),
}

impl StepSampler {
    pub fn new(t: &SparseMeasure) -> Result<Self> {
        t.require_probability("step sampler")?;
        let elems: Vec<GroupElem> = t.weights().keys().cloned().collect();
        let den = t.weights().values().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let thresholds = match den.to_u64() {
            Some(d) => {
                let mut acc = 0u64;
                let cum = t
                    .weights()
                    .values()
                    .map(|w| {
                        acc += (w.numer() * (&den / w.denom())).to_u64().expect("numerator below denominator");
                        acc
                    })
                    .collect();
                Thresholds::Exact { den: d, cum }
            }
            None => {
                let mut acc = 0.0;
                Thresholds::Float(
                    t.weights()
                        .values()
                        .map(|w| {
                            acc += to_f64(w);
                            acc
                        })
                        .collect(),
                )
            }
        };
        if elems.is_empty() {
            return Err(Error::precondition("cannot sample from an empty measure"));
        }
        Ok(StepSampler { elems, thresholds })
    }

    pub fn elems(&self) -> &[GroupElem] {
        &self.elems
    }

    /// Index into [`StepSampler::elems`].
    pub fn sample_index(&self, rng: &mut WalkRng) -> usize {
        let last = self.elems.len() - 1;
        match &self.thresholds {
            Thresholds::Exact { den, cum } => {
                let u = rng.random_range(0..*den);
                cum.partition_point(|c| *c <= u).min(last)
            }
            Thresholds::Float(cum) => {
                let u: f64 = rng.random::<f64>() * cum[last];
                cum.partition_point(|c| *c <= u).min(last)
            }
        }
    }

    pub fn sample(&self, rng: &mut WalkRng) -> &GroupElem {
        &self.elems[self.sample_index(rng)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::e_bs;

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn exact_sampler_frequencies() {
        let s = StepSampler::new(&e_bs()).unwrap();
        let mut rng = rng_from_seed(1);
        let mut counts = [0u32; 3];
        for _ in 0..80_000 {
            counts[s.sample_index(&mut rng)] += 1;
        }
        // sorted support: (0 | -1), (0 | 1), (1 | 1)
        let expected = [20_000.0, 30_000.0, 30_000.0];
        for (c, e) in counts.iter().zip(expected) {
            assert!((*c as f64 - e).abs() < 4.0 * e.sqrt() * 1.2, "{counts:?}");
        }
    }
}
