//! Random sources.
//!
//! Every estimator draws its randomness through [`RandomSource`]. Two
//! implementations exist:
//!
//! * [`Stream`]: a counter-based ChaCha stream keyed by
//!   `(seed, replication, sub-stream)`, so a replication's output does not
//!   depend on which thread ran it or in which order;
//! * [`Enumerator`]: an exhaustive explorer of discrete choices, used to compute
//!   exact expectations of estimators whose randomness is finitely supported.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of the primitive random choices the samplers need.
pub trait RandomSource {
    /// Uniform draw on the open interval `(0, 1)`.
    fn uniform(&mut self) -> f64;

    /// Uniform index in `0..len`.
    fn pick_index(&mut self, len: u64) -> u64;

    /// Index `i` in `0..len` with probability `weight(i) / total`.
    ///
    /// `total` must equal the sum of the weights. The default walks the
    /// cumulative sum once, so memory use is constant in `len`.
    fn pick_weighted(&mut self, len: u64, total: f64, weight: &mut dyn FnMut(u64) -> f64) -> u64 {
        let target = self.uniform() * total;
        let mut acc = NeumaierSum::default();
        let mut last_positive = 0;
        for i in 0..len {
            let w = weight(i);
            if w > 0.0 {
                last_positive = i;
                acc.add(w);
                if acc.value() >= target {
                    return i;
                }
            }
        }
        // Rounding left the target just above the computed total.
        last_positive
    }
}

impl<T: RandomSource + ?Sized> RandomSource for &mut T {
    fn uniform(&mut self) -> f64 {
        (**self).uniform()
    }

    fn pick_index(&mut self, len: u64) -> u64 {
        (**self).pick_index(len)
    }

    fn pick_weighted(&mut self, len: u64, total: f64, weight: &mut dyn FnMut(u64) -> f64) -> u64 {
        (**self).pick_weighted(len, total, weight)
    }
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Labels separating the independent draws inside one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum SubStream {
    Dominant = 0,
    Residual = 1,
    BlockIndex = 2,
    BigJump = 3,
    Bounded = 4,
    Mixed = 5,
    Naive = 6,
    Auxiliary = 7,
}

/// Identifies one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub replication: u64,
    pub sub_stream: SubStream,
}

impl StreamKey {
    pub fn new(seed: u64, replication: u64, sub_stream: SubStream) -> Self {
        Self { seed, replication, sub_stream }
    }

    pub fn stream(self) -> Stream {
        Stream::new(self)
    }
}

/// Counter-based stream: the ChaCha key comes from the seed, the ChaCha stream
/// id is the replication index and each sub-stream starts at its own
/// `2^64`-word offset of the block counter.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(key: StreamKey) -> Self {
        let mut seed = [0u8; 32];
        let mut state = key.seed;
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(key.replication);
        rng.set_word_pos((key.sub_stream as u128) << 64);
        Self { rng }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

impl RandomSource for Stream {
    #[inline]
    fn uniform(&mut self) -> f64 {
        // 53 random bits, offset by half an ulp so 0 and 1 are excluded.
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    fn pick_index(&mut self, len: u64) -> u64 {
        self.rng.random_range(0..len)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Exhaustive explorer of a finite tree of discrete random choices.
///
/// A closure is re-run once per leaf of the choice tree; each run follows a
/// recorded prefix of choices and extends it with the first admissible branch.
/// Calling [`RandomSource::uniform`] panics: enumeration only makes sense when
/// all randomness is discrete.
#[derive(Debug, Default)]
pub struct Enumerator {
    path: Vec<Choice>,
    depth: usize,
    probability: f64,
}

#[derive(Debug, Clone)]
struct Choice {
    /// Position in `candidates`.
    cursor: usize,
    /// Branches with positive probability, in increasing order.
    candidates: Vec<u64>,
}

/// Result of [`Enumerator::expectation`].
#[derive(Debug, Clone, Copy)]
pub struct Enumerated {
    pub expectation: f64,
    pub total_probability: f64,
    pub leaves: u64,
}

impl Enumerator {
    /// Computes `E[f]` over every leaf of the choice tree driven by `f`.
    /// Panics if more than `max_leaves` leaves are visited.
    pub fn expectation<F>(max_leaves: u64, mut f: F) -> Enumerated
    where
        F: FnMut(&mut Enumerator) -> f64,
    {
        let mut en = Enumerator::default();
        let mut expectation = NeumaierSum::default();
        let mut total = NeumaierSum::default();
        let mut leaves = 0u64;
        loop {
            en.depth = 0;
            en.probability = 1.0;
            let value = f(&mut en);
            assert_eq!(en.depth, en.path.len(), "choice tree changed shape between runs");
            leaves += 1;
            assert!(leaves <= max_leaves, "enumeration exceeded {max_leaves} leaves");
            if en.probability > 0.0 {
                expectation.add(en.probability * value);
                total.add(en.probability);
            }
            if !en.advance() {
                break;
            }
        }
        Enumerated { expectation: expectation.value(), total_probability: total.value(), leaves }
    }

    fn advance(&mut self) -> bool {
        while let Some(last) = self.path.last_mut() {
            if last.cursor + 1 < last.candidates.len() {
                last.cursor += 1;
                return true;
            }
            self.path.pop();
        }
        false
    }

    fn choose(&mut self, candidates: impl FnOnce() -> Vec<u64>) -> u64 {
        if self.depth == self.path.len() {
            let candidates = candidates();
            assert!(!candidates.is_empty(), "choice with no admissible branch");
            self.path.push(Choice { cursor: 0, candidates });
        }
        let choice = &self.path[self.depth];
        self.depth += 1;
        choice.candidates[choice.cursor]
    }
}

impl RandomSource for Enumerator {
    fn uniform(&mut self) -> f64 {
        panic!("continuous draw requested during exhaustive enumeration")
    }

    fn pick_index(&mut self, len: u64) -> u64 {
        let i = self.choose(|| (0..len).collect());
        self.probability /= len as f64;
        i
    }

    fn pick_weighted(&mut self, len: u64, total: f64, weight: &mut dyn FnMut(u64) -> f64) -> u64 {
        let i = self.choose(|| (0..len).filter(|&i| weight(i) > 0.0).collect());
        self.probability *= weight(i) / total;
        i
    }
}
