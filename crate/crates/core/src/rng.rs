//! Seeded, splittable random number generation.
//!
//! Every stochastic component (bootstrap draws, feature subsets, shuffles,
//! SHAP sampling) derives its own labeled substream from a single root seed,
//! so results are reproducible regardless of the order in which consumers
//! draw. Substreams derived from the same seed and label are identical;
//! substreams with different labels are independent for practical purposes.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

/// Splittable PRNG with a splitmix64 core.
///
/// The `key` is fixed at construction; `substream` and `split` derive new
/// generators from the key alone, so deriving is insensitive to how much the
/// parent has already been consumed.
#[derive(Debug, Clone)]
pub struct SplitRng {
    key: u64,
    state: u64,
}

impl SplitRng {
    pub fn new(seed: u64) -> Self {
        SplitRng {
            key: seed,
            state: seed,
        }
    }

    /// Derive a labeled substream. Depends only on (seed, label).
    pub fn substream(&self, label: &str) -> SplitRng {
        SplitRng::new(mix(self.key, fnv1a(label.as_bytes())))
    }

    /// Derive an indexed substream, e.g. one per tree of a forest.
    pub fn split(&self, index: u64) -> SplitRng {
        SplitRng::new(mix(self.key, index.wrapping_mul(GOLDEN_GAMMA) ^ 0x5851_F42D_4C95_7F2D))
    }

    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound). `bound` must be positive.
    pub fn gen_range(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        // Rejection-free mapping; bias is negligible for desk-scale bounds.
        (self.next_u64() % bound as u64) as usize
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_f64().clamp(f64::MIN_POSITIVE, 1.0);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.gen_range(i + 1);
            slice.swap(i, j);
        }
    }

    /// `count` distinct indices drawn from `0..n`, in random order.
    pub fn sample_without_replacement(&mut self, n: usize, count: usize) -> Vec<usize> {
        let count = count.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = i + self.gen_range(n - i);
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }

    /// `count` indices drawn from `0..n` with replacement.
    pub fn sample_with_replacement(&mut self, n: usize, count: usize) -> Vec<usize> {
        (0..count).map(|_| self.gen_range(n)).collect()
    }
}

fn mix(a: u64, b: u64) -> u64 {
    let mut s = a ^ b.rotate_left(31);
    let x = splitmix64(&mut s);
    x ^ a
}
