use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier stored with every sampled artifact; bump on any change to the
/// draw sequence below.
pub const PRNG_TAG: &str = "chacha8-u64rej/v1";

/// ChaCha8 seeded from a `u64`, with unbiased bounded draws by rejection.
#[derive(Clone, Debug)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `0..bound`; `bound > 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.0.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    pub fn bit(&mut self) -> bool {
        self.0.next_u64() >> 63 == 1
    }

    /// Fisher–Yates shuffle driven by `below`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Derives an independent seed for a named sub-stream.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_draws_are_in_range_and_repeatable() {
        let mut a = SeededRng::new(3);
        let mut b = SeededRng::new(3);
        for bound in [1u64, 2, 7, 1000, u64::MAX] {
            for _ in 0..100 {
                let v = a.below(bound);
                assert!(v < bound);
                assert_eq!(v, b.below(bound));
            }
        }
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }

    #[test]
    fn pinned_stream() {
        // guards the draw sequence behind PRNG_TAG
        let mut r = SeededRng::new(0);
        let first: Vec<u64> = (0..3).map(|_| r.below(1000)).collect();
        assert_eq!(first, vec![652, 623, 878]);
        assert_eq!(SeededRng::new(42).next_u64(), 12578764544318200737);
    }
}
