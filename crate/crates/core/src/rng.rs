//! Counter-based random streams.
//!
//! A stream is a ChaCha8 keystream keyed by the run seed and a purpose tag,
//! and selected by the path index through the ChaCha stream id. Path `i`
//! therefore sees the same numbers however paths are split across workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent uses of one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Digits = 0x6469_6769_7473_0001,
    Brownian = 0x6272_6f77_6e00_0002,
    Kernel = 0x6b65_726e_656c_0003,
    Optimizer = 0x6f70_7469_6d00_0004,
    TestSet = 0x7465_7374_7365_0005,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed ^ purpose as u64;
    for chunk in key.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Lazily generated binary digits, least significant bit of each word first.
#[derive(Debug, Clone)]
pub struct RandomDigits {
    rng: ChaCha8Rng,
    word: u64,
    left: u32,
}

impl RandomDigits {
    pub fn new(seed: u64, path_index: u64) -> Self {
        Self {
            rng: stream(seed, Purpose::Digits, path_index),
            word: 0,
            left: 0,
        }
    }

    #[inline]
    pub fn next_digit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        bit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut r1 = stream(7, Purpose::Digits, 3);
        let mut r2 = stream(7, Purpose::Digits, 3);
        let a: Vec<u64> = (0..4).map(|_| r1.next_u64()).collect();
        let b: Vec<u64> = (0..4).map(|_| r2.next_u64()).collect();
        assert_eq!(a, b);
        assert_ne!(a[0], stream(7, Purpose::Digits, 4).next_u64());
        assert_ne!(a[0], stream(7, Purpose::Brownian, 3).next_u64());
        assert_ne!(a[0], stream(8, Purpose::Digits, 3).next_u64());
    }

    #[test]
    fn digits_are_balanced() {
        let mut digits = RandomDigits::new(1, 0);
        let ones = (0..100_000).filter(|_| digits.next_digit()).count();
        assert!((ones as f64 - 50_000.0).abs() < 5.0 * 158.2);
    }
}
