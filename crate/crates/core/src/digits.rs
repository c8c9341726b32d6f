//! Uniform digits in `0..=8` from a raw byte source.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rules::Digit;

/// Largest multiple of 9 that fits in a byte. Bytes at or above it are
/// discarded so that every digit keeps probability exactly 1/9.
const ACCEPT_BELOW: u8 = 252;

/// Anything that yields independent uniform digits.
pub trait DigitSource {
    fn next_digit(&mut self) -> Digit;
}

/// Rejection sampler over any [`RngCore`].
#[derive(Debug, Clone)]
pub struct UniformDigits<R> {
    rng: R,
    buf: [u8; 32],
    pos: usize,
}

impl<R: RngCore> UniformDigits<R> {
    pub fn new(rng: R) -> Self {
        UniformDigits {
            rng,
            buf: [0; 32],
            pos: 32,
        }
    }

    fn next_byte(&mut self) -> u8 {
        if self.pos == self.buf.len() {
            self.rng.fill_bytes(&mut self.buf);
            self.pos = 0;
        }
        let b = self.buf[self.pos];
        self.pos += 1;
        b
    }
}

impl UniformDigits<ChaCha8Rng> {
    /// Reproducible source: the same seed always yields the same digits.
    pub fn seeded(seed: u64) -> Self {
        Self::new(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Seeded from the operating system.
    pub fn from_os() -> Self {
        Self::new(ChaCha8Rng::from_os_rng())
    }
}

impl<R: RngCore> DigitSource for UniformDigits<R> {
    fn next_digit(&mut self) -> Digit {
        loop {
            let b = self.next_byte();
            if b < ACCEPT_BELOW {
                return Digit::new(b % 9).expect("b % 9 is a digit");
            }
        }
    }
}
