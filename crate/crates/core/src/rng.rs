//! Counter-based deterministic random streams.
//!
//! Every draw is a pure function of `(seed, stream_id, counter)`, so work
//! split across threads sees the same numbers regardless of scheduling.
//! Backed by ChaCha8 with the stream id in the nonce and the counter as the
//! keystream word position.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Purposes that get their own independent stream family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamKind {
    Init = 1,
    Shuffle = 2,
    MutationMask = 3,
    MutationValue = 4,
    Pairing = 5,
    Seeding = 6,
    Window = 7,
    LongTapeMutation = 8,
}

impl StreamKind {
    /// Stream id for `self` at a given epoch (or window, generation, ...).
    pub fn at(self, index: u64) -> u64 {
        ((self as u64) << 56) ^ (index & ((1 << 56) - 1))
    }
}

#[derive(Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self::at(seed, stream_id, 0)
    }

    /// Stream positioned at `counter` 64-bit outputs from its start.
    pub fn at(seed: u64, stream_id: u64, counter: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        inner.set_word_pos(counter as u128 * 2);
        RngStream { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 64-bit outputs consumed so far.
    pub fn counter(&self) -> u64 {
        (self.inner.get_word_pos() / 2) as u64
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n` without modulo bias.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        // Lemire's multiply-and-reject
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform float in `[0, 1)` with 53 bits of precision.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn byte(&mut self) -> u8 {
        (self.next_u64() >> 56) as u8
    }

    pub fn fill_bytes(&mut self, out: &mut [u8]) {
        for chunk in out.chunks_mut(8) {
            let word = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&word[..chunk.len()]);
        }
    }

    /// Fisher–Yates permutation of `0..n`.
    pub fn shuffle(&mut self, n: usize) -> Vec<u32> {
        let mut perm: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = self.below(i as u64 + 1) as usize;
            perm.swap(i, j);
        }
        perm
    }

    /// Length of the run of failures before the next success of a
    /// Bernoulli(`p`) trial. `None` when `p == 0`.
    pub fn geometric_gap(&mut self, p: f64) -> Option<u64> {
        if p <= 0.0 {
            return None;
        }
        if p >= 1.0 {
            return Some(0);
        }
        // 1 - u lies in (0, 1]
        let u = 1.0 - self.unit_f64();
        let gap = (u.ln() / (-p).ln_1p()).floor();
        Some(if gap >= u64::MAX as f64 { u64::MAX } else { gap as u64 })
    }
}

/// Positions in `0..len` hit by independent per-position Bernoulli(`rate`)
/// trials, in increasing order.
pub fn bernoulli_positions(stream: &mut RngStream, len: usize, rate: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut pos: u64 = 0;
    while let Some(gap) = stream.geometric_gap(rate) {
        pos = pos.saturating_add(gap);
        if pos >= len as u64 {
            break;
        }
        out.push(pos as usize);
        pos += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_of_one_is_identity() {
        assert_eq!(RngStream::new(99, 3).shuffle(1), vec![0]);
    }

    #[test]
    fn shuffle_golden_seed0_stream0() {
        // recorded once from this implementation; pins cross-platform stability
        assert_eq!(RngStream::new(0, 0).shuffle(4), GOLDEN_SHUFFLE_4);
        assert_eq!(RngStream::new(0, 0).shuffle(4), RngStream::new(0, 0).shuffle(4));
    }

    const GOLDEN_SHUFFLE_4: [u32; 4] = [0, 3, 1, 2];

    #[test]
    fn counter_positioning_matches_sequential_draws() {
        let mut a = RngStream::new(7, 11);
        let seq: Vec<u64> = (0..10).map(|_| a.next_u64()).collect();
        for (k, &v) in seq.iter().enumerate() {
            assert_eq!(RngStream::at(7, 11, k as u64).next_u64(), v);
        }
        assert_eq!(a.counter(), 10);
    }

    #[test]
    fn distinct_streams_differ() {
        let a: Vec<u64> = {
            let mut s = RngStream::new(1, StreamKind::Shuffle.at(0));
            (0..4).map(|_| s.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut s = RngStream::new(1, StreamKind::Shuffle.at(1));
            (0..4).map(|_| s.next_u64()).collect()
        };
        assert_ne!(a, b);
    }

    #[test]
    fn large_shuffles_from_distinct_counters_differ() {
        let n = 1 << 17;
        let p1 = RngStream::at(0, 0, 0).shuffle(n);
        let p2 = RngStream::at(0, 0, 1_000_000).shuffle(n);
        assert_ne!(p1, p2);
        let mut sorted = p1.clone();
        sorted.sort_unstable();
        assert!(sorted.iter().enumerate().all(|(i, &v)| i as u32 == v));
    }

    #[test]
    fn below_is_roughly_uniform() {
        let mut s = RngStream::new(5, 5);
        let mut counts = [0u32; 6];
        for _ in 0..60_000 {
            counts[s.below(6) as usize] += 1;
        }
        for c in counts {
            assert!((9_400..10_600).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn bernoulli_positions_rate_matches() {
        let mut s = RngStream::new(3, 3);
        let hits = bernoulli_positions(&mut s, 4_000_000, 0.00024);
        // mean 960, sd ~31
        assert!((840..1080).contains(&hits.len()), "{}", hits.len());
        assert!(hits.windows(2).all(|w| w[0] < w[1]));
        assert!(bernoulli_positions(&mut s, 100, 0.0).is_empty());
        assert_eq!(bernoulli_positions(&mut s, 100, 1.0), (0..100).collect::<Vec<_>>());
    }
}
