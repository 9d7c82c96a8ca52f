//! Seed derivation and keyed random words.
//!
//! Every random quantity in a trial is a pure function of the master seed.
//! Two mechanisms are used:
//!
//! * **Keyed words.** Instruction stacks and frog walks are counter-based:
//!   the `i`-th entry of the stream identified by `(trial seed, vertex path
//!   hash, stream kind)` is
//!
//!   ```text
//!   key  = mix64(mix64(trial_seed ^ kind_tag) ^ path_hash)
//!   word = mix64(key ^ mix64(i * GOLDEN + INDEX_SALT))
//!   ```
//!
//!   so entries can be generated lazily, in any order, and are never reused.
//! * **Sequential substreams.** Schedulers and coupling followers draw from a
//!   `ChaCha8Rng` seeded with `mix64(trial_seed ^ kind_tag)`.
//!
//! Trial seeds are `mix64(master ^ mix64((trial + 1) * GOLDEN))`. Path hashes
//! start from [`ROOT_HASH`] and extend with [`child_hash`]. `mix64` is the
//! SplitMix64 finalizer. Runs are reproducible bit-for-bit within this
//! implementation; nothing is promised across implementations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const INDEX_SALT: u64 = 0xD1B5_4A32_D192_ED03;
const CHILD_SALT: u64 = 0x8CB9_2BA7_2F3D_8DD7;

/// Hash of the root's (empty) path.
pub const ROOT_HASH: u64 = 0x243F_6A88_85A3_08D3;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn child_hash(parent: u64, child: u8) -> u64 {
    mix64(parent.wrapping_mul(GOLDEN) ^ (u64::from(child) + 1).wrapping_mul(CHILD_SALT))
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    mix64(master ^ mix64(trial.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Stream kinds; the discriminant is mixed into every key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamKind {
    /// Per-frog walk of FM(d,p), keyed by the frog's birth vertex.
    FmWalk = 0x11,
    /// Up-instruction stack U(v).
    Up = 0x22,
    /// Down-instruction stack D(v).
    Down = 0x33,
    /// Early-removal coins, keyed by vertex.
    Removal = 0x44,
    Scheduler = 0x55,
    Follower = 0x66,
    ExtraKill = 0x77,
    Recursion = 0x88,
}

impl StreamKind {
    #[inline]
    fn tag(self) -> u64 {
        mix64((self as u64).wrapping_mul(0xA076_1D64_78BD_642F))
    }
}

/// One lazily evaluated infinite sequence of random words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyedStream {
    key: u64,
}

impl KeyedStream {
    #[inline]
    pub fn new(trial_seed: u64, path_hash: u64, kind: StreamKind) -> Self {
        Self {
            key: mix64(mix64(trial_seed ^ kind.tag()) ^ path_hash),
        }
    }

    #[inline]
    pub fn word(&self, index: u64) -> u64 {
        mix64(self.key ^ mix64(index.wrapping_mul(GOLDEN).wrapping_add(INDEX_SALT)))
    }

    #[inline]
    pub fn unit(&self, index: u64) -> f64 {
        unit_f64(self.word(index))
    }
}

/// Uniform on [0, 1) from the top 53 bits.
#[inline]
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `0..n` by multiply-high.
#[inline]
pub fn below(word: u64, n: u64) -> u64 {
    ((u128::from(word) * u128::from(n)) >> 64) as u64
}

pub fn substream(trial_seed: u64, kind: StreamKind) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(trial_seed ^ kind.tag()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn words_are_deterministic() {
        let s = KeyedStream::new(7, ROOT_HASH, StreamKind::Up);
        assert_eq!(s.word(3), KeyedStream::new(7, ROOT_HASH, StreamKind::Up).word(3));
        assert_ne!(s.word(3), s.word(4));
    }

    #[test]
    fn no_raw_word_reuse_across_streams() {
        let mut seen = HashSet::new();
        let mut hashes = vec![ROOT_HASH];
        for c in 1..=4u8 {
            hashes.push(child_hash(ROOT_HASH, c));
            hashes.push(child_hash(child_hash(ROOT_HASH, c), 1));
        }
        for trial in 0..4 {
            let ts = trial_seed(99, trial);
            for &h in &hashes {
                for kind in [StreamKind::Up, StreamKind::Down, StreamKind::FmWalk] {
                    let s = KeyedStream::new(ts, h, kind);
                    for i in 0..500 {
                        assert!(seen.insert(s.word(i)), "duplicate word");
                    }
                }
            }
        }
    }

    #[test]
    fn sibling_hashes_differ() {
        let hs: HashSet<u64> = (1..=64u8).map(|c| child_hash(ROOT_HASH, c)).collect();
        assert_eq!(hs.len(), 64);
    }

    #[test]
    fn adjacent_streams_are_uncorrelated() {
        // Pearson correlation of unit draws from neighbouring vertex streams.
        let ts = trial_seed(1, 0);
        let a = KeyedStream::new(ts, child_hash(ROOT_HASH, 1), StreamKind::Up);
        let b = KeyedStream::new(ts, child_hash(ROOT_HASH, 2), StreamKind::Up);
        let n = 100_000;
        let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let (x, y) = (a.unit(i), b.unit(i));
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        let n = n as f64;
        let cov = sab / n - sa / n * sb / n;
        let r = cov / ((saa / n - (sa / n).powi(2)) * (sbb / n - (sb / n).powi(2))).sqrt();
        // 4 / sqrt(n) is a generous bound for independent streams
        assert!(r.abs() < 4.0 / n.sqrt(), "r = {r}");
        assert!((sa / n - 0.5).abs() < 4.0 * (1.0 / 12.0 / n).sqrt());
    }

    #[test]
    fn below_is_in_range() {
        for i in 0..1000u64 {
            assert!(below(mix64(i), 7) < 7);
        }
        assert_eq!(below(u64::MAX, 5), 4);
        assert_eq!(below(0, 5), 0);
    }
}
