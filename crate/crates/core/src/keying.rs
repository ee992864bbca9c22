//! Seeded key material.
//!
//! Every generator is a ChaCha20 stream keyed by a 64-bit seed, with a
//! distinct stream id per purpose, so the same seed may be reused across
//! purposes without correlated output. Bounded integers use rejection
//! sampling on whole `u64` words; nothing depends on `rand`'s own
//! distribution code, which keeps outputs stable across crate versions.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::crt::SisParams;
use crate::grid::Grid;

/// Algorithm identifier written to file headers: ChaCha20, `seed_from_u64`
/// key expansion, per-purpose stream ids.
pub const PRNG_CHACHA20: u8 = 1;

const STREAM_SIS_KEYS: u64 = 1;
const STREAM_RANDOMIZER: u64 = 2;
const STREAM_SCRAMBLE: u64 = 3;
const STREAM_KEYSTREAM: u64 = 4;
pub(crate) const STREAM_SAMPLER: u64 = 5;
const STREAM_PAYLOAD: u64 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error("image width {0} is odd")]
    OddWidth(usize),
    #[error("no prime assignment satisfies the threshold condition at ({0}, {1})")]
    SubsetConditionViolated(usize, usize),
    #[error("empty permutation")]
    EmptyPermutation,
}

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Uniform integer in `[0, bound)`.
pub(crate) fn uniform_below(rng: &mut impl RngCore, bound: u64) -> u64 {
    assert!(bound > 0);
    // Largest multiple of `bound` representable in u64 (as an exclusive limit).
    let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return v % bound;
        }
    }
}

/// One shareholder's prime matrix.
///
/// Pristine entries are odd pool primes. While a share is DE-IS marked an
/// entry may be labeled by clearing its low bit (`prime - 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SisKeyMatrix {
    /// 1-based shareholder index.
    pub index: u16,
    pub primes: Grid<u16>,
}

impl SisKeyMatrix {
    pub fn is_pristine(&self) -> bool {
        self.primes.iter().all(|p| p & 1 == 1)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.primes.dims()
    }
}

/// Draws per-position prime assignments for all `n` shareholders.
///
/// At every position an n-subset of the pool is sampled without replacement
/// (a partial Fisher–Yates over pool indices); the i-th drawn prime goes to
/// shareholder i.
pub fn gen_sis_keys(
    params: &SisParams,
    height: usize,
    width: usize,
    seed: u64,
) -> Result<Vec<SisKeyMatrix>, KeyError> {
    if !width.is_multiple_of(2) {
        return Err(KeyError::OddWidth(width));
    }
    let n = params.parties();
    let pool = params.pool();
    let mut rng = stream(seed, STREAM_SIS_KEYS);
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let mut mats: Vec<Grid<u16>> = (0..n).map(|_| Grid::filled(height, width, 0)).collect();
    let mut chosen = vec![0u64; n];
    for x in 0..height {
        for y in 0..width {
            for i in 0..n {
                let j = i + uniform_below(&mut rng, (pool.len() - i) as u64) as usize;
                order.swap(i, j);
                chosen[i] = pool[order[i]];
            }
            if !params.subset_condition(&chosen).unwrap_or(false) {
                return Err(KeyError::SubsetConditionViolated(x, y));
            }
            for (mat, &p) in mats.iter_mut().zip(&chosen) {
                mat.set(x, y, p as u16);
            }
        }
    }
    Ok(mats
        .into_iter()
        .enumerate()
        .map(|(i, primes)| SisKeyMatrix {
            index: (i + 1) as u16,
            primes,
        })
        .collect())
}

/// The public randomizer matrix `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicRandomness {
    pub r: Grid<u64>,
}

pub fn gen_public_randomness(
    params: &SisParams,
    height: usize,
    width: usize,
    seed: u64,
) -> PublicRandomness {
    let mut rng = stream(seed, STREAM_RANDOMIZER);
    let bound = params.r_bound();
    PublicRandomness {
        r: Grid::from_fn(height, width, |_, _| uniform_below(&mut rng, bound)),
    }
}

/// The data-hiding key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyStream {
    pub seed: u64,
}

impl KeyStream {
    pub fn new(seed: u64) -> Self {
        KeyStream { seed }
    }

    /// Bits in embedding order: 64-bit words, least significant bit first.
    pub fn iter(&self) -> KeyStreamBits {
        KeyStreamBits {
            rng: stream(self.seed, STREAM_KEYSTREAM),
            word: 0,
            left: 0,
        }
    }

    pub fn bits(&self, count: usize) -> Vec<bool> {
        self.iter().take(count).collect()
    }
}

pub struct KeyStreamBits {
    rng: ChaCha20Rng,
    word: u64,
    left: u32,
}

impl Iterator for KeyStreamBits {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        Some(bit)
    }
}

/// Shorthand for `KeyStream::new(seed).bits(count)`.
pub fn keystream_bits(ks: &KeyStream, count: usize) -> Vec<bool> {
    ks.bits(count)
}

/// Uniform random payload bits, independent of every other stream.
pub fn random_bits(seed: u64, count: usize) -> Vec<bool> {
    let mut rng = stream(seed, STREAM_PAYLOAD);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let word = rng.next_u64();
        out.extend((0..64).map(|i| (word >> i) & 1 == 1).take(count - out.len()));
    }
    out
}

/// Scramble of pixel pairs. `forward[k]` is the original pair placed at
/// scrambled slot `k`; `inverse` undoes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScramblePermutation {
    pub seed: u64,
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

impl ScramblePermutation {
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Original pair index stored at scrambled slot `k`.
    pub fn source(&self, k: usize) -> usize {
        self.forward[k] as usize
    }

    /// Scrambled slot holding original pair `p`.
    pub fn slot(&self, p: usize) -> usize {
        self.inverse[p] as usize
    }

    pub fn forward(&self) -> &[u32] {
        &self.forward
    }

    pub fn inverse(&self) -> &[u32] {
        &self.inverse
    }
}

/// Fisher–Yates shuffle of `0..pair_count`.
pub fn gen_permutation(seed: u64, pair_count: usize) -> Result<ScramblePermutation, KeyError> {
    if pair_count == 0 {
        return Err(KeyError::EmptyPermutation);
    }
    let mut rng = stream(seed, STREAM_SCRAMBLE);
    let mut forward: Vec<u32> = (0..pair_count as u32).collect();
    for i in (1..pair_count).rev() {
        let j = uniform_below(&mut rng, i as u64 + 1) as usize;
        forward.swap(i, j);
    }
    let mut inverse = vec![0u32; pair_count];
    for (k, &p) in forward.iter().enumerate() {
        inverse[p as usize] = k as u32;
    }
    Ok(ScramblePermutation {
        seed,
        forward,
        inverse,
    })
}
