//! Asmuth–Bloom (t, n) sharing of a single value.
//!
//! A secret `m < q0` is lifted to `g = m + r·q0` and stored as the residues
//! `g mod q_i` for pairwise distinct primes `q_i`. Any `t` residues determine
//! `g` by Chinese remaindering as long as `g` is smaller than the product of
//! the `t` moduli involved; `g mod q0` is the secret.

use thiserror::Error;

/// Largest supported bit width. Residues and primes are stored as `u16`.
pub const MAX_BIT_WIDTH: u32 = 15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrtError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {value} outside the admissible range ({lo}, {hi})")]
    PoolOutOfRange { value: u64, lo: u64, hi: u64 },
    #[error("threshold condition violated: product of the t smallest primes must exceed q0 times the product of the t-1 largest")]
    ThresholdConditionViolated,
    #[error("pool holds {have} primes, need at least {need}")]
    PoolTooSmall { have: usize, need: usize },
    #[error("pool must be strictly ascending")]
    PoolNotAscending,
    #[error("invalid threshold: need 2 <= t < n (t = {t}, n = {n})")]
    InvalidThreshold { t: usize, n: usize },
    #[error("bit width {0} unsupported (1..=15)")]
    InvalidBitWidth(u32),
    #[error("parameters too large for exact 128-bit arithmetic")]
    ParameterTooLarge,
    #[error("value {value} not below {bound}")]
    ValueOutOfRange { value: u64, bound: u64 },
    #[error("randomizer {value} not below {bound}")]
    RandomizerOutOfRange { value: u64, bound: u64 },
    #[error("residue {residue} not below modulus {modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },
    #[error("modulus {0} used twice")]
    DuplicateModulus(u64),
    #[error("{have} shares supplied, threshold is {need}")]
    InsufficientShares { have: usize, need: usize },
    #[error("shares are inconsistent with each other")]
    InconsistentShares,
    #[error("cannot add shares over different moduli ({0} vs {1})")]
    ModulusMismatch(u64, u64),
}

pub type Result<T> = std::result::Result<T, CrtError>;

/// Validated global sharing parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SisParams {
    w: u32,
    t: usize,
    n: usize,
    q0: u64,
    pool: Vec<u64>,
    u: u128,
    r_bound: u64,
}

/// One shareholder's residue of a lifted secret.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarShare {
    pub modulus: u64,
    pub residue: u64,
}

impl ScalarShare {
    pub fn new(modulus: u64, residue: u64) -> Result<Self> {
        if residue >= modulus {
            return Err(CrtError::ResidueOutOfRange { residue, modulus });
        }
        Ok(ScalarShare { modulus, residue })
    }
}

pub fn is_prime(v: u64) -> bool {
    if v < 2 {
        return false;
    }
    if v.is_multiple_of(2) {
        return v == 2;
    }
    let mut d = 3;
    while d * d <= v {
        if v.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn checked_product<'a>(values: impl IntoIterator<Item = &'a u64>) -> Result<u128> {
    values.into_iter().try_fold(1u128, |acc, &v| {
        acc.checked_mul(v as u128).ok_or(CrtError::ParameterTooLarge)
    })
}

impl SisParams {
    pub fn new(w: u32, t: usize, n: usize, q0: u64, pool: Vec<u64>) -> Result<Self> {
        if w == 0 || w > MAX_BIT_WIDTH {
            return Err(CrtError::InvalidBitWidth(w));
        }
        if t < 2 || n <= t {
            return Err(CrtError::InvalidThreshold { t, n });
        }
        let lo = 1u64 << w;
        let hi = 1u64 << (w + 1);
        if !is_prime(q0) {
            return Err(CrtError::NotPrime(q0));
        }
        if q0 < lo || q0 > hi {
            return Err(CrtError::PoolOutOfRange { value: q0, lo, hi });
        }
        for &p in &pool {
            if !is_prime(p) {
                return Err(CrtError::NotPrime(p));
            }
            if p <= lo || p >= hi || p <= q0 {
                return Err(CrtError::PoolOutOfRange {
                    value: p,
                    lo: lo.max(q0),
                    hi,
                });
            }
        }
        if pool.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CrtError::PoolNotAscending);
        }
        if pool.len() < n {
            return Err(CrtError::PoolTooSmall {
                have: pool.len(),
                need: n,
            });
        }
        // Reconstruction runs Garner's algorithm in u128 over any t moduli.
        checked_product(&pool[pool.len() - t..])?
            .checked_mul(2)
            .ok_or(CrtError::ParameterTooLarge)?;

        let u = checked_product(&pool[..t])?;
        let bound = checked_product(&pool[pool.len() - (t - 1)..])?
            .checked_mul(q0 as u128)
            .ok_or(CrtError::ParameterTooLarge)?;
        if u <= bound {
            return Err(CrtError::ThresholdConditionViolated);
        }
        let r_bound = u / (2 * q0 as u128);
        if r_bound == 0 {
            return Err(CrtError::ThresholdConditionViolated);
        }
        let r_bound = u64::try_from(r_bound).map_err(|_| CrtError::ParameterTooLarge)?;

        let params = SisParams {
            w,
            t,
            n,
            q0,
            pool,
            u,
            r_bound,
        };
        // Every n-subset that key generation may assign must satisfy the
        // threshold condition on its own; checking the extremal one covers all.
        if !params.subset_condition(&params.worst_case_subset())? {
            return Err(CrtError::ThresholdConditionViolated);
        }
        Ok(params)
    }

    /// `n = 7, t = 5, q0 = 257` over the ten primes 457..=509.
    pub fn standard() -> Self {
        SisParams::new(
            8,
            5,
            7,
            257,
            vec![457, 461, 463, 467, 479, 487, 491, 499, 503, 509],
        )
        .expect("standard parameters are valid")
    }

    pub fn bit_width(&self) -> u32 {
        self.w
    }

    pub fn threshold(&self) -> usize {
        self.t
    }

    pub fn parties(&self) -> usize {
        self.n
    }

    pub fn q0(&self) -> u64 {
        self.q0
    }

    pub fn pool(&self) -> &[u64] {
        &self.pool
    }

    /// Product of the `t` smallest pool primes.
    pub fn u(&self) -> u128 {
        self.u
    }

    /// Exclusive upper bound of the randomizer, `⌊u / (2·q0)⌋`.
    pub fn r_bound(&self) -> u64 {
        self.r_bound
    }

    /// Whether `subset` (any order) satisfies the threshold condition on its
    /// own: the product of its `t` smallest members exceeds `q0` times the
    /// product of its `t - 1` largest.
    pub fn subset_condition(&self, subset: &[u64]) -> Result<bool> {
        if subset.len() < self.t {
            return Err(CrtError::PoolTooSmall {
                have: subset.len(),
                need: self.t,
            });
        }
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        let low = checked_product(&sorted[..self.t])?;
        let high = checked_product(&sorted[sorted.len() - (self.t - 1)..])?
            .checked_mul(self.q0 as u128)
            .ok_or(CrtError::ParameterTooLarge)?;
        Ok(low > high)
    }

    /// The n-subset of the pool minimizing the threshold-condition margin.
    ///
    /// After cancelling the members shared by both products, the condition
    /// only involves the lowest `a` and highest `b` members of the subset,
    /// so taking those from the ends of the pool is the worst case.
    pub fn worst_case_subset(&self) -> Vec<u64> {
        let (n, t, len) = (self.n, self.t, self.pool.len());
        let b = n - t.max(n - t + 1);
        let mut subset = self.pool[..n - b].to_vec();
        subset.extend_from_slice(&self.pool[len - b..]);
        subset
    }

    /// Shares `m` with randomizer `r` over `moduli`, enforcing `r < r_bound`.
    pub fn share(&self, m: u64, r: u64, moduli: &[u64]) -> Result<Vec<ScalarShare>> {
        if r >= self.r_bound {
            return Err(CrtError::RandomizerOutOfRange {
                value: r,
                bound: self.r_bound,
            });
        }
        share_scalar(m, r, self.q0, moduli)
    }

    pub fn reconstruct(&self, shares: &[ScalarShare]) -> Result<u64> {
        reconstruct_scalar(shares, self.t, self.q0)
    }
}

/// `g = m + r·q0`, then one residue per modulus.
pub fn share_scalar(m: u64, r: u64, q0: u64, moduli: &[u64]) -> Result<Vec<ScalarShare>> {
    if m >= q0 {
        return Err(CrtError::ValueOutOfRange { value: m, bound: q0 });
    }
    check_distinct(moduli.iter().copied())?;
    let g = lift(m, r, q0)?;
    Ok(moduli
        .iter()
        .map(|&q| ScalarShare {
            modulus: q,
            residue: (g % q as u128) as u64,
        })
        .collect())
}

pub(crate) fn lift(m: u64, r: u64, q0: u64) -> Result<u128> {
    (r as u128)
        .checked_mul(q0 as u128)
        .and_then(|v| v.checked_add(m as u128))
        .ok_or(CrtError::ParameterTooLarge)
}

fn check_distinct(moduli: impl Iterator<Item = u64>) -> Result<()> {
    let mut seen: Vec<u64> = Vec::new();
    for q in moduli {
        if seen.contains(&q) {
            return Err(CrtError::DuplicateModulus(q));
        }
        seen.push(q);
    }
    Ok(())
}

/// Recovers the secret from at least `t` shares.
///
/// The first `t` shares determine the lifted value `g'`; any further shares
/// are only checked against it.
pub fn reconstruct_scalar(shares: &[ScalarShare], t: usize, q0: u64) -> Result<u64> {
    let g = reconstruct_lifted(shares, t)?;
    Ok((g % q0 as u128) as u64)
}

/// Like [`reconstruct_scalar`] but returns `g'` itself.
pub fn reconstruct_lifted(shares: &[ScalarShare], t: usize) -> Result<u128> {
    if shares.len() < t || t == 0 {
        return Err(CrtError::InsufficientShares {
            have: shares.len(),
            need: t,
        });
    }
    check_distinct(shares.iter().map(|s| s.modulus))?;
    for s in shares {
        if s.residue >= s.modulus {
            return Err(CrtError::ResidueOutOfRange {
                residue: s.residue,
                modulus: s.modulus,
            });
        }
    }
    let g = garner(&shares[..t])?;
    if shares[t..]
        .iter()
        .any(|s| (g % s.modulus as u128) as u64 != s.residue)
    {
        return Err(CrtError::InconsistentShares);
    }
    Ok(g)
}

/// Mixed-radix CRT: the unique `g < ∏ modulus_i` with the given residues.
pub(crate) fn garner(shares: &[ScalarShare]) -> Result<u128> {
    let mut g: u128 = 0;
    let mut radix: u128 = 1;
    for s in shares {
        let m = s.modulus as u128;
        let inv = mod_inverse((radix % m) as u64, s.modulus).ok_or(CrtError::InconsistentShares)?;
        let current = (g % m) as u64;
        let diff = (s.residue + s.modulus - current) % s.modulus;
        let digit = (diff as u128 * inv as u128) % m;
        g = digit
            .checked_mul(radix)
            .and_then(|v| v.checked_add(g))
            .ok_or(CrtError::ParameterTooLarge)?;
        radix = radix.checked_mul(m).ok_or(CrtError::ParameterTooLarge)?;
    }
    Ok(g)
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

pub fn homomorphic_add(a: ScalarShare, b: ScalarShare) -> Result<ScalarShare> {
    if a.modulus != b.modulus {
        return Err(CrtError::ModulusMismatch(a.modulus, b.modulus));
    }
    Ok(ScalarShare {
        modulus: a.modulus,
        residue: (a.residue + b.residue) % a.modulus,
    })
}
