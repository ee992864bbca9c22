//! Dealer-side image operations.
//!
//! The flow is `preprocess_image` → `share_image` → `hde_embed` (optional)
//! → `reconstruct_image` → `hde_extract_restore`. Pairs are always
//! horizontal neighbours `(x, 2j)`, `(x, 2j + 1)`, indexed row-major, and all
//! pair bookkeeping happens in the scrambled domain.

use thiserror::Error;

use crate::crt::{self, CrtError, ScalarShare, SisParams};
use crate::de::{self, AvailabilityMap, DeError, FidelityLimit, HlPair, PairOrder};
use crate::grid::{GrayImage, Grid};
use crate::keying::{self, KeyError, PublicRandomness, ScramblePermutation, SisKeyMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("image width {0} is odd")]
    OddWidth(usize),
    #[error("image is empty")]
    EmptyImage,
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("key of shareholder {0} is labeled, a pristine key is required")]
    LabeledKey(u16),
    #[error("no key supplied for shareholder {0}")]
    MissingKey(u16),
    #[error("payload of {len} bits exceeds capacity of {capacity} pairs")]
    PayloadTooLarge { len: usize, capacity: usize },
    #[error("share role {found:?} not accepted here")]
    RoleMismatch { found: ShareRole },
    #[error("shares carry different roles")]
    MixedRoles,
    #[error("side information disagrees with the input: {0}")]
    SideInfoMismatch(&'static str),
    #[error("preprocessed value {0} at ({1}, {2}) is not below q0")]
    ValueOutOfRange(u64, usize, usize),
    #[error("marked pair at slot {0} is inconsistent with the availability map")]
    CorruptMarkedPair(usize),
    #[error(transparent)]
    Crt(#[from] CrtError),
    #[error(transparent)]
    De(#[from] DeError),
    #[error(transparent)]
    Key(#[from] KeyError),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// What a DE-IS marked share was embedded into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Carrier {
    Plain,
    HdeMarked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShareRole {
    Plain,
    HdeMarked,
    DeisMarked { carrier: Carrier },
}

impl From<Carrier> for ShareRole {
    fn from(c: Carrier) -> Self {
        match c {
            Carrier::Plain => ShareRole::Plain,
            Carrier::HdeMarked => ShareRole::HdeMarked,
        }
    }
}

/// One shareholder's matrix of residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageShare {
    pub role: ShareRole,
    /// 1-based shareholder index, equal to the index of the key it was made with.
    pub index: u16,
    pub residues: Grid<u16>,
}

impl ImageShare {
    pub fn dims(&self) -> (usize, usize) {
        self.residues.dims()
    }
}

/// Dealer-held data needed to invert preprocessing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideInfo {
    pub map: AvailabilityMap,
    pub scramble_seed: u64,
    pub h_fid: FidelityLimit,
    /// Number of leading available pairs that carry a payload bit.
    pub payload_length: u32,
}

impl SideInfo {
    pub fn dims(&self) -> (usize, usize) {
        self.map.dims()
    }

    /// Embedding capacity in bits: the number of available pairs.
    pub fn capacity(&self) -> usize {
        self.map.available_pairs()
    }
}

/// Scrambled image where available pairs hold `(h, l)` and the rest raw
/// pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessedImage {
    pub values: Grid<u16>,
}

fn scramble_with<T: Copy + Default>(src: &Grid<T>, perm: &ScramblePermutation, forward: bool) -> Grid<T> {
    let (h, w) = src.dims();
    let per_row = w / 2;
    let mut out = Grid::filled(h, w, T::default());
    for k in 0..perm.len() {
        let (dst, from) = if forward {
            (k, perm.source(k))
        } else {
            (perm.source(k), k)
        };
        let (dx, dy) = (dst / per_row, 2 * (dst % per_row));
        let (sx, sy) = (from / per_row, 2 * (from % per_row));
        out.set(dx, dy, src.at(sx, sy));
        out.set(dx, dy + 1, src.at(sx, sy + 1));
    }
    out
}

fn permutation_for(height: usize, width: usize, seed: u64) -> Result<ScramblePermutation> {
    if !width.is_multiple_of(2) {
        return Err(PipelineError::OddWidth(width));
    }
    if height == 0 || width == 0 {
        return Err(PipelineError::EmptyImage);
    }
    Ok(keying::gen_permutation(seed, height * width / 2)?)
}

/// Moves pixel pairs to their scrambled slots.
pub fn scramble_image(img: &GrayImage, seed: u64) -> Result<GrayImage> {
    let perm = permutation_for(img.height(), img.width(), seed)?;
    Ok(scramble_with(img, &perm, true))
}

/// Inverse of [`scramble_image`].
pub fn unscramble_image(img: &GrayImage, seed: u64) -> Result<GrayImage> {
    let perm = permutation_for(img.height(), img.width(), seed)?;
    Ok(scramble_with(img, &perm, false))
}

pub fn preprocess_image(
    img: &GrayImage,
    h_fid: FidelityLimit,
    scramble_seed: u64,
) -> Result<(PreprocessedImage, SideInfo)> {
    let (height, width) = img.dims();
    let scrambled = scramble_image(img, scramble_seed)?;
    let mut map = AvailabilityMap::empty(height, width);
    let mut values = scrambled.map(|&p| p as u16);
    for k in 0..map.pair_count() {
        let (x, y) = map.pair_position(k);
        let (hl, order) = de::pair_to_hl(scrambled.at(x, y), scrambled.at(x, y + 1));
        if de::is_available(hl, h_fid) {
            values.set(x, y, hl.h as u16);
            values.set(x, y + 1, hl.l as u16);
            map.set_pair(k, Some(order));
        }
    }
    Ok((
        PreprocessedImage { values },
        SideInfo {
            map,
            scramble_seed,
            h_fid,
            payload_length: 0,
        },
    ))
}

fn check_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(PipelineError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `c_i = (v + r·q0) mod ID_i` at every position, one share per key.
pub fn share_image(
    pre: &PreprocessedImage,
    keys: &[SisKeyMatrix],
    randomness: &PublicRandomness,
    params: &SisParams,
) -> Result<Vec<ImageShare>> {
    let dims = pre.values.dims();
    check_dims(dims, randomness.r.dims())?;
    for key in keys {
        check_dims(dims, key.dims())?;
        if !key.is_pristine() {
            return Err(PipelineError::LabeledKey(key.index));
        }
    }
    let q0 = params.q0();
    let mut shares: Vec<ImageShare> = keys
        .iter()
        .map(|k| ImageShare {
            role: ShareRole::Plain,
            index: k.index,
            residues: Grid::filled(dims.0, dims.1, 0),
        })
        .collect();
    for x in 0..dims.0 {
        for y in 0..dims.1 {
            let v = pre.values.at(x, y) as u64;
            if v >= q0 {
                return Err(PipelineError::ValueOutOfRange(v, x, y));
            }
            let r = randomness.r.at(x, y);
            if r >= params.r_bound() {
                return Err(CrtError::RandomizerOutOfRange {
                    value: r,
                    bound: params.r_bound(),
                }
                .into());
            }
            let g = crt::lift(v, r, q0)?;
            for (share, key) in shares.iter_mut().zip(keys) {
                let id = key.primes.at(x, y) as u128;
                share.residues.set(x, y, (g % id) as u16);
            }
        }
    }
    Ok(shares)
}

/// Pairs every share with the key of the same shareholder.
fn keys_for<'a>(shares: &[ImageShare], keys: &'a [SisKeyMatrix]) -> Result<Vec<&'a SisKeyMatrix>> {
    shares
        .iter()
        .map(|s| {
            let key = keys
                .iter()
                .find(|k| k.index == s.index)
                .ok_or(PipelineError::MissingKey(s.index))?;
            check_dims(s.dims(), key.dims())?;
            if !key.is_pristine() {
                return Err(PipelineError::LabeledKey(key.index));
            }
            Ok(key)
        })
        .collect()
}

fn scalar_shares(
    shares: &[ImageShare],
    keys: &[&SisKeyMatrix],
    x: usize,
    y: usize,
    buf: &mut Vec<ScalarShare>,
) {
    buf.clear();
    buf.extend(shares.iter().zip(keys).map(|(s, k)| ScalarShare {
        modulus: k.primes.at(x, y) as u64,
        residue: s.residues.at(x, y) as u64,
    }));
}

/// Homomorphic difference expansion over all shares.
///
/// Payload bits go to available pairs in row-major slot order. For a pair
/// carrying bit `b`, every shareholder adds the data share `d = (c + b) mod ID`
/// to the residue at the pair's difference position, so the shared value
/// becomes `2g + b` and reconstructs to `2h + b`.
pub fn hde_embed(
    shares: &[ImageShare],
    keys: &[SisKeyMatrix],
    params: &SisParams,
    side: &SideInfo,
    payload: &[bool],
) -> Result<(Vec<ImageShare>, SideInfo)> {
    hde_embed_with_limit(shares, keys, params, side, payload, params.u())
}

/// [`hde_embed`] with an explicit bound on the doubled lifted value.
///
/// A pair whose `2g + 1` would reach `limit` is reverted to raw pixels (by
/// adding public offsets to both positions) and its availability flags are
/// cleared; the bit moves on to the next pair.
pub(crate) fn hde_embed_with_limit(
    shares: &[ImageShare],
    keys: &[SisKeyMatrix],
    params: &SisParams,
    side: &SideInfo,
    payload: &[bool],
    limit: u128,
) -> Result<(Vec<ImageShare>, SideInfo)> {
    let t = params.threshold();
    if shares.len() < t {
        return Err(CrtError::InsufficientShares {
            have: shares.len(),
            need: t,
        }
        .into());
    }
    for s in shares {
        if s.role != ShareRole::Plain {
            return Err(PipelineError::RoleMismatch { found: s.role });
        }
        check_dims(side.dims(), s.dims())?;
    }
    let capacity = side.capacity();
    if payload.len() > capacity {
        return Err(PipelineError::PayloadTooLarge {
            len: payload.len(),
            capacity,
        });
    }
    let matched = keys_for(shares, keys)?;
    let mut out: Vec<ImageShare> = shares.to_vec();
    let mut side_out = side.clone();
    let mut buf = Vec::with_capacity(shares.len());
    let mut bits = payload.iter().copied().peekable();
    let mut consumed = 0u32;
    let q0 = params.q0() as u128;

    for k in 0..side.map.pair_count() {
        let Some(&bit) = bits.peek() else { break };
        let Some(order) = side.map.pair_state(k) else {
            continue;
        };
        let (x, y) = side.map.pair_position(k);
        scalar_shares(&out, &matched, x, y, &mut buf);
        let g = crt::garner(&buf[..t])?;
        if 2 * g + 1 < limit {
            for (share, key) in out.iter_mut().zip(&matched) {
                let id = key.primes.at(x, y) as u32;
                let c = share.residues.at(x, y) as u32;
                let d = (c + bit as u32) % id;
                share.residues.set(x, y, ((c + d) % id) as u16);
            }
            bits.next();
            consumed += 1;
        } else {
            scalar_shares(&out, &matched, x, y + 1, &mut buf);
            let g_l = crt::garner(&buf[..t])?;
            let hl = HlPair {
                h: (g % q0) as u32,
                l: (g_l % q0) as u32,
            };
            let (p1, p2) = de::hl_to_pair(hl, order)?;
            for (share, key) in out.iter_mut().zip(&matched) {
                for (col, from, to) in [(y, hl.h, p1 as u32), (y + 1, hl.l, p2 as u32)] {
                    let id = key.primes.at(x, col) as i64;
                    let delta = (to as i64 - from as i64).rem_euclid(id);
                    let c = share.residues.at(x, col) as i64;
                    share.residues.set(x, col, ((c + delta) % id) as u16);
                }
            }
            side_out.map.set_pair(k, None);
        }
    }
    if bits.peek().is_some() {
        return Err(PipelineError::PayloadTooLarge {
            len: payload.len(),
            capacity: consumed as usize,
        });
    }
    for s in &mut out {
        s.role = ShareRole::HdeMarked;
    }
    side_out.payload_length = consumed;
    Ok((out, side_out))
}

/// Reconstructs the (possibly marked) image from at least `t` shares.
pub fn reconstruct_image(
    shares: &[ImageShare],
    keys: &[SisKeyMatrix],
    params: &SisParams,
    side: &SideInfo,
) -> Result<GrayImage> {
    let t = params.threshold();
    if shares.len() < t {
        return Err(CrtError::InsufficientShares {
            have: shares.len(),
            need: t,
        }
        .into());
    }
    let role = shares[0].role;
    if matches!(role, ShareRole::DeisMarked { .. }) {
        return Err(PipelineError::RoleMismatch { found: role });
    }
    if shares.iter().any(|s| s.role != role) {
        return Err(PipelineError::MixedRoles);
    }
    let dims = side.dims();
    for s in shares {
        check_dims(dims, s.dims())?;
    }
    let matched = keys_for(shares, keys)?;
    let q0 = params.q0();

    let mut values: Grid<u16> = Grid::filled(dims.0, dims.1, 0);
    let mut buf = Vec::with_capacity(shares.len());
    for x in 0..dims.0 {
        for y in 0..dims.1 {
            scalar_shares(shares, &matched, x, y, &mut buf);
            let v = crt::reconstruct_scalar(&buf, t, q0)?;
            values.set(x, y, v as u16);
        }
    }

    let mut scrambled: GrayImage = Grid::filled(dims.0, dims.1, 0);
    for k in 0..side.map.pair_count() {
        let (x, y) = side.map.pair_position(k);
        let (a, b) = (values.at(x, y) as u32, values.at(x, y + 1) as u32);
        let (p1, p2) = match side.map.pair_state(k) {
            Some(order) => de::hl_to_pair(HlPair { h: a, l: b }, order)?,
            None if a <= 255 && b <= 255 => (a as u8, b as u8),
            None => return Err(CrtError::InconsistentShares.into()),
        };
        scrambled.set(x, y, p1);
        scrambled.set(x, y + 1, p2);
    }
    unscramble_image(&scrambled, side.scramble_seed)
}

/// Extracts the payload from a reconstructed marked image and restores the
/// original.
pub fn hde_extract_restore(marked: &GrayImage, side: &SideInfo) -> Result<(Vec<bool>, GrayImage)> {
    check_dims(side.dims(), marked.dims())?;
    if !side.map.is_well_formed() {
        return Err(PipelineError::SideInfoMismatch("malformed availability map"));
    }
    let wanted = side.payload_length as usize;
    if wanted > side.capacity() {
        return Err(PipelineError::SideInfoMismatch(
            "payload length exceeds available pairs",
        ));
    }
    let mut scrambled = scramble_image(marked, side.scramble_seed)?;
    let mut bits = Vec::with_capacity(wanted);
    for k in 0..side.map.pair_count() {
        if bits.len() == wanted {
            break;
        }
        let Some(order) = side.map.pair_state(k) else {
            continue;
        };
        let (x, y) = side.map.pair_position(k);
        let (a, b) = (scrambled.at(x, y), scrambled.at(x, y + 1));
        let (big, small) = match order {
            PairOrder::First => (a, b),
            PairOrder::Second => (b, a),
        };
        if big < small {
            return Err(PipelineError::CorruptMarkedPair(k));
        }
        let (bit, h) = de::de_extract_h((big - small) as u32);
        let l = (a as u32 + b as u32) / 2;
        let (p1, p2) = de::hl_to_pair(HlPair { h, l }, order)?;
        scrambled.set(x, y, p1);
        scrambled.set(x, y + 1, p2);
        bits.push(bit);
    }
    Ok((bits, unscramble_image(&scrambled, side.scramble_seed)?))
}
