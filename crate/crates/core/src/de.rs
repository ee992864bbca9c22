//! Difference expansion on 8-bit pixel pairs.
//!
//! A pair is stored as `(h, l)`: the non-negative difference between its
//! larger and smaller pixel, and the floored average. Which member was the
//! larger one travels separately as a [`PairOrder`].

use thiserror::Error;

use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeError {
    #[error("pair (h = {h}, l = {l}) does not decode into [0, 255]")]
    OverflowedPair { h: u32, l: u32 },
    #[error("pair (h = {h}, l = {l}) cannot carry a bit without overflow")]
    NotAvailable { h: u32, l: u32 },
}

/// Which member of a pair holds the larger pixel. Ties count as `First`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairOrder {
    First,
    Second,
}

/// Difference and average of a pixel pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HlPair {
    pub h: u32,
    pub l: u32,
}

/// Upper bound on the pair difference eligible for embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FidelityLimit {
    Bounded(u16),
    Unbounded,
}

impl FidelityLimit {
    pub fn admits(self, h: u32) -> bool {
        match self {
            FidelityLimit::Bounded(lim) => h <= lim as u32,
            FidelityLimit::Unbounded => true,
        }
    }
}

impl std::fmt::Display for FidelityLimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FidelityLimit::Bounded(v) => write!(f, "{v}"),
            FidelityLimit::Unbounded => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for FidelityLimit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "∞" | "unbounded" => Ok(FidelityLimit::Unbounded),
            _ => s
                .parse::<u16>()
                .ok()
                .filter(|&v| v != u16::MAX)
                .map(FidelityLimit::Bounded)
                .ok_or_else(|| format!("invalid fidelity limit `{s}`")),
        }
    }
}

pub fn pair_to_hl(p1: u8, p2: u8) -> (HlPair, PairOrder) {
    let (big, small, order) = if p1 >= p2 {
        (p1, p2, PairOrder::First)
    } else {
        (p2, p1, PairOrder::Second)
    };
    let hl = HlPair {
        h: (big - small) as u32,
        l: (p1 as u32 + p2 as u32) / 2,
    };
    (hl, order)
}

/// Inverse of [`pair_to_hl`]; also decodes expanded differences.
pub fn hl_to_pair(hl: HlPair, order: PairOrder) -> Result<(u8, u8), DeError> {
    let HlPair { h, l } = hl;
    let big = l + h.div_ceil(2);
    let small = l.checked_sub(h / 2);
    match small {
        Some(small) if big <= 255 => Ok(match order {
            PairOrder::First => (big as u8, small as u8),
            PairOrder::Second => (small as u8, big as u8),
        }),
        _ => Err(DeError::OverflowedPair { h, l }),
    }
}

/// Largest difference that still decodes into `[0, 255]` for average `l`.
fn headroom(l: u32) -> u32 {
    (2 * (255u32.saturating_sub(l))).min(2 * l + 1)
}

/// Whether the pair can carry one bit: both `h` and `2h + 1` stay within
/// the decodable range and `h` passes the fidelity limit.
#[allow(clippy::int_plus_one)]
pub fn is_available(hl: HlPair, h_fid: FidelityLimit) -> bool {
    let room = headroom(hl.l);
    hl.l <= 255 && hl.h <= room && 2 * hl.h + 1 <= room && h_fid.admits(hl.h)
}

/// `h' = 2h + bit`.
pub fn de_embed(hl: HlPair, bit: bool) -> Result<u32, DeError> {
    if !is_available(hl, FidelityLimit::Unbounded) {
        return Err(DeError::NotAvailable { h: hl.h, l: hl.l });
    }
    Ok(de_embed_h(hl.h, bit))
}

pub fn de_embed_h(h: u32, bit: bool) -> u32 {
    2 * h + bit as u32
}

/// `(LSB(h'), ⌊h'/2⌋)`.
pub fn de_extract_h(h_marked: u32) -> (bool, u32) {
    (h_marked & 1 == 1, h_marked >> 1)
}

/// Per-pixel availability flags in the scrambled domain.
///
/// Each horizontal pair has at most one flag set: on the larger pixel of an
/// available pair. `(0, 0)` marks a pair stored as raw pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvailabilityMap {
    pub bits: Grid<bool>,
}

impl AvailabilityMap {
    pub fn empty(height: usize, width: usize) -> Self {
        AvailabilityMap {
            bits: Grid::filled(height, width, false),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.bits.dims()
    }

    pub fn pairs_per_row(&self) -> usize {
        self.bits.width() / 2
    }

    pub fn pair_count(&self) -> usize {
        self.bits.len() / 2
    }

    /// Order of pair `k` (row-major pair index) if it is available.
    pub fn pair_state(&self, k: usize) -> Option<PairOrder> {
        let (x, y) = self.pair_position(k);
        match (self.bits.at(x, y), self.bits.at(x, y + 1)) {
            (true, _) => Some(PairOrder::First),
            (false, true) => Some(PairOrder::Second),
            (false, false) => None,
        }
    }

    pub fn set_pair(&mut self, k: usize, state: Option<PairOrder>) {
        let (x, y) = self.pair_position(k);
        self.bits.set(x, y, state == Some(PairOrder::First));
        self.bits.set(x, y + 1, state == Some(PairOrder::Second));
    }

    /// Pixel coordinates of the left member of pair `k`.
    pub fn pair_position(&self, k: usize) -> (usize, usize) {
        let per_row = self.pairs_per_row();
        (k / per_row, 2 * (k % per_row))
    }

    pub fn available_pairs(&self) -> usize {
        (0..self.pair_count())
            .filter(|&k| self.pair_state(k).is_some())
            .count()
    }

    /// True when no pair has both flags set.
    pub fn is_well_formed(&self) -> bool {
        self.bits.width().is_multiple_of(2)
            && self
                .bits
                .as_slice()
                .chunks(2)
                .all(|c| !(c[0] && c[1]))
    }
}
