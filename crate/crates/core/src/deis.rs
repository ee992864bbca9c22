//! Difference expansion between a share's residues and the shareholder's own
//! key primes.
//!
//! For a residue `c < ID` the difference `h_L = ID - c` is expanded to
//! `c'' = 2·h_L + b_L`. Positions that cannot carry a bit are labeled by
//! storing `ID - 1` (an even number) in the key, which extraction and
//! recovery read back.

use thiserror::Error;

use crate::keying::{KeyStream, SisKeyMatrix};
use crate::pipeline::{Carrier, ImageShare, ShareRole};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeisError {
    #[error("residue {residue} not below key prime {prime}")]
    ResidueOutOfRange { residue: u16, prime: u16 },
    #[error("key of shareholder {0} is already labeled")]
    KeyNotPristine(u16),
    #[error("share {share:?} and key {key:?} dimensions differ")]
    DimensionMismatch {
        share: (usize, usize),
        key: (usize, usize),
    },
    #[error("share of shareholder {share} does not belong to key {key}")]
    IndexMismatch { share: u16, key: u16 },
    #[error("share role {0:?} not accepted here")]
    RoleMismatch(ShareRole),
}

pub type Result<T> = std::result::Result<T, DeisError>;

/// Whether `c` can absorb one bit against prime `id`: the expanded value
/// `2(ID - c) + 1` must stay below `ID`.
pub fn deis_available(c: u16, id: u16) -> Result<bool> {
    if c >= id {
        return Err(DeisError::ResidueOutOfRange {
            residue: c,
            prime: id,
        });
    }
    let h = (id - c) as u32;
    Ok(2 * h + 1 < id as u32)
}

/// `2(ID - c) + b_L` for an available residue.
pub fn expand_residue(c: u16, id: u16, bit: bool) -> u16 {
    2 * (id - c) + bit as u16
}

/// `(LSB(c''), ID - ⌊c''/2⌋)`.
pub fn contract_residue(marked: u16, id: u16) -> (bool, u16) {
    (marked & 1 == 1, id - marked / 2)
}

fn check_pair(share: &ImageShare, key: &SisKeyMatrix) -> Result<()> {
    if share.dims() != key.dims() {
        return Err(DeisError::DimensionMismatch {
            share: share.dims(),
            key: key.dims(),
        });
    }
    if share.index != key.index {
        return Err(DeisError::IndexMismatch {
            share: share.index,
            key: key.index,
        });
    }
    Ok(())
}

/// Outcome of [`deis_embed`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeisEmbedding {
    pub share: ImageShare,
    pub key: SisKeyMatrix,
    pub embedded: usize,
}

/// Embeds `payload` (row-major scan, one keystream bit per payload bit).
///
/// Positions that are unavailable, or available once the payload has run
/// out, get their key entry labeled and keep their residue.
pub fn deis_embed(
    share: &ImageShare,
    key: &SisKeyMatrix,
    payload: &[bool],
    ks: &KeyStream,
) -> Result<DeisEmbedding> {
    let carrier = match share.role {
        ShareRole::Plain => Carrier::Plain,
        ShareRole::HdeMarked => Carrier::HdeMarked,
        role => return Err(DeisError::RoleMismatch(role)),
    };
    check_pair(share, key)?;
    if !key.is_pristine() {
        return Err(DeisError::KeyNotPristine(key.index));
    }
    let mut residues = share.residues.clone();
    let mut primes = key.primes.clone();
    let mut bits = payload.iter().copied();
    let mut keystream = ks.iter();
    let mut embedded = 0;
    for (c, id) in residues.as_mut_slice().iter_mut().zip(primes.as_mut_slice()) {
        if deis_available(*c, *id)? {
            if let Some(bit) = bits.next() {
                let k = keystream.next().expect("keystream is infinite");
                *c = expand_residue(*c, *id, k ^ bit);
                embedded += 1;
                continue;
            }
        }
        *id -= 1;
    }
    Ok(DeisEmbedding {
        share: ImageShare {
            role: ShareRole::DeisMarked { carrier },
            index: share.index,
            residues,
        },
        key: SisKeyMatrix {
            index: key.index,
            primes,
        },
        embedded,
    })
}

fn marked_carrier(share: &ImageShare) -> Result<Carrier> {
    match share.role {
        ShareRole::DeisMarked { carrier } => Ok(carrier),
        role => Err(DeisError::RoleMismatch(role)),
    }
}

/// Reads the payload back from every position whose key entry is odd.
pub fn deis_extract(marked: &ImageShare, labeled_key: &SisKeyMatrix, ks: &KeyStream) -> Result<Vec<bool>> {
    marked_carrier(marked)?;
    check_pair(marked, labeled_key)?;
    let mut keystream = ks.iter();
    Ok(marked
        .residues
        .iter()
        .zip(labeled_key.primes.iter())
        .filter(|(_, &id)| id & 1 == 1)
        .map(|(&c, _)| (c & 1 == 1) ^ keystream.next().expect("keystream is infinite"))
        .collect())
}

/// Restores the pre-embedding share and the pristine key.
pub fn deis_recover(marked: &ImageShare, labeled_key: &SisKeyMatrix) -> Result<(ImageShare, SisKeyMatrix)> {
    let carrier = marked_carrier(marked)?;
    check_pair(marked, labeled_key)?;
    let mut residues = marked.residues.clone();
    let mut primes = labeled_key.primes.clone();
    for (c, id) in residues.as_mut_slice().iter_mut().zip(primes.as_mut_slice()) {
        if *id & 1 == 0 {
            *id += 1;
        } else {
            if *c >= *id {
                return Err(DeisError::ResidueOutOfRange {
                    residue: *c,
                    prime: *id,
                });
            }
            *c = contract_residue(*c, *id).1;
        }
    }
    Ok((
        ImageShare {
            role: carrier.into(),
            index: marked.index,
            residues,
        },
        SisKeyMatrix {
            index: labeled_key.index,
            primes,
        },
    ))
}
