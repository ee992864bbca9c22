//! Binary share, key, randomness and side-info files.
//!
//! Every file starts with a 26-byte little-endian header:
//!
//! | offset | size | field             |
//! |-------:|-----:|-------------------|
//! | 0      | 4    | magic             |
//! | 4      | 1    | version (1)       |
//! | 5      | 1    | role              |
//! | 6      | 2    | shareholder index |
//! | 8      | 2    | t                 |
//! | 10     | 2    | n                 |
//! | 12     | 2    | q0                |
//! | 14     | 2    | w                 |
//! | 16     | 4    | height            |
//! | 20     | 4    | width             |
//! | 24     | 1    | PRNG id           |
//! | 25     | 1    | flags             |
//!
//! Bodies are row-major. Residues and key entries are `u16`, randomizers
//! `u64`. Side info is the bit-packed availability map (MSB first within a
//! byte), then the scramble seed (`u64`), the fidelity limit (`u16`, `0xFFFF`
//! meaning unbounded) and the payload length (`u32`).

use std::io::{self, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crt::{CrtError, SisParams};
use crate::de::{AvailabilityMap, FidelityLimit};
use crate::grid::Grid;
use crate::keying::{PublicRandomness, SisKeyMatrix, PRNG_CHACHA20};
use crate::pipeline::{Carrier, ImageShare, ShareRole, SideInfo};

pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 26;

pub const MAGIC_SHARE: [u8; 4] = *b"CRDS";
pub const MAGIC_KEY: [u8; 4] = *b"CRKY";
pub const MAGIC_RANDOMNESS: [u8; 4] = *b"CRPR";
pub const MAGIC_SIDE_INFO: [u8; 4] = *b"CRSI";

const ROLE_PLAIN: u8 = 0;
const ROLE_HDE: u8 = 1;
const ROLE_DEIS: u8 = 2;
const KEY_PRISTINE: u8 = 0;
const KEY_LABELED: u8 = 1;
const FLAG_CARRIER_HDE: u8 = 1;
const FID_UNBOUNDED: u16 = 0xFFFF;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {0}")]
    VersionMismatch(u8),
    #[error("file is truncated")]
    TruncatedFile,
    #[error("inconsistent header or body: {0}")]
    HeaderInconsistent(String),
    #[error("malformed PGM: {0}")]
    MalformedPgm(String),
    #[error("unsupported PGM maxval {0}")]
    UnsupportedMaxval(u32),
    #[error("invalid parameters file: {0}")]
    Params(String),
    #[error(transparent)]
    InvalidParams(#[from] CrtError),
    #[error(transparent)]
    Io(io::Error),
}

impl From<io::Error> for FormatError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            FormatError::TruncatedFile
        } else {
            FormatError::Io(e)
        }
    }
}

fn inconsistent(msg: impl Into<String>) -> FormatError {
    FormatError::HeaderInconsistent(msg.into())
}

pub type Result<T> = std::result::Result<T, FormatError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FileHeader {
    pub magic: [u8; 4],
    pub version: u8,
    pub role: u8,
    pub shareholder_index: u16,
    pub t: u16,
    pub n: u16,
    pub q0: u16,
    pub w: u16,
    pub height: u32,
    pub width: u32,
    pub prng_id: u8,
    pub flags: u8,
}

impl FileHeader {
    pub fn new(magic: [u8; 4], params: &SisParams, height: usize, width: usize) -> Result<Self> {
        let narrow = |v: usize, what: &str| u16::try_from(v).map_err(|_| inconsistent(format!("{what} exceeds 16 bits")));
        Ok(FileHeader {
            magic,
            version: VERSION,
            role: 0,
            shareholder_index: 0,
            t: narrow(params.threshold(), "t")?,
            n: narrow(params.parties(), "n")?,
            q0: narrow(params.q0() as usize, "q0")?,
            w: params.bit_width() as u16,
            height: u32::try_from(height).map_err(|_| inconsistent("height exceeds 32 bits"))?,
            width: u32::try_from(width).map_err(|_| inconsistent("width exceeds 32 bits"))?,
            prng_id: PRNG_CHACHA20,
            flags: 0,
        })
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&self.magic);
        b[4] = self.version;
        b[5] = self.role;
        b[6..8].copy_from_slice(&self.shareholder_index.to_le_bytes());
        b[8..10].copy_from_slice(&self.t.to_le_bytes());
        b[10..12].copy_from_slice(&self.n.to_le_bytes());
        b[12..14].copy_from_slice(&self.q0.to_le_bytes());
        b[14..16].copy_from_slice(&self.w.to_le_bytes());
        b[16..20].copy_from_slice(&self.height.to_le_bytes());
        b[20..24].copy_from_slice(&self.width.to_le_bytes());
        b[24] = self.prng_id;
        b[25] = self.flags;
        b
    }

    pub fn decode(b: &[u8; HEADER_LEN], expected: [u8; 4]) -> Result<Self> {
        let magic: [u8; 4] = b[0..4].try_into().unwrap();
        if magic != expected {
            return Err(FormatError::BadMagic {
                expected,
                found: magic,
            });
        }
        if b[4] != VERSION {
            return Err(FormatError::VersionMismatch(b[4]));
        }
        let u16_at = |i: usize| u16::from_le_bytes([b[i], b[i + 1]]);
        let u32_at = |i: usize| u32::from_le_bytes(b[i..i + 4].try_into().unwrap());
        let h = FileHeader {
            magic,
            version: b[4],
            role: b[5],
            shareholder_index: u16_at(6),
            t: u16_at(8),
            n: u16_at(10),
            q0: u16_at(12),
            w: u16_at(14),
            height: u32_at(16),
            width: u32_at(20),
            prng_id: b[24],
            flags: b[25],
        };
        if h.w == 0 || h.w as u32 > crate::crt::MAX_BIT_WIDTH {
            return Err(inconsistent(format!("bit width {} unsupported", h.w)));
        }
        if h.prng_id != PRNG_CHACHA20 {
            return Err(inconsistent(format!("unknown PRNG id {}", h.prng_id)));
        }
        Ok(h)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height as usize, self.width as usize)
    }

    fn cells(&self) -> Result<usize> {
        (self.height as usize)
            .checked_mul(self.width as usize)
            .ok_or_else(|| inconsistent("dimensions overflow"))
    }

    /// Exclusive bound on residues and key entries, `2^(w+1)`.
    pub fn value_bound(&self) -> u32 {
        1u32 << (self.w + 1)
    }

    /// Whether `t`, `n`, `q0` and `w` agree with `params`.
    pub fn check_params(&self, params: &SisParams) -> Result<()> {
        let ok = self.t as usize == params.threshold()
            && self.n as usize == params.parties()
            && self.q0 as u64 == params.q0()
            && self.w as u32 == params.bit_width();
        if ok {
            Ok(())
        } else {
            Err(inconsistent("header parameters differ from the parameter set"))
        }
    }
}

fn read_header(r: &mut impl Read, magic: [u8; 4]) -> Result<FileHeader> {
    let mut b = [0u8; HEADER_LEN];
    r.read_exact(&mut b)?;
    FileHeader::decode(&b, magic)
}

fn expect_eof(r: &mut impl Read) -> Result<()> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(inconsistent("trailing bytes after body")),
    }
}

fn write_u16_grid(w: &mut impl Write, grid: &Grid<u16>, bound: u32, what: &str) -> Result<()> {
    let mut buf = Vec::with_capacity(grid.len() * 2);
    for &v in grid.iter() {
        if v as u32 >= bound {
            return Err(inconsistent(format!("{what} {v} does not fit below {bound}")));
        }
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u16_grid(r: &mut impl Read, header: &FileHeader, what: &str) -> Result<Grid<u16>> {
    let cells = header.cells()?;
    let mut buf = vec![0u8; cells * 2];
    r.read_exact(&mut buf)?;
    let bound = header.value_bound();
    let data: Vec<u16> = buf.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect();
    if let Some(v) = data.iter().find(|&&v| v as u32 >= bound) {
        return Err(inconsistent(format!("{what} {v} does not fit below {bound}")));
    }
    let (h, w) = header.dims();
    Ok(Grid::from_vec(h, w, data).expect("length matches"))
}

pub fn write_share(w: &mut impl Write, share: &ImageShare, params: &SisParams) -> Result<()> {
    let (height, width) = share.dims();
    let mut h = FileHeader::new(MAGIC_SHARE, params, height, width)?;
    h.shareholder_index = share.index;
    (h.role, h.flags) = match share.role {
        ShareRole::Plain => (ROLE_PLAIN, 0),
        ShareRole::HdeMarked => (ROLE_HDE, 0),
        ShareRole::DeisMarked { carrier: Carrier::Plain } => (ROLE_DEIS, 0),
        ShareRole::DeisMarked { carrier: Carrier::HdeMarked } => (ROLE_DEIS, FLAG_CARRIER_HDE),
    };
    let bound = h.value_bound();
    w.write_all(&h.encode())?;
    write_u16_grid(w, &share.residues, bound, "residue")
}

pub fn read_share(r: &mut impl Read) -> Result<(FileHeader, ImageShare)> {
    let h = read_header(r, MAGIC_SHARE)?;
    let role = match (h.role, h.flags) {
        (ROLE_PLAIN, 0) => ShareRole::Plain,
        (ROLE_HDE, 0) => ShareRole::HdeMarked,
        (ROLE_DEIS, 0) => ShareRole::DeisMarked { carrier: Carrier::Plain },
        (ROLE_DEIS, FLAG_CARRIER_HDE) => ShareRole::DeisMarked {
            carrier: Carrier::HdeMarked,
        },
        (role, flags) => return Err(inconsistent(format!("unknown share role {role} / flags {flags}"))),
    };
    let residues = read_u16_grid(r, &h, "residue")?;
    expect_eof(r)?;
    Ok((
        h,
        ImageShare {
            role,
            index: h.shareholder_index,
            residues,
        },
    ))
}

pub fn write_key(w: &mut impl Write, key: &SisKeyMatrix, params: &SisParams) -> Result<()> {
    let (height, width) = key.dims();
    let mut h = FileHeader::new(MAGIC_KEY, params, height, width)?;
    h.shareholder_index = key.index;
    h.role = if key.is_pristine() { KEY_PRISTINE } else { KEY_LABELED };
    let bound = h.value_bound();
    w.write_all(&h.encode())?;
    write_u16_grid(w, &key.primes, bound, "key entry")
}

pub fn read_key(r: &mut impl Read) -> Result<(FileHeader, SisKeyMatrix)> {
    let h = read_header(r, MAGIC_KEY)?;
    if h.role > KEY_LABELED || h.flags != 0 {
        return Err(inconsistent(format!("unknown key role {}", h.role)));
    }
    let primes = read_u16_grid(r, &h, "key entry")?;
    expect_eof(r)?;
    let key = SisKeyMatrix {
        index: h.shareholder_index,
        primes,
    };
    if key.is_pristine() != (h.role == KEY_PRISTINE) {
        return Err(inconsistent("key role flag disagrees with its entries"));
    }
    Ok((h, key))
}

pub fn write_randomness(w: &mut impl Write, r: &PublicRandomness, params: &SisParams) -> Result<()> {
    let (height, width) = r.r.dims();
    let h = FileHeader::new(MAGIC_RANDOMNESS, params, height, width)?;
    w.write_all(&h.encode())?;
    let mut buf = Vec::with_capacity(r.r.len() * 8);
    for &v in r.r.iter() {
        if v >= params.r_bound() {
            return Err(inconsistent(format!("randomizer {v} not below r_bound")));
        }
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_randomness(r: &mut impl Read) -> Result<(FileHeader, PublicRandomness)> {
    let h = read_header(r, MAGIC_RANDOMNESS)?;
    let mut buf = vec![0u8; h.cells()? * 8];
    r.read_exact(&mut buf)?;
    expect_eof(r)?;
    let data = buf
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (height, width) = h.dims();
    Ok((
        h,
        PublicRandomness {
            r: Grid::from_vec(height, width, data).expect("length matches"),
        },
    ))
}

/// Packs bits MSB-first, zero-padding the last byte.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i))))
        .collect()
}

/// Expands bytes MSB-first.
pub fn unpack_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).map(move |i| byte & (0x80 >> i) != 0))
        .collect()
}

pub fn write_side_info(w: &mut impl Write, side: &SideInfo, params: &SisParams) -> Result<()> {
    let (height, width) = side.dims();
    if !side.map.is_well_formed() {
        return Err(inconsistent("availability map has a pair with both flags set"));
    }
    let h = FileHeader::new(MAGIC_SIDE_INFO, params, height, width)?;
    w.write_all(&h.encode())?;
    w.write_all(&pack_bits(side.map.bits.as_slice()))?;
    w.write_all(&side.scramble_seed.to_le_bytes())?;
    let fid = match side.h_fid {
        FidelityLimit::Bounded(v) if v != FID_UNBOUNDED => v,
        FidelityLimit::Bounded(_) => return Err(inconsistent("fidelity limit 0xFFFF is reserved")),
        FidelityLimit::Unbounded => FID_UNBOUNDED,
    };
    w.write_all(&fid.to_le_bytes())?;
    w.write_all(&side.payload_length.to_le_bytes())?;
    Ok(())
}

pub fn read_side_info(r: &mut impl Read) -> Result<(FileHeader, SideInfo)> {
    let h = read_header(r, MAGIC_SIDE_INFO)?;
    let (height, width) = h.dims();
    if width % 2 != 0 {
        return Err(inconsistent("side info width is odd"));
    }
    let cells = h.cells()?;
    let mut packed = vec![0u8; cells.div_ceil(8)];
    r.read_exact(&mut packed)?;
    let mut tail = [0u8; 14];
    r.read_exact(&mut tail)?;
    expect_eof(r)?;
    let mut bits = unpack_bits(&packed);
    if bits[cells..].iter().any(|&b| b) {
        return Err(inconsistent("nonzero padding bits in availability map"));
    }
    bits.truncate(cells);
    let map = AvailabilityMap {
        bits: Grid::from_vec(height, width, bits).expect("length matches"),
    };
    if !map.is_well_formed() {
        return Err(inconsistent("availability map has a pair with both flags set"));
    }
    let scramble_seed = u64::from_le_bytes(tail[0..8].try_into().unwrap());
    let fid = u16::from_le_bytes([tail[8], tail[9]]);
    let payload_length = u32::from_le_bytes(tail[10..14].try_into().unwrap());
    if payload_length as usize > map.available_pairs() {
        return Err(inconsistent("payload length exceeds available pairs"));
    }
    Ok((
        h,
        SideInfo {
            map,
            scramble_seed,
            h_fid: if fid == FID_UNBOUNDED {
                FidelityLimit::Unbounded
            } else {
                FidelityLimit::Bounded(fid)
            },
            payload_length,
        },
    ))
}

/// Text form of [`SisParams`], stored as TOML.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub w: u32,
    pub t: usize,
    pub n: usize,
    pub q0: u64,
    pub pool: Vec<u64>,
}

impl From<&SisParams> for ParamsFile {
    fn from(p: &SisParams) -> Self {
        ParamsFile {
            w: p.bit_width(),
            t: p.threshold(),
            n: p.parties(),
            q0: p.q0(),
            pool: p.pool().to_vec(),
        }
    }
}

impl ParamsFile {
    pub fn validate(self) -> Result<SisParams> {
        Ok(SisParams::new(self.w, self.t, self.n, self.q0, self.pool)?)
    }
}

pub fn params_to_toml(params: &SisParams) -> String {
    toml::to_string(&ParamsFile::from(params)).expect("plain struct serializes")
}

pub fn params_from_toml(text: &str) -> Result<SisParams> {
    toml::from_str::<ParamsFile>(text)
        .map_err(|e| FormatError::Params(e.to_string()))?
        .validate()
}

pub fn load_params(path: impl AsRef<Path>) -> Result<SisParams> {
    params_from_toml(&std::fs::read_to_string(path)?)
}

pub fn save_params(path: impl AsRef<Path>, params: &SisParams) -> Result<()> {
    std::fs::write(path, params_to_toml(params))?;
    Ok(())
}

fn load<T>(path: &Path, f: impl FnOnce(&mut io::Cursor<Vec<u8>>) -> Result<T>) -> Result<T> {
    let mut cur = io::Cursor::new(std::fs::read(path)?);
    f(&mut cur)
}

fn save(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_share(path: impl AsRef<Path>) -> Result<(FileHeader, ImageShare)> {
    load(path.as_ref(), read_share)
}

pub fn save_share(path: impl AsRef<Path>, share: &ImageShare, params: &SisParams) -> Result<()> {
    save(path.as_ref(), |b| write_share(b, share, params))
}

pub fn load_key(path: impl AsRef<Path>) -> Result<(FileHeader, SisKeyMatrix)> {
    load(path.as_ref(), read_key)
}

pub fn save_key(path: impl AsRef<Path>, key: &SisKeyMatrix, params: &SisParams) -> Result<()> {
    save(path.as_ref(), |b| write_key(b, key, params))
}

pub fn load_randomness(path: impl AsRef<Path>) -> Result<(FileHeader, PublicRandomness)> {
    load(path.as_ref(), read_randomness)
}

pub fn save_randomness(path: impl AsRef<Path>, r: &PublicRandomness, params: &SisParams) -> Result<()> {
    save(path.as_ref(), |b| write_randomness(b, r, params))
}

pub fn load_side_info(path: impl AsRef<Path>) -> Result<(FileHeader, SideInfo)> {
    load(path.as_ref(), read_side_info)
}

pub fn save_side_info(path: impl AsRef<Path>, side: &SideInfo, params: &SisParams) -> Result<()> {
    save(path.as_ref(), |b| write_side_info(b, side, params))
}
