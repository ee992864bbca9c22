//! Binary (P5) PGM images with maxval 255.

use std::io::{Read, Write};
use std::path::Path;

use crate::format::FormatError;
use crate::grid::GrayImage;

fn skip_space_and_comments(data: &[u8], pos: &mut usize) {
    while *pos < data.len() {
        match data[*pos] {
            b'#' => {
                while *pos < data.len() && data[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => *pos += 1,
            _ => break,
        }
    }
}

fn read_number(data: &[u8], pos: &mut usize) -> Result<u32, FormatError> {
    skip_space_and_comments(data, pos);
    let start = *pos;
    while *pos < data.len() && data[*pos].is_ascii_digit() {
        *pos += 1;
    }
    std::str::from_utf8(&data[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| FormatError::MalformedPgm(format!("expected a number at byte {start}")))
}

pub fn decode_pgm(data: &[u8]) -> Result<GrayImage, FormatError> {
    if !data.starts_with(b"P5") {
        return Err(FormatError::MalformedPgm("missing P5 magic".into()));
    }
    let mut pos = 2;
    let width = read_number(data, &mut pos)? as usize;
    let height = read_number(data, &mut pos)? as usize;
    let maxval = read_number(data, &mut pos)?;
    if maxval != 255 {
        return Err(FormatError::UnsupportedMaxval(maxval));
    }
    match data.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err(FormatError::MalformedPgm("no separator after maxval".into())),
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| FormatError::MalformedPgm("dimensions overflow".into()))?;
    let body = data
        .get(pos..pos + len)
        .ok_or(FormatError::TruncatedFile)?;
    Ok(GrayImage::from_vec(height, width, body.to_vec()).expect("length checked"))
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_slice());
    out
}

pub fn read_pgm(mut r: impl Read) -> Result<GrayImage, FormatError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    decode_pgm(&data)
}

pub fn write_pgm(mut w: impl Write, img: &GrayImage) -> Result<(), FormatError> {
    w.write_all(&encode_pgm(img))?;
    Ok(())
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage, FormatError> {
    decode_pgm(&std::fs::read(path)?)
}

pub fn save_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<(), FormatError> {
    std::fs::write(path, encode_pgm(img))?;
    Ok(())
}
