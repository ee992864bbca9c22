//! Quality and security measurements.

use std::collections::HashMap;

use thiserror::Error;

use crate::grid::Grid;
use crate::keying::{self, uniform_below, STREAM_SAMPLER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("need at least two samples")]
    TooFewSamples,
    #[error("matrix {0:?} has no adjacent pairs in that direction")]
    TooSmall((usize, usize)),
}

/// Peak value for 8-bit pixels.
pub const PIXEL_PEAK: f64 = 255.0;
/// Peak value used for 9-bit residue matrices.
pub const RESIDUE_PEAK: f64 = 511.0;

fn mse<T: Copy + Into<f64>>(a: &Grid<T>, b: &Grid<T>) -> Result<f64, MetricsError> {
    if a.dims() != b.dims() {
        return Err(MetricsError::DimensionMismatch(a.dims(), b.dims()));
    }
    let sum: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(&x, &y)| {
            let d = x.into() - y.into();
            d * d
        })
        .sum();
    Ok(sum / a.len().max(1) as f64)
}

/// `10·log10(peak² / MSE)`, `+∞` for identical inputs.
pub fn psnr_with_peak<T: Copy + Into<f64>>(a: &Grid<T>, b: &Grid<T>, peak: f64) -> Result<f64, MetricsError> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / m).log10()
    })
}

pub fn psnr(a: &Grid<u8>, b: &Grid<u8>) -> Result<f64, MetricsError> {
    psnr_with_peak(a, b, PIXEL_PEAK)
}

/// PSNR between two residue matrices (peak 511).
pub fn psnr_residues(a: &Grid<u16>, b: &Grid<u16>) -> Result<f64, MetricsError> {
    psnr_with_peak(a, b, RESIDUE_PEAK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Horizontal,
    Vertical,
    Diagonal,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Horizontal, Direction::Vertical, Direction::Diagonal];

    fn offset(self) -> (usize, usize) {
        match self {
            Direction::Horizontal => (0, 1),
            Direction::Vertical => (1, 0),
            Direction::Diagonal => (1, 1),
        }
    }
}

/// A correlation coefficient; `degenerate` is set when either variance was
/// zero, in which case `value` is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub degenerate: bool,
}

/// Pearson coefficient with population (1/N) moments.
pub fn pearson(u: &[f64], v: &[f64]) -> Result<Correlation, MetricsError> {
    let n = u.len().min(v.len());
    if n < 2 {
        return Err(MetricsError::TooFewSamples);
    }
    let nf = n as f64;
    let eu = u[..n].iter().sum::<f64>() / nf;
    let ev = v[..n].iter().sum::<f64>() / nf;
    let (mut du, mut dv, mut cov) = (0.0, 0.0, 0.0);
    for (a, b) in u[..n].iter().zip(&v[..n]) {
        du += (a - eu) * (a - eu);
        dv += (b - ev) * (b - ev);
        cov += (a - eu) * (b - ev);
    }
    if du == 0.0 || dv == 0.0 {
        return Ok(Correlation {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Correlation {
        value: (cov / nf) / ((du / nf).sqrt() * (dv / nf).sqrt()),
        degenerate: false,
    })
}

/// Samples `n_s` uniformly placed adjacent pairs (with replacement) and
/// returns their correlation.
pub fn adjacent_correlation<T: Copy + Into<f64>>(
    m: &Grid<T>,
    direction: Direction,
    n_s: usize,
    seed: u64,
) -> Result<Correlation, MetricsError> {
    if n_s < 2 {
        return Err(MetricsError::TooFewSamples);
    }
    let (dx, dy) = direction.offset();
    let (h, w) = m.dims();
    if h <= dx || w <= dy {
        return Err(MetricsError::TooSmall(m.dims()));
    }
    let mut rng = keying::stream(seed, STREAM_SAMPLER);
    let (mut u, mut v) = (Vec::with_capacity(n_s), Vec::with_capacity(n_s));
    for _ in 0..n_s {
        let x = uniform_below(&mut rng, (h - dx) as u64) as usize;
        let y = uniform_below(&mut rng, (w - dy) as u64) as usize;
        u.push(m.at(x, y).into());
        v.push(m.at(x + dx, y + dy).into());
    }
    pearson(&u, &v)
}

/// Shannon entropy (base 2) of the empirical symbol distribution.
pub fn entropy<T: Copy + Eq + std::hash::Hash>(values: &[T]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<T, usize> = HashMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1;
    }
    let n = values.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingRates {
    /// Average DE-IS capacity per share, in bits.
    pub ec_per_share: f64,
    /// Bits of payload per ciphertext bit.
    pub er: f64,
    /// Ciphertext bits per plaintext bit.
    pub blowup: f64,
}

/// DE-IS rate figures from the total capacity over all `n` shares of one
/// `height × width` image with bit width `w`.
pub fn embedding_rates(ec_total: u64, n: usize, height: usize, width: usize, w: u32) -> EmbeddingRates {
    let ec = ec_total as f64 / n as f64;
    let bits = (w + 1) as f64;
    EmbeddingRates {
        ec_per_share: ec,
        er: ec / (height as f64 * width as f64 * bits),
        blowup: bits / w as f64,
    }
}

/// One row of measurements for an image.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub image: String,
    pub psnr1: f64,
    pub ec1: u64,
    pub ec2: u64,
    pub er_deis: f64,
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub corr_h: f64,
    pub corr_v: f64,
    pub corr_d: f64,
}

pub const CSV_HEADER: &str = "image,psnr1,ec1,ec2,er_deis,entropy_before,entropy_after,corr_h,corr_v,corr_d";

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_owned()
    } else {
        format!("{v:.4}")
    }
}

impl MetricsReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.4},{:.4},{:.5},{:.5},{:.5}",
            self.image,
            fmt_db(self.psnr1),
            self.ec1,
            self.ec2,
            self.er_deis,
            self.entropy_before,
            self.entropy_after,
            self.corr_h,
            self.corr_v,
            self.corr_d
        )
    }
}
