//! End-to-end measurement run for one image: share, embed at maximum
//! capacity through both channels, reconstruct and measure.

use thiserror::Error;

use crate::crt::SisParams;
use crate::de::FidelityLimit;
use crate::deis::{self, DeisEmbedding, DeisError};
use crate::grid::GrayImage;
use crate::keying::{self, KeyError, KeyStream};
use crate::metrics::{self, Direction, MetricsReport};
use crate::pipeline::{self, PipelineError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Deis(#[from] DeisError),
}

/// Seeds and settings for [`evaluate_image`].
#[derive(Debug, Clone, Copy)]
pub struct EvaluationConfig {
    pub h_fid: FidelityLimit,
    pub seed: u64,
    pub samples: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            h_fid: FidelityLimit::Bounded(10),
            seed: 0,
            samples: 2000,
        }
    }
}

/// Per-share figures behind a [`MetricsReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShareMeasurements {
    pub index: u16,
    pub capacity: usize,
    pub entropy_before: f64,
    pub entropy_after: f64,
    /// Horizontal, vertical, diagonal; before DE-IS.
    pub corr_before: [f64; 3],
    /// Horizontal, vertical, diagonal; after DE-IS.
    pub corr_after: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub shares: Vec<ShareMeasurements>,
    pub hde_payload_ok: bool,
    pub restored_ok: bool,
    pub deis_ok: bool,
}

/// Too-small matrices report 0.
fn correlations(m: &crate::grid::Grid<u16>, samples: usize, seed: u64) -> [f64; 3] {
    Direction::ALL.map(|d| {
        metrics::adjacent_correlation(m, d, samples, seed)
            .map(|c| c.value)
            .unwrap_or(0.0)
    })
}

/// Derives key material, randomness, scramble, payloads and keystreams
/// from `config.seed` and runs both embedding channels at full capacity.
///
/// Correlation columns of the report hold, per direction, the coefficient of
/// largest magnitude over all DE-IS marked shares.
pub fn evaluate_image(
    name: &str,
    img: &GrayImage,
    params: &SisParams,
    config: &EvaluationConfig,
) -> Result<Evaluation, EvaluationError> {
    let (h, w) = img.dims();
    let seed = config.seed;
    let keys = keying::gen_sis_keys(params, h, w, seed)?;
    let randomness = keying::gen_public_randomness(params, h, w, seed);
    let (pre, side) = pipeline::preprocess_image(img, config.h_fid, seed)?;
    let shares = pipeline::share_image(&pre, &keys, &randomness, params)?;

    let payload = keying::random_bits(seed, side.capacity());
    let (marked, side) = pipeline::hde_embed(&shares, &keys, params, &side, &payload)?;
    // Overflow demotion can leave trailing payload bits unplaced.
    let ec1 = side.payload_length as usize;
    let t = params.threshold();
    let marked_img = pipeline::reconstruct_image(&marked[..t], &keys, params, &side)?;
    let psnr1 = metrics::psnr(img, &marked_img).expect("same dimensions");
    let (bits, restored) = pipeline::hde_extract_restore(&marked_img, &side)?;

    let mut per_share = Vec::with_capacity(marked.len());
    let mut ec2 = 0u64;
    let mut deis_ok = true;
    for (share, key) in marked.iter().zip(&keys) {
        let sample_seed = seed ^ ((share.index as u64) << 32);
        let ks = KeyStream::new(sample_seed);
        let capacity = share
            .residues
            .iter()
            .zip(key.primes.iter())
            .filter(|(&c, &id)| deis::deis_available(c, id).unwrap_or(false))
            .count();
        let data = keying::random_bits(sample_seed, capacity);
        let DeisEmbedding {
            share: dm,
            key: dk,
            embedded,
        } = deis::deis_embed(share, key, &data, &ks)?;
        ec2 += embedded as u64;
        let extracted = deis::deis_extract(&dm, &dk, &ks)?;
        let (rs, rk) = deis::deis_recover(&dm, &dk)?;
        deis_ok &= extracted == data && &rs == share && &rk == key;

        per_share.push(ShareMeasurements {
            index: share.index,
            capacity: embedded,
            entropy_before: metrics::entropy(share.residues.as_slice()),
            entropy_after: metrics::entropy(dm.residues.as_slice()),
            corr_before: correlations(&share.residues, config.samples, sample_seed),
            corr_after: correlations(&dm.residues, config.samples, sample_seed.wrapping_add(1)),
        });
    }

    let n = per_share.len().max(1) as f64;
    let worst = |d: usize| {
        per_share
            .iter()
            .map(|s| s.corr_after[d])
            .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc })
    };
    let rates = metrics::embedding_rates(ec2, marked.len(), h, w, params.bit_width());
    let report = MetricsReport {
        image: name.to_owned(),
        psnr1,
        ec1: ec1 as u64,
        ec2,
        er_deis: rates.er,
        entropy_before: per_share.iter().map(|s| s.entropy_before).sum::<f64>() / n,
        entropy_after: per_share.iter().map(|s| s.entropy_after).sum::<f64>() / n,
        corr_h: worst(0),
        corr_v: worst(1),
        corr_d: worst(2),
    };
    Ok(Evaluation {
        report,
        shares: per_share,
        hde_payload_ok: bits[..] == payload[..ec1],
        restored_ok: &restored == img,
        deis_ok,
    })
}
