//! Dealer and shareholder command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 threshold refusal, 4 file format
//! error, 5 consistency error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::crt::{CrtError, SisParams};
use crate::de::FidelityLimit;
use crate::deis::{self, DeisError};
use crate::evaluation::{self, EvaluationConfig, EvaluationError};
use crate::format::{self, FormatError};
use crate::keying::{self, KeyError, KeyStream, SisKeyMatrix};
use crate::metrics::CSV_HEADER;
use crate::pgm;
use crate::pipeline::{self, ImageShare, PipelineError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;
pub const EXIT_CONSISTENCY: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "crt-sis", version, about = "CRT secret image sharing with reversible data hiding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a parameter file, one prime-matrix key per shareholder and the public randomizer matrix.
    Keygen {
        /// Parameter file to use; the standard (t=5, n=7, q0=257) set when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Share a PGM image into one share per key, plus the dealer's side info.
    Share {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        keys: Vec<PathBuf>,
        #[arg(long)]
        randomness: PathBuf,
        /// Largest pair difference used for embedding, or `inf`.
        #[arg(long, default_value = "10")]
        hfid: FidelityLimit,
        #[arg(long)]
        scramble_seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Embed payload bits into all shares homomorphically.
    HdeEmbed {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        shares: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        keys: Vec<PathBuf>,
        #[arg(long)]
        side: PathBuf,
        /// Raw bytes, consumed MSB first.
        #[arg(long)]
        payload: PathBuf,
        /// Embed only as many bits as fit instead of failing.
        #[arg(long)]
        truncate: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Reconstruct an image from at least t shares.
    Reconstruct {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        shares: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        keys: Vec<PathBuf>,
        #[arg(long)]
        side: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the payload from a reconstructed marked image and restore the original.
    HdeExtract {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        side: PathBuf,
        #[arg(long)]
        payload_out: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed payload bits into one share against its own key.
    DeisEmbed {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        share: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        payload: PathBuf,
        /// Data-hiding key seed.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_share: PathBuf,
        #[arg(long)]
        out_key: PathBuf,
    },
    /// Extract the payload from a DE-IS marked share.
    DeisExtract {
        #[arg(long)]
        share: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        payload_out: PathBuf,
    },
    /// Restore a DE-IS marked share and its key.
    DeisRecover {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        share: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out_share: PathBuf,
        #[arg(long)]
        out_key: PathBuf,
    },
    /// Run the full pipeline on each image and print one CSV row per image.
    Metrics {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        image: Vec<PathBuf>,
        #[arg(long, default_value = "10")]
        hfid: FidelityLimit,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Threshold(String),
    Format(FormatError),
    Consistency(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Threshold(_) => EXIT_THRESHOLD,
            CliError::Format(_) => EXIT_FORMAT,
            CliError::Consistency(_) => EXIT_CONSISTENCY,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Threshold(m) | CliError::Consistency(m) => f.write_str(m),
            CliError::Format(e) => write!(f, "{e}"),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Format(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Format(e.into())
    }
}

impl From<CrtError> for CliError {
    fn from(e: CrtError) -> Self {
        match e {
            CrtError::InsufficientShares { .. } => CliError::Threshold(e.to_string()),
            e => CliError::Consistency(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Crt(e) => e.into(),
            e => CliError::Consistency(e.to_string()),
        }
    }
}

impl From<DeisError> for CliError {
    fn from(e: DeisError) -> Self {
        CliError::Consistency(e.to_string())
    }
}

impl From<KeyError> for CliError {
    fn from(e: KeyError) -> Self {
        CliError::Consistency(e.to_string())
    }
}

impl From<EvaluationError> for CliError {
    fn from(e: EvaluationError) -> Self {
        match e {
            EvaluationError::Pipeline(e) => e.into(),
            e => CliError::Consistency(e.to_string()),
        }
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_keys(paths: &[PathBuf], params: &SisParams) -> Result<Vec<SisKeyMatrix>, CliError> {
    paths
        .iter()
        .map(|p| {
            let (h, k) = format::load_key(p)?;
            h.check_params(params)?;
            Ok(k)
        })
        .collect()
}

fn load_shares(paths: &[PathBuf], params: &SisParams) -> Result<Vec<ImageShare>, CliError> {
    paths
        .iter()
        .map(|p| {
            let (h, s) = format::load_share(p)?;
            h.check_params(params)?;
            Ok(s)
        })
        .collect()
}

fn share_path(dir: &Path, index: u16) -> PathBuf {
    dir.join(format!("share_{index}.crds"))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Keygen {
            params,
            height,
            width,
            seed,
            out_dir,
        } => {
            let params = match params {
                Some(p) => format::load_params(p)?,
                None => SisParams::standard(),
            };
            let keys = keying::gen_sis_keys(&params, height, width, seed)?;
            let randomness = keying::gen_public_randomness(&params, height, width, seed);
            std::fs::create_dir_all(&out_dir)?;
            format::save_params(out_dir.join("params.toml"), &params)?;
            for key in &keys {
                format::save_key(out_dir.join(format!("key_{}.crky", key.index)), key, &params)?;
            }
            format::save_randomness(out_dir.join("randomness.crpr"), &randomness, &params)?;
        }
        Command::Share {
            params,
            image,
            keys,
            randomness,
            hfid,
            scramble_seed,
            out_dir,
        } => {
            let params = format::load_params(params)?;
            let img = pgm::load_pgm(image)?;
            let keys = load_keys(&keys, &params)?;
            let (rh, randomness) = format::load_randomness(randomness)?;
            rh.check_params(&params)?;
            let (pre, side) = pipeline::preprocess_image(&img, hfid, scramble_seed)?;
            let shares = pipeline::share_image(&pre, &keys, &randomness, &params)?;
            std::fs::create_dir_all(&out_dir)?;
            for s in &shares {
                format::save_share(share_path(&out_dir, s.index), s, &params)?;
            }
            format::save_side_info(out_dir.join("side.crsi"), &side, &params)?;
            println!("capacity {} bits", side.capacity());
        }
        Command::HdeEmbed {
            params,
            shares,
            keys,
            side,
            payload,
            truncate,
            out_dir,
        } => {
            let params = format::load_params(params)?;
            let shares = load_shares(&shares, &params)?;
            let keys = load_keys(&keys, &params)?;
            let (sh, side) = format::load_side_info(side)?;
            sh.check_params(&params)?;
            let mut bits = format::unpack_bits(&std::fs::read(payload)?);
            if truncate {
                bits.truncate(side.capacity());
            }
            let (marked, side) = pipeline::hde_embed(&shares, &keys, &params, &side, &bits)?;
            std::fs::create_dir_all(&out_dir)?;
            for s in &marked {
                format::save_share(share_path(&out_dir, s.index), s, &params)?;
            }
            format::save_side_info(out_dir.join("side.crsi"), &side, &params)?;
            println!("embedded {} bits", side.payload_length);
        }
        Command::Reconstruct {
            params,
            shares,
            keys,
            side,
            out,
        } => {
            let params = format::load_params(params)?;
            let shares = load_shares(&shares, &params)?;
            let keys = load_keys(&keys, &params)?;
            let (sh, side) = format::load_side_info(side)?;
            sh.check_params(&params)?;
            let img = pipeline::reconstruct_image(&shares, &keys, &params, &side)?;
            pgm::save_pgm(out, &img)?;
        }
        Command::HdeExtract {
            image,
            side,
            payload_out,
            out,
        } => {
            let img = pgm::load_pgm(image)?;
            let (_, side) = format::load_side_info(side)?;
            let (bits, restored) = pipeline::hde_extract_restore(&img, &side)?;
            std::fs::write(payload_out, format::pack_bits(&bits))?;
            pgm::save_pgm(out, &restored)?;
            println!("extracted {} bits", bits.len());
        }
        Command::DeisEmbed {
            params,
            share,
            key,
            payload,
            seed,
            out_share,
            out_key,
        } => {
            let params = format::load_params(params)?;
            let share = load_shares(&[share], &params)?.remove(0);
            let key = load_keys(&[key], &params)?.remove(0);
            let bits = format::unpack_bits(&std::fs::read(payload)?);
            let out = deis::deis_embed(&share, &key, &bits, &KeyStream::new(seed))?;
            format::save_share(out_share, &out.share, &params)?;
            format::save_key(out_key, &out.key, &params)?;
            println!("embedded {} bits", out.embedded);
        }
        Command::DeisExtract {
            share,
            key,
            seed,
            payload_out,
        } => {
            let (sh, share) = format::load_share(share)?;
            let (kh, key) = format::load_key(key)?;
            if (sh.t, sh.n, sh.q0, sh.w) != (kh.t, kh.n, kh.q0, kh.w) {
                return Err(FormatError::HeaderInconsistent("share and key headers disagree".into()).into());
            }
            let bits = deis::deis_extract(&share, &key, &KeyStream::new(seed))?;
            std::fs::write(payload_out, format::pack_bits(&bits))?;
            println!("extracted {} bits", bits.len());
        }
        Command::DeisRecover {
            params,
            share,
            key,
            out_share,
            out_key,
        } => {
            let params = format::load_params(params)?;
            let share = load_shares(&[share], &params)?.remove(0);
            let key = load_keys(&[key], &params)?.remove(0);
            let (s, k) = deis::deis_recover(&share, &key)?;
            format::save_share(out_share, &s, &params)?;
            format::save_key(out_key, &k, &params)?;
        }
        Command::Metrics {
            params,
            image,
            hfid,
            seed,
            samples,
            out,
        } => {
            let params = match params {
                Some(p) => format::load_params(p)?,
                None => SisParams::standard(),
            };
            let config = EvaluationConfig {
                h_fid: hfid,
                seed,
                samples,
            };
            let mut csv = format!("{CSV_HEADER}\n");
            for path in &image {
                let img = pgm::load_pgm(path)?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let eval = evaluation::evaluate_image(&name, &img, &params, &config)?;
                if !(eval.hde_payload_ok && eval.restored_ok && eval.deis_ok) {
                    return Err(CliError::Consistency(format!("{name}: round trip failed")));
                }
                csv.push_str(&eval.report.csv_row());
                csv.push('\n');
            }
            match out {
                Some(p) => std::fs::write(p, csv)?,
                None => std::io::stdout().write_all(csv.as_bytes())?,
            }
        }
    }
    Ok(())
}
