//! Threshold secret image sharing over the Chinese remainder theorem, with
//! two separable reversible data-hiding channels.
//!
//! * [`crt`]: Asmuth–Bloom style (t, n) sharing of a single value.
//! * [`keying`]: seeded generation of prime matrices, the public randomizer
//!   matrix, the pair scramble and the data-hiding keystream.
//! * [`de`]: difference-expansion primitives on pixel pairs.
//! * [`pipeline`]: dealer-side image sharing, homomorphic difference
//!   expansion over the shares, reconstruction and lossless restoration.
//! * [`deis`]: shareholder-side difference expansion between a residue and
//!   its own key prime.
//! * [`metrics`]: PSNR, adjacent correlation, entropy and rate figures.
//! * [`format`], [`pgm`] and [`cli`]: file formats and the command line.

pub mod cli;
pub mod crt;
pub mod de;
pub mod deis;
pub mod evaluation;
pub mod format;
pub mod grid;
pub mod keying;
pub mod metrics;
pub mod pgm;
pub mod pipeline;

pub use crt::{CrtError, ScalarShare, SisParams};
pub use de::{AvailabilityMap, FidelityLimit, HlPair, PairOrder};
pub use grid::{GrayImage, Grid};
pub use keying::{KeyStream, PublicRandomness, ScramblePermutation, SisKeyMatrix};
pub use pipeline::{ImageShare, PreprocessedImage, ShareRole, SideInfo};
