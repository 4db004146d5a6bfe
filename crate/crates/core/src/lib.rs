//! Link-level simulation of orthogonal space-time block codes (1-4 transmit
//! antennas) over flat Rayleigh block fading, with soft-decision demodulation
//! feeding a convolutional decoder.
//!
//! The crate is organized as a transmit/receive chain:
//!
//! * [`constellation`] - Gray-labeled PSK/QAM mappers and bitwise
//!   log-likelihood ratios (exact and low-complexity approximations).
//! * [`stbc`] - orthogonal transmit diversity designs, their linear
//!   combiners, and the analytic rate/energy bounds they obey.
//! * [`channel`] - quasi-static Rayleigh fading, complex AWGN, and the
//!   deterministic substream scheme every simulation draws from.
//! * [`fec`] - the memory-6 rate-1/2 convolutional code, puncturing to
//!   rate 2/3, interleaving, and a soft-input Viterbi decoder.
//! * [`harness`] - Monte-Carlo BER sweeps, CSV reports, and horizontal
//!   dB-gap measurements between curves.
//! * [`verify`] - self-check suite used by the `verify` subcommand.
//!
//! Noise convention used throughout: `sigma2` is the variance of the noise
//! per real dimension, so a complex noise sample has total energy
//! `2 * sigma2`. All constellations have unit mean symbol energy.

pub mod channel;
pub mod constellation;
pub mod fec;
pub mod harness;
pub mod mat;
pub mod stbc;
pub mod verify;

/// Errors shared by the whole chain.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is outside its accepted range.
    #[error("configuration error: {0}")]
    Config(String),
    /// Arguments are malformed (dimension or length mismatch).
    #[error("invalid argument: {0}")]
    Usage(String),
    /// A numeric input is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// All channel gains are zero; the combiner output is undefined.
    #[error("degenerate channel: zero channel energy")]
    DegenerateChannel,
    /// A requested value cannot be located on the available data.
    #[error("range error: {0}")]
    Range(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
