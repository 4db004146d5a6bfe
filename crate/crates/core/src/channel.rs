//! Quasi-static Rayleigh fading and complex additive white Gaussian noise.
//!
//! Channel gains stay constant over one space-time code word and are redrawn
//! independently for the next (block fading). Every gain is circularly
//! symmetric complex Gaussian with unit mean power: real and imaginary parts
//! are independent `N(0, 1/2)`.
//!
//! All randomness flows through [`substream`], which derives independent,
//! reproducible generators from one root seed and an integer path. Separate
//! paths for channel, noise, and data mean that toggling one of them (or
//! changing a decision mode) never perturbs the draws of the others.

use crate::mat::CxMat;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Channel realization for one space-time code word.
#[derive(Debug, Clone)]
pub struct ChannelBlock {
    /// Gains, transmit antennas along rows, receive antennas along columns.
    pub h: CxMat,
    /// Position of the code word in the transmission chain.
    pub block_index: u64,
}

/// Additive noise level, expressed per real dimension.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    sigma2: f64,
}

impl NoiseSpec {
    pub fn new(sigma2: f64) -> Result<Self> {
        if sigma2.is_nan() || sigma2 <= 0.0 {
            return Err(Error::Domain(format!(
                "noise variance must be positive, got {sigma2}"
            )));
        }
        Ok(Self { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// Draws one block-fading realization. `block_index` starts at 0; callers
/// tracking a transmission chain overwrite it.
pub fn draw_channel(n_tx: usize, n_rx: usize, rng: &mut impl Rng) -> ChannelBlock {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = CxMat::zeros(n_tx, n_rx);
    for e in h.entries_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *e = Complex64::new(scale * re, scale * im);
    }
    ChannelBlock { h, block_index: 0 }
}

/// Adds circularly symmetric white Gaussian noise to every entry.
pub fn add_noise(signal: &CxMat, noise: &NoiseSpec, rng: &mut impl Rng) -> CxMat {
    let sd = noise.sigma2.sqrt();
    let mut out = signal.clone();
    for e in out.entries_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *e += Complex64::new(sd * re, sd * im);
    }
    out
}

/// Passes a transmission matrix (`l x n_tx`) through the channel:
/// `R = X H + W`. With `noise` set to `None` the output is the clean signal.
pub fn apply(
    x: &CxMat,
    block: &ChannelBlock,
    noise: Option<&NoiseSpec>,
    rng: &mut impl Rng,
) -> Result<CxMat> {
    if x.cols() != block.h.rows() {
        return Err(Error::Usage(format!(
            "transmission uses {} antennas but channel has {} rows",
            x.cols(),
            block.h.rows()
        )));
    }
    let signal = x.mul(&block.h);
    Ok(match noise {
        Some(n) => add_noise(&signal, n, rng),
        None => signal,
    })
}

/// Derives a reproducible generator from a root seed and an integer path,
/// e.g. `(purpose, point, unit)`. Distinct paths give independent streams;
/// the same path always gives the same stream.
pub fn substream(root: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix64(root);
    for &tag in path {
        state = splitmix64(state ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    ChaCha8Rng::seed_from_u64(state)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
