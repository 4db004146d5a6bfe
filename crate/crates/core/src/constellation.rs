//! Gray-labeled constellations (BPSK, QPSK, 8-PSK, 16-QAM) with unit mean
//! symbol energy, hard demapping, and bitwise log-likelihood ratios.
//!
//! Conventions:
//! * A label is a `k`-bit vector; index 0 holds the most significant bit, and
//!   LLR vectors are parallel to labels (`lambdas[j]` belongs to `label[j]`).
//! * `sigma2` is the noise variance per real dimension.
//! * Positive LLR means bit value 1 is more likely.

use crate::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Psk8,
    Qam16,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
            Modulation::Psk8 => 3,
            Modulation::Qam16 => 4,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qpsk => "qpsk",
            Modulation::Psk8 => "8psk",
            Modulation::Qam16 => "16qam",
        };
        f.write_str(s)
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bpsk" => Ok(Modulation::Bpsk),
            "qpsk" => Ok(Modulation::Qpsk),
            "8psk" => Ok(Modulation::Psk8),
            "16qam" => Ok(Modulation::Qam16),
            other => Err(Error::Config(format!("unknown modulation `{other}`"))),
        }
    }
}

/// Bitwise LLR vector for one symbol, optionally scaled by a channel-energy
/// weight before delivery to the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrWord {
    pub lambdas: Vec<f64>,
    pub weight: f64,
}

/// Multiplies per-bit LLRs (computed at unit noise variance) by a channel
/// energy weight. The scaling leaves decoder decisions invariant but carries
/// the per-code-word reliability into the metric.
pub fn weight_llr(lambdas: &[f64], energy: f64) -> Result<LlrWord> {
    if energy.is_nan() || energy < 0.0 {
        return Err(Error::Domain(format!(
            "negative channel energy weight {energy}"
        )));
    }
    Ok(LlrWord {
        lambdas: lambdas.iter().map(|l| l * energy).collect(),
        weight: energy,
    })
}

#[derive(Debug, Clone)]
pub struct Constellation {
    pub kind: Modulation,
    /// Bits per symbol.
    pub k: usize,
    pub points: Vec<Complex64>,
    /// `labels[i]` is the bit vector of `points[i]`, most significant first.
    pub labels: Vec<Vec<u8>>,
    /// Spacing between adjacent amplitude levels along one real dimension
    /// (used by the QAM midpoint LLR rule).
    pub d_const: f64,
    /// Lookup: label (as an integer, MSB first) -> point index.
    index_of_label: Vec<usize>,
}

/// Builds the constellation for `kind`. All four have unit mean symbol
/// energy; QPSK/16-QAM use per-axis Gray labels, 8-PSK a Gray ring.
pub fn make_constellation(kind: Modulation) -> Constellation {
    let k = kind.bits_per_symbol();
    let mut points = Vec::new();
    let mut labels: Vec<Vec<u8>> = Vec::new();
    match kind {
        Modulation::Bpsk => {
            for b in 0..2u32 {
                points.push(Complex64::new(if b == 1 { 1.0 } else { -1.0 }, 0.0));
                labels.push(vec![b as u8]);
            }
        }
        Modulation::Qpsk => {
            let a = std::f64::consts::FRAC_1_SQRT_2;
            for v in 0..4u32 {
                let b1 = (v >> 1) & 1;
                let b0 = v & 1;
                let sign = |b: u32| if b == 1 { a } else { -a };
                points.push(Complex64::new(sign(b1), sign(b0)));
                labels.push(vec![b1 as u8, b0 as u8]);
            }
        }
        Modulation::Psk8 => {
            // Points in ring order, labels Gray-coded so that neighbors on
            // the circle differ in exactly one bit.
            for n in 0..8u32 {
                let phi = std::f64::consts::FRAC_PI_4 * n as f64;
                points.push(Complex64::new(phi.cos(), phi.sin()));
                let g = n ^ (n >> 1);
                labels.push(vec![
                    ((g >> 2) & 1) as u8,
                    ((g >> 1) & 1) as u8,
                    (g & 1) as u8,
                ]);
            }
        }
        Modulation::Qam16 => {
            let a = 1.0 / 10f64.sqrt();
            // Per-axis Gray map: (0,0) -> -3a, (0,1) -> -a, (1,1) -> a, (1,0) -> 3a.
            let coord = |hi: u32, lo: u32| match (hi, lo) {
                (0, 0) => -3.0 * a,
                (0, 1) => -a,
                (1, 1) => a,
                _ => 3.0 * a,
            };
            for v in 0..16u32 {
                let (b3, b2, b1, b0) = ((v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1);
                points.push(Complex64::new(coord(b3, b2), coord(b1, b0)));
                labels.push(vec![b3 as u8, b2 as u8, b1 as u8, b0 as u8]);
            }
        }
    }
    let mut index_of_label = vec![0usize; 1 << k];
    for (i, lb) in labels.iter().enumerate() {
        index_of_label[label_to_int(lb)] = i;
    }
    let d_const = match kind {
        Modulation::Bpsk => 2.0,
        Modulation::Qpsk => 2.0 * std::f64::consts::FRAC_1_SQRT_2,
        Modulation::Psk8 => 2.0 * (std::f64::consts::PI / 8.0).sin(),
        Modulation::Qam16 => 2.0 / 10f64.sqrt(),
    };
    Constellation {
        kind,
        k,
        points,
        labels,
        d_const,
        index_of_label,
    }
}

fn label_to_int(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

impl Constellation {
    /// Maps `k` bits (MSB first) to a constellation point.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Complex64> {
        if bits.len() != self.k {
            return Err(Error::Usage(format!(
                "expected {} bits for {}, got {}",
                self.k,
                self.kind,
                bits.len()
            )));
        }
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Ok(self.points[self.index_of_label[label_to_int(bits)]])
    }

    /// Nearest-point decision; ties break toward the lowest point index.
    pub fn demap_hard(&self, r: Complex64) -> Vec<u8> {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, &p) in self.points.iter().enumerate() {
            let d = (r - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        self.labels[best].clone()
    }

    /// Exact bitwise LLRs via a numerically stable log-sum-exp over the two
    /// label subsets of each bit position.
    pub fn llr_exact(&self, r: Complex64, sigma2: f64) -> Result<Vec<f64>> {
        if sigma2.is_nan() || sigma2 <= 0.0 {
            return Err(Error::Domain(format!(
                "noise variance must be positive, got {sigma2}"
            )));
        }
        let expo: Vec<f64> = self
            .points
            .iter()
            .map(|&p| -(r - p).norm_sqr() / (2.0 * sigma2))
            .collect();
        let mut out = Vec::with_capacity(self.k);
        for q in 0..self.k {
            let lse = |bit: u8| {
                let mut m = f64::NEG_INFINITY;
                for (i, &e) in expo.iter().enumerate() {
                    if self.labels[i][q] == bit && e > m {
                        m = e;
                    }
                }
                let mut s = 0.0;
                for (i, &e) in expo.iter().enumerate() {
                    if self.labels[i][q] == bit {
                        s += (e - m).exp();
                    }
                }
                m + s.ln()
            };
            out.push(lse(1) - lse(0));
        }
        Ok(out)
    }

    /// Low-complexity LLRs: closed forms for BPSK/QPSK, the midpoint rule for
    /// 16-QAM (linear in the distance to the per-bit decision boundary), and
    /// a max-log rule for 8-PSK.
    pub fn llr_approx(&self, r: Complex64, sigma2: f64) -> Result<Vec<f64>> {
        if sigma2.is_nan() || sigma2 <= 0.0 {
            return Err(Error::Domain(format!(
                "noise variance must be positive, got {sigma2}"
            )));
        }
        let (x, y) = (r.re, r.im);
        Ok(match self.kind {
            Modulation::Bpsk => vec![2.0 * x / sigma2],
            Modulation::Qpsk => {
                let c = 2.0 * std::f64::consts::FRAC_1_SQRT_2 / sigma2;
                vec![c * x, c * y]
            }
            Modulation::Qam16 => {
                let a = 1.0 / 10f64.sqrt();
                let c = 2.0 * a / sigma2;
                // Sign bits are linear in the coordinate; fold bits measure
                // the distance to the mid-amplitude boundary at 2a.
                vec![
                    c * x,
                    c * (2.0 * a - x.abs()),
                    c * y,
                    c * (2.0 * a - y.abs()),
                ]
            }
            Modulation::Psk8 => {
                let mut out = Vec::with_capacity(3);
                for q in 0..3 {
                    let mut d0 = f64::INFINITY;
                    let mut d1 = f64::INFINITY;
                    for (i, &p) in self.points.iter().enumerate() {
                        let d = (r - p).norm_sqr();
                        if self.labels[i][q] == 1 {
                            d1 = d1.min(d);
                        } else {
                            d0 = d0.min(d);
                        }
                    }
                    out.push((d0 - d1) / (2.0 * sigma2));
                }
                out
            }
        })
    }
}
