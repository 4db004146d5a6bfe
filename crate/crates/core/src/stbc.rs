//! Orthogonal transmit-diversity block designs for 1-4 transmit antennas and
//! their linear receive combiners.
//!
//! A design maps `n_syms` complex symbols onto an `l x n_tx` transmission
//! matrix whose columns are orthogonal for every symbol vector. The matched
//! combiner then decouples the symbols: each estimate sees the full channel
//! energy `E = sum |H_ij|^2` and additive noise of per-dimension variance
//! `sigma2 / E`, i.e. exactly the maximum-ratio-combining bound for the same
//! diversity order.

use crate::mat::CxMat;
use crate::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

/// The four supported designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignId {
    /// Single transmit antenna (receive diversity only).
    Siso,
    /// Rate-1 design for two transmit antennas.
    Alamouti,
    /// Rate-3/4 design for three transmit antennas.
    G3,
    /// Rate-3/4 design for four transmit antennas.
    G4,
}

impl fmt::Display for DesignId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DesignId::Siso => "siso",
            DesignId::Alamouti => "alamouti",
            DesignId::G3 => "g3",
            DesignId::G4 => "g4",
        };
        f.write_str(s)
    }
}

impl FromStr for DesignId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "siso" => Ok(DesignId::Siso),
            "alamouti" => Ok(DesignId::Alamouti),
            "g3" => Ok(DesignId::G3),
            "g4" => Ok(DesignId::G4),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Exact rational code rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    num: u64,
    den: u64,
}

impl Rate {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = gcd(num.max(1), den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// One slot/antenna cell of a design: zero, or `(+/-) S_idx` possibly
/// conjugated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Zero,
    Sym { idx: usize, conj: bool, neg: bool },
}

const Z: Cell = Cell::Zero;

const fn s(idx: usize) -> Cell {
    Cell::Sym {
        idx,
        conj: false,
        neg: false,
    }
}

const fn sc(idx: usize) -> Cell {
    Cell::Sym {
        idx,
        conj: true,
        neg: false,
    }
}

const fn sn(idx: usize) -> Cell {
    Cell::Sym {
        idx,
        conj: false,
        neg: true,
    }
}

const fn snc(idx: usize) -> Cell {
    Cell::Sym {
        idx,
        conj: true,
        neg: true,
    }
}

#[derive(Debug, Clone)]
pub struct OrthogonalDesign {
    pub id: DesignId,
    /// Time slots per code word.
    pub l: usize,
    pub n_tx: usize,
    /// Symbols carried per code word.
    pub n_syms: usize,
    entries: Vec<Vec<Cell>>,
}

/// Output of the receive combiner for one code word.
#[derive(Debug, Clone)]
pub struct CombinerOutput {
    /// Decoupled symbol estimates, unbiased for the transmitted symbols.
    pub estimates: Vec<Complex64>,
    /// Channel energy `sum |H_ij|^2` seen by every estimate.
    pub energy: f64,
    /// Noise variance per real dimension of each estimate: `sigma2 / energy`.
    pub post_sigma2: f64,
}

/// Returns the named design with its transmission table.
pub fn design(id: DesignId) -> OrthogonalDesign {
    let entries = match id {
        DesignId::Siso => vec![vec![s(0)]],
        DesignId::Alamouti => vec![vec![s(0), s(1)], vec![snc(1), sc(0)]],
        DesignId::G3 => vec![
            vec![s(0), s(1), s(2)],
            vec![snc(1), sc(0), Z],
            vec![snc(2), Z, sc(0)],
            vec![Z, snc(2), sc(1)],
        ],
        DesignId::G4 => vec![
            vec![s(0), s(1), s(2), Z],
            vec![snc(1), sc(0), Z, s(2)],
            vec![snc(2), Z, sc(0), sn(1)],
            vec![Z, snc(2), sc(1), s(0)],
        ],
    };
    let l = entries.len();
    let n_tx = entries[0].len();
    let n_syms = 1 + entries
        .iter()
        .flatten()
        .filter_map(|c| match c {
            Cell::Sym { idx, .. } => Some(*idx),
            Cell::Zero => None,
        })
        .max()
        .unwrap();
    OrthogonalDesign {
        id,
        l,
        n_tx,
        n_syms,
        entries,
    }
}

impl OrthogonalDesign {
    /// Symbols per channel use.
    pub fn rate(&self) -> Rate {
        Rate::new(self.n_syms as u64, self.l as u64)
    }

    /// Builds the `l x n_tx` transmission matrix for one symbol vector.
    pub fn encode(&self, syms: &[Complex64]) -> Result<CxMat> {
        if syms.len() != self.n_syms {
            return Err(Error::Usage(format!(
                "{} carries {} symbols per code word, got {}",
                self.id,
                self.n_syms,
                syms.len()
            )));
        }
        let mut g = CxMat::zeros(self.l, self.n_tx);
        for (t, row) in self.entries.iter().enumerate() {
            for (i, cell) in row.iter().enumerate() {
                if let Cell::Sym { idx, conj, neg } = *cell {
                    let mut v = syms[idx];
                    if conj {
                        v = v.conj();
                    }
                    if neg {
                        v = -v;
                    }
                    g.set(t, i, v);
                }
            }
        }
        Ok(g)
    }

    /// Matched linear combiner. `r` is the `l x n_rx` received block, `h` the
    /// `n_tx x n_rx` channel. Every cell carrying `S_k` contributes the
    /// matched product (`R H*` for plain cells, `R* H` for conjugated ones,
    /// with the cell's sign); the sum is divided by the channel energy, which
    /// makes the estimates unbiased.
    pub fn combine(&self, r: &CxMat, h: &CxMat, sigma2: f64) -> Result<CombinerOutput> {
        if h.rows() != self.n_tx || r.rows() != self.l || r.cols() != h.cols() {
            return Err(Error::Usage(format!(
                "{}: received block must be {}x{} and channel {}x{}, got {}x{} and {}x{}",
                self.id,
                self.l,
                h.cols(),
                self.n_tx,
                h.cols(),
                r.rows(),
                r.cols(),
                h.rows(),
                h.cols()
            )));
        }
        if sigma2.is_nan() || sigma2 < 0.0 {
            return Err(Error::Domain(format!(
                "noise variance must be >= 0, got {sigma2}"
            )));
        }
        let energy = channel_energy(h);
        if energy == 0.0 {
            return Err(Error::DegenerateChannel);
        }
        let n_rx = h.cols();
        let mut num = vec![Complex64::new(0.0, 0.0); self.n_syms];
        for (t, row) in self.entries.iter().enumerate() {
            for (i, cell) in row.iter().enumerate() {
                let Cell::Sym { idx, conj, neg } = *cell else {
                    continue;
                };
                for j in 0..n_rx {
                    let term = if conj {
                        r.get(t, j).conj() * h.get(i, j)
                    } else {
                        r.get(t, j) * h.get(i, j).conj()
                    };
                    num[idx] += if neg { -term } else { term };
                }
            }
        }
        let estimates = num.into_iter().map(|v| v / energy).collect();
        Ok(CombinerOutput {
            estimates,
            energy,
            post_sigma2: sigma2 / energy,
        })
    }

    /// Worst-case deviation of `G^H G` from `sum |S_k|^2 * I`: the largest
    /// off-diagonal magnitude plus the largest diagonal error. Zero (up to
    /// rounding) for a valid orthogonal design.
    pub fn orthogonality_defect(&self, syms: &[Complex64]) -> Result<f64> {
        let g = self.encode(syms)?;
        let m = g.hermitian().mul(&g);
        let target: f64 = syms.iter().map(|v| v.norm_sqr()).sum();
        let mut off = 0.0f64;
        let mut diag = 0.0f64;
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if i == j {
                    diag = diag.max((m.get(i, j).re - target).abs().max(m.get(i, j).im.abs()));
                } else {
                    off = off.max(m.get(i, j).norm());
                }
            }
        }
        Ok(off + diag)
    }
}

/// Total channel energy `sum_ij |H_ij|^2`.
pub fn channel_energy(h: &CxMat) -> f64 {
    h.energy()
}

/// Post-combining SNR for unit-energy symbols: `channel_energy / sigma2`.
pub fn combined_snr(h: &CxMat, sigma2: f64) -> Result<f64> {
    if sigma2.is_nan() || sigma2 <= 0.0 {
        return Err(Error::Domain(format!(
            "noise variance must be positive, got {sigma2}"
        )));
    }
    Ok(channel_energy(h) / sigma2)
}

/// Upper bound on the rate of a complex orthogonal design with `n_tx`
/// transmit antennas: `(ceil(n/2) + 1) / (2 ceil(n/2))`.
pub fn max_rate_bound(n_tx: usize) -> Result<Rate> {
    if n_tx == 0 {
        return Err(Error::Domain("antenna count must be at least 1".into()));
    }
    let a = (n_tx as u64).div_ceil(2);
    Ok(Rate::new(a + 1, 2 * a))
}

/// Transmit-diversity energy penalty relative to receive maximum-ratio
/// combining at the same diversity order: `10 log10(1 / n_tx)` dB.
pub fn energy_loss_bound_db(n_tx: usize) -> Result<f64> {
    if n_tx == 0 {
        return Err(Error::Domain("antenna count must be at least 1".into()));
    }
    Ok(-10.0 * (n_tx as f64).log10())
}
