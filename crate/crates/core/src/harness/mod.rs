//! End-to-end Monte-Carlo BER pipeline: information bits through FEC,
//! interleaving, constellation mapping, the space-time encoder, the fading
//! channel, the combiner, soft or hard demapping, and decoding, with seeded
//! reproducibility and CSV reporting.
//!
//! SNR convention: the grid value is the average received signal power per
//! receive antenna per slot divided by the complex noise energy `2 sigma2`.
//! Every active code-word cell carries unit average symbol energy and
//! `E|H_ij|^2 = 1`, so that power is `n_syms * n_tx / l` (1 for siso, 2 for
//! alamouti, 9/4 for g3, 3 for g4) and fixes `sigma2` for a grid value.
//!
//! Work is split into fixed-size units (one FEC frame, or a fixed batch of
//! uncoded code words). Each unit draws its channel, noise, and data from
//! substreams keyed by `(seed, purpose, snr bits, unit index)`, so results
//! are independent of execution order, identical across reruns, and runs
//! that differ only in decision mode traverse identical realizations.

mod report;

pub use report::{crossing_db, gap_at_ber, read_csv, Axis, CSV_HEADER};

use crate::channel::{add_noise, apply, draw_channel, substream, ChannelBlock, NoiseSpec};
use crate::constellation::{make_constellation, weight_llr, Constellation, Modulation};
use crate::fec::{viterbi_decode_soft, ConvCode, Interleaver, Puncturer};
use crate::mat::CxMat;
use crate::stbc::{design, DesignId, OrthogonalDesign, Rate};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

/// How combiner estimates are turned into decoder inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionMode {
    /// Nearest-point bit decisions, every bit weighted equally.
    Hard,
    /// Nearest-point bit decisions scaled by the code word's channel energy.
    HardEnergy,
    /// Approximate bitwise LLRs scaled by the code word's channel energy.
    Soft,
}

impl fmt::Display for DecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DecisionMode::Hard => "hard",
            DecisionMode::HardEnergy => "hard-energy",
            DecisionMode::Soft => "soft",
        };
        f.write_str(s)
    }
}

impl FromStr for DecisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(DecisionMode::Hard),
            "hard-energy" => Ok(DecisionMode::HardEnergy),
            "soft" => Ok(DecisionMode::Soft),
            other => Err(Error::Config(format!("unknown decision mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FecMode {
    None,
    /// Rate-1/2 memory-6 convolutional code.
    ConvR12,
    /// The same code punctured to rate 2/3.
    ConvPunctR23,
}

impl FecMode {
    pub fn rate(self) -> Rate {
        match self {
            FecMode::None => Rate::new(1, 1),
            FecMode::ConvR12 => Rate::new(1, 2),
            FecMode::ConvPunctR23 => Rate::new(2, 3),
        }
    }
}

impl fmt::Display for FecMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FecMode::None => "none",
            FecMode::ConvR12 => "conv",
            FecMode::ConvPunctR23 => "conv-p23",
        };
        f.write_str(s)
    }
}

impl FromStr for FecMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(FecMode::None),
            "conv" => Ok(FecMode::ConvR12),
            "conv-p23" => Ok(FecMode::ConvPunctR23),
            other => Err(Error::Config(format!("unknown fec mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    /// Block Rayleigh fading, redrawn per space-time code word.
    Rayleigh,
    /// All gains fixed at 1 (AWGN test hook).
    FixedUnit,
}

/// Stop whichever comes first: enough errors for a stable estimate, or the
/// bit budget.
#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub max_bits: u64,
    pub target_errors: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_bits: 10_000_000,
            target_errors: 300,
        }
    }
}

pub const DEFAULT_INTERLEAVER_LEN: usize = 4200;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub scheme: DesignId,
    pub n_rx: usize,
    pub modulation: Modulation,
    pub decision: DecisionMode,
    pub fec: FecMode,
    pub snr_grid_db: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    /// Coded bits per FEC frame (frame length after puncturing).
    pub interleaver_len: usize,
    pub channel_model: ChannelModel,
    pub noise_enabled: bool,
}

impl SimConfig {
    pub fn new(scheme: DesignId, n_rx: usize, modulation: Modulation) -> Self {
        Self {
            scheme,
            n_rx,
            modulation,
            decision: DecisionMode::Hard,
            fec: FecMode::None,
            snr_grid_db: Vec::new(),
            stop: StopRule::default(),
            seed: 1,
            interleaver_len: DEFAULT_INTERLEAVER_LEN,
            channel_model: ChannelModel::Rayleigh,
            noise_enabled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rx < 1 {
            return Err(Error::Config("need at least one receive antenna".into()));
        }
        if !self.snr_grid_db.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("snr grid must be strictly increasing".into()));
        }
        if self.stop.target_errors < 100 {
            return Err(Error::Config(format!(
                "target_errors must be at least 100 for a stable estimate, got {}",
                self.stop.target_errors
            )));
        }
        if self.stop.max_bits == 0 {
            return Err(Error::Config("max_bits must be positive".into()));
        }
        if self.fec != FecMode::None {
            let k = self.modulation.bits_per_symbol();
            if !self.interleaver_len.is_multiple_of(k) {
                return Err(Error::Config(format!(
                    "interleaver length {} must be divisible by {k} bits per symbol",
                    self.interleaver_len
                )));
            }
            match self.fec {
                FecMode::ConvR12 if !self.interleaver_len.is_multiple_of(2) => {
                    return Err(Error::Config(
                        "rate-1/2 frames need an even bit count".into(),
                    ));
                }
                FecMode::ConvPunctR23 if !self.interleaver_len.is_multiple_of(12) => {
                    // Divisible by 3 to undo the puncturing and by 4 so the
                    // symbol count works for every modulation.
                    return Err(Error::Config(
                        "rate-2/3 frames need a length divisible by 12".into(),
                    ));
                }
                _ => {}
            }
            if self.info_bits_per_frame() < 1 {
                return Err(Error::Config(format!(
                    "interleaver length {} leaves no room for payload",
                    self.interleaver_len
                )));
            }
        }
        Ok(())
    }

    /// Information bits carried by one FEC frame (0 when uncoded).
    pub fn info_bits_per_frame(&self) -> usize {
        let unpunctured = match self.fec {
            FecMode::None => return 0,
            FecMode::ConvR12 => self.interleaver_len,
            FecMode::ConvPunctR23 => self.interleaver_len / 3 * 4,
        };
        (unpunctured / 2).saturating_sub(ConvCode::new().memory())
    }

    /// Average received signal power per receive antenna per slot.
    pub fn rx_power(&self) -> f64 {
        let d = design(self.scheme);
        (d.n_syms * d.n_tx) as f64 / d.l as f64
    }

    /// Per-real-dimension noise variance realizing a grid SNR.
    pub fn sigma2_for(&self, snr_db: f64) -> f64 {
        self.rx_power() / (2.0 * 10f64.powf(snr_db / 10.0))
    }

    /// Information bits per channel use: `k * r_mimo * r_fec`.
    pub fn bits_per_channel_use(&self) -> f64 {
        let d = design(self.scheme);
        self.modulation.bits_per_symbol() as f64 * d.rate().as_f64() * self.fec.rate().as_f64()
    }
}

/// Converts a grid SNR to E_b/N_0 in dB for the configured spectral
/// efficiency.
pub fn ebn0_of(snr_db: f64, cfg: &SimConfig) -> f64 {
    snr_db - 10.0 * cfg.bits_per_channel_use().log10()
}

/// One measured point of a BER curve.
#[derive(Debug, Clone, Copy)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub wallclock_s: f64,
}

/// Aggregate signal-power bookkeeping for the abscissa self-check.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointStats {
    pub rx_power_sum: f64,
    pub rx_samples: u64,
}

impl PointStats {
    /// Measured received power per receive antenna per slot.
    pub fn rx_power_mean(&self) -> f64 {
        if self.rx_samples == 0 {
            0.0
        } else {
            self.rx_power_sum / self.rx_samples as f64
        }
    }
}

// Substream purposes.
const CHANNEL_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const DATA_STREAM: u64 = 3;
const INTERLEAVER_STREAM: u64 = 4;

/// Runs the chain at one grid SNR until a stop criterion fires.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<BerPoint> {
    run_point_with_stats(cfg, snr_db).map(|(p, _)| p)
}

/// As [`run_point`], also returning the received-power measurement used by
/// the abscissa self-check.
pub fn run_point_with_stats(cfg: &SimConfig, snr_db: f64) -> Result<(BerPoint, PointStats)> {
    cfg.validate()?;
    let start = Instant::now();
    let runner = PointRunner::new(cfg, snr_db)?;
    let mut bits = 0u64;
    let mut errors = 0u64;
    let mut stats = PointStats::default();
    let mut unit = 0u64;
    loop {
        let r = runner.run_unit(unit)?;
        bits += r.bits;
        errors += r.errors;
        stats.rx_power_sum += r.rx_power_sum;
        stats.rx_samples += r.rx_samples;
        unit += 1;
        if errors >= cfg.stop.target_errors || bits >= cfg.stop.max_bits {
            break;
        }
    }
    let point = BerPoint {
        snr_db,
        ebn0_db: ebn0_of(snr_db, cfg),
        bits,
        errors,
        ber: errors as f64 / bits as f64,
        wallclock_s: start.elapsed().as_secs_f64(),
    };
    Ok((point, stats))
}

/// Runs every grid point, optionally streaming CSV rows to `out` as they
/// finish (a failed write leaves the completed rows on disk). Curves with
/// well-measured points that rise with SNR draw a statistical-floor warning
/// on stderr, never an error.
pub fn sweep(cfg: &SimConfig, out: Option<&Path>) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    let mut writer = match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            writeln!(f, "{CSV_HEADER}")?;
            f.flush()?;
            Some(f)
        }
        None => None,
    };
    let mut points = Vec::with_capacity(cfg.snr_grid_db.len());
    for &snr_db in &cfg.snr_grid_db {
        let (point, stats) = run_point_with_stats(cfg, snr_db)?;
        // The received-power mean needs this much data before a 1% check is
        // outside its own estimation noise for the heavier-tailed schemes.
        if stats.rx_samples >= 200_000 {
            let configured = 10f64.powf(snr_db / 10.0);
            let measured = stats.rx_power_mean() / (2.0 * cfg.sigma2_for(snr_db));
            if (measured / configured - 1.0).abs() > 0.01 {
                eprintln!(
                    "warning: measured rx SNR {measured:.4} deviates from configured \
                     {configured:.4} at {snr_db} dB"
                );
            }
        }
        if let Some(f) = writer.as_mut() {
            writeln!(f, "{}", report::format_row(cfg, &point))?;
            f.flush()?;
        }
        points.push(point);
    }
    for w in points.windows(2) {
        if w[0].bits >= 100_000 && w[1].bits >= 100_000 && w[1].ber > w[0].ber {
            eprintln!(
                "warning: ber rose from {:.3e} to {:.3e} between {} and {} dB \
                 (statistical floor)",
                w[0].ber, w[1].ber, w[0].snr_db, w[1].snr_db
            );
        }
    }
    Ok(points)
}

struct UnitResult {
    bits: u64,
    errors: u64,
    rx_power_sum: f64,
    rx_samples: u64,
}

struct PointRunner<'a> {
    cfg: &'a SimConfig,
    des: OrthogonalDesign,
    con: Constellation,
    code: ConvCode,
    puncturer: Puncturer,
    interleaver: Option<Interleaver>,
    noise: Option<NoiseSpec>,
    combine_sigma2: f64,
    snr_tag: u64,
    /// Uncoded code words per unit (unused when coded).
    words_per_unit: usize,
}

impl<'a> PointRunner<'a> {
    fn new(cfg: &'a SimConfig, snr_db: f64) -> Result<Self> {
        let des = design(cfg.scheme);
        let con = make_constellation(cfg.modulation);
        let sigma2 = cfg.sigma2_for(snr_db);
        let (noise, combine_sigma2) = if cfg.noise_enabled {
            (Some(NoiseSpec::new(sigma2)?), sigma2)
        } else {
            (None, 0.0)
        };
        let interleaver = match cfg.fec {
            FecMode::None => None,
            _ => Some(Interleaver::random(
                cfg.interleaver_len,
                &mut substream(cfg.seed, &[INTERLEAVER_STREAM]),
            )),
        };
        let bits_per_word = des.n_syms * con.k;
        let words_per_unit = 4096usize.div_ceil(bits_per_word);
        Ok(Self {
            cfg,
            des,
            con,
            code: ConvCode::new(),
            puncturer: Puncturer::rate23(),
            interleaver,
            noise,
            combine_sigma2,
            snr_tag: snr_db.to_bits(),
            words_per_unit,
        })
    }

    fn run_unit(&self, unit: u64) -> Result<UnitResult> {
        let mut ch_rng = substream(self.cfg.seed, &[CHANNEL_STREAM, self.snr_tag, unit]);
        let mut noise_rng = substream(self.cfg.seed, &[NOISE_STREAM, self.snr_tag, unit]);
        let mut data_rng = substream(self.cfg.seed, &[DATA_STREAM, self.snr_tag, unit]);
        match self.cfg.fec {
            FecMode::None => self.run_uncoded_unit(&mut ch_rng, &mut noise_rng, &mut data_rng),
            _ => self.run_coded_unit(&mut ch_rng, &mut noise_rng, &mut data_rng),
        }
    }

    /// Draws a channel block (redrawing the probability-zero all-zero case)
    /// and carries one code word through it.
    fn transmit_word(
        &self,
        syms: &[Complex64],
        word_index: u64,
        ch_rng: &mut impl Rng,
        noise_rng: &mut impl Rng,
        stats: &mut UnitResult,
    ) -> Result<crate::stbc::CombinerOutput> {
        let mut block = match self.cfg.channel_model {
            ChannelModel::Rayleigh => loop {
                let b = draw_channel(self.des.n_tx, self.cfg.n_rx, ch_rng);
                if b.h.energy() > 0.0 {
                    break b;
                }
            },
            ChannelModel::FixedUnit => {
                let mut h = CxMat::zeros(self.des.n_tx, self.cfg.n_rx);
                for e in h.entries_mut() {
                    *e = Complex64::new(1.0, 0.0);
                }
                ChannelBlock { h, block_index: 0 }
            }
        };
        block.block_index = word_index;
        let x = self.des.encode(syms)?;
        let clean = apply(&x, &block, None, noise_rng)?;
        stats.rx_power_sum += clean.energy();
        stats.rx_samples += (clean.rows() * clean.cols()) as u64;
        let r = match &self.noise {
            Some(n) => add_noise(&clean, n, noise_rng),
            None => clean,
        };
        self.des.combine(&r, &block.h, self.combine_sigma2)
    }

    /// Uncoded: hard symbol decisions straight after the combiner.
    fn run_uncoded_unit(
        &self,
        ch_rng: &mut impl Rng,
        noise_rng: &mut impl Rng,
        data_rng: &mut impl Rng,
    ) -> Result<UnitResult> {
        let mut out = UnitResult {
            bits: 0,
            errors: 0,
            rx_power_sum: 0.0,
            rx_samples: 0,
        };
        let k = self.con.k;
        for w in 0..self.words_per_unit {
            let bits: Vec<u8> = (0..self.des.n_syms * k)
                .map(|_| data_rng.gen_range(0..2u8))
                .collect();
            let syms: Vec<Complex64> = bits
                .chunks(k)
                .map(|chunk| self.con.map_bits(chunk))
                .collect::<Result<_>>()?;
            let combined = self.transmit_word(&syms, w as u64, ch_rng, noise_rng, &mut out)?;
            for (est, tx) in combined.estimates.iter().zip(bits.chunks(k)) {
                let rx = self.con.demap_hard(*est);
                out.errors += rx.iter().zip(tx).filter(|(a, b)| a != b).count() as u64;
                out.bits += k as u64;
            }
        }
        Ok(out)
    }

    /// Coded: one FEC frame per unit. Left-over slots of the final
    /// space-time word are zero-padded and their LLRs discarded.
    fn run_coded_unit(
        &self,
        ch_rng: &mut impl Rng,
        noise_rng: &mut impl Rng,
        data_rng: &mut impl Rng,
    ) -> Result<UnitResult> {
        let mut out = UnitResult {
            bits: 0,
            errors: 0,
            rx_power_sum: 0.0,
            rx_samples: 0,
        };
        let k = self.con.k;
        let n_syms = self.des.n_syms;
        let info_len = self.cfg.info_bits_per_frame();
        let info: Vec<u8> = (0..info_len).map(|_| data_rng.gen_range(0..2u8)).collect();
        let coded = self.code.encode(&info);
        let stream = match self.cfg.fec {
            FecMode::ConvPunctR23 => self.puncturer.puncture(&coded)?,
            _ => coded,
        };
        let interleaver = self
            .interleaver
            .as_ref()
            .expect("coded mode has an interleaver");
        let tx_bits = interleaver.interleave(&stream)?;
        let syms: Vec<Complex64> = tx_bits
            .chunks(k)
            .map(|chunk| self.con.map_bits(chunk))
            .collect::<Result<_>>()?;
        let n_used = syms.len();
        let mut lambdas: Vec<f64> = Vec::with_capacity(tx_bits.len());
        for (w, chunk) in syms.chunks(n_syms).enumerate() {
            let mut word = chunk.to_vec();
            word.resize(n_syms, Complex64::new(0.0, 0.0));
            let combined = self.transmit_word(&word, w as u64, ch_rng, noise_rng, &mut out)?;
            for (s, est) in combined.estimates.iter().enumerate() {
                if w * n_syms + s >= n_used {
                    break; // padding slot
                }
                match self.cfg.decision {
                    DecisionMode::Soft => {
                        let raw = self.con.llr_approx(*est, 1.0)?;
                        lambdas.extend(weight_llr(&raw, combined.energy)?.lambdas);
                    }
                    DecisionMode::Hard | DecisionMode::HardEnergy => {
                        let w_bit = match self.cfg.decision {
                            DecisionMode::HardEnergy => combined.energy,
                            _ => 1.0,
                        };
                        lambdas.extend(
                            self.con
                                .demap_hard(*est)
                                .iter()
                                .map(|&b| (2.0 * b as f64 - 1.0) * w_bit),
                        );
                    }
                }
            }
        }
        let deinterleaved = interleaver.deinterleave(&lambdas)?;
        let full = match self.cfg.fec {
            FecMode::ConvPunctR23 => self.puncturer.depuncture(&deinterleaved)?,
            _ => deinterleaved,
        };
        let decoded = viterbi_decode_soft(&self.code, &full)?;
        out.errors += decoded.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
        out.bits += info_len as u64;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(scheme: DesignId, modulation: Modulation) -> SimConfig {
        SimConfig::new(scheme, 1, modulation)
    }

    #[test]
    fn ebn0_examples() {
        let mut cfg = base(DesignId::Siso, Modulation::Qpsk);
        assert!((ebn0_of(10.0, &cfg) - (10.0 - 10.0 * 2f64.log10())).abs() < 1e-12);

        cfg = base(DesignId::G4, Modulation::Qam16);
        cfg.fec = FecMode::ConvPunctR23;
        // offset 10 log10(4 * 3/4 * 2/3) = 10 log10(2)
        assert!((10.0 - ebn0_of(10.0, &cfg) - 10.0 * 2f64.log10()).abs() < 1e-12);

        cfg = base(DesignId::Siso, Modulation::Bpsk);
        assert_eq!(ebn0_of(7.5, &cfg), 7.5);
    }

    #[test]
    fn rx_power_per_scheme() {
        assert_eq!(base(DesignId::Siso, Modulation::Bpsk).rx_power(), 1.0);
        assert_eq!(base(DesignId::Alamouti, Modulation::Bpsk).rx_power(), 2.0);
        assert_eq!(base(DesignId::G3, Modulation::Bpsk).rx_power(), 2.25);
        assert_eq!(base(DesignId::G4, Modulation::Bpsk).rx_power(), 3.0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = base(DesignId::Alamouti, Modulation::Qpsk);
        cfg.snr_grid_db = vec![1.0, 2.0, 2.0];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.snr_grid_db = vec![1.0, 2.0, 3.0];
        assert!(cfg.validate().is_ok());

        cfg.stop.target_errors = 50;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.stop.target_errors = 100;

        cfg.n_rx = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.n_rx = 1;

        cfg.fec = FecMode::ConvR12;
        cfg.interleaver_len = 4201; // odd and not divisible by 2 bits/symbol
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.interleaver_len = 4200;
        assert!(cfg.validate().is_ok());

        cfg.fec = FecMode::ConvPunctR23;
        cfg.interleaver_len = 4204;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.interleaver_len = 4200;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn frame_payload_sizes() {
        let mut cfg = base(DesignId::Alamouti, Modulation::Qam16);
        cfg.fec = FecMode::ConvR12;
        assert_eq!(cfg.info_bits_per_frame(), 4200 / 2 - 6);
        cfg.fec = FecMode::ConvPunctR23;
        assert_eq!(cfg.info_bits_per_frame(), 2 * 4200 / 3 - 6);
        cfg.fec = FecMode::None;
        assert_eq!(cfg.info_bits_per_frame(), 0);
    }

    #[test]
    fn noiseless_chain_has_zero_errors() {
        for (scheme, fec, decision) in [
            (DesignId::Siso, FecMode::None, DecisionMode::Hard),
            (DesignId::G3, FecMode::None, DecisionMode::Hard),
            (DesignId::Alamouti, FecMode::ConvR12, DecisionMode::Soft),
            (
                DesignId::G4,
                FecMode::ConvPunctR23,
                DecisionMode::HardEnergy,
            ),
        ] {
            let mut cfg = SimConfig::new(scheme, 2, Modulation::Qam16);
            cfg.fec = fec;
            cfg.decision = decision;
            cfg.noise_enabled = false;
            cfg.stop = StopRule {
                max_bits: 20_000,
                target_errors: 100,
            };
            let p = run_point(&cfg, 10.0).unwrap();
            assert_eq!(p.errors, 0, "{scheme} {fec}");
            assert!(p.bits >= 20_000);
            assert_eq!(p.ber, 0.0);
        }
    }

    #[test]
    fn measured_rx_power_matches_convention() {
        for scheme in [
            DesignId::Siso,
            DesignId::Alamouti,
            DesignId::G3,
            DesignId::G4,
        ] {
            let mut cfg = SimConfig::new(scheme, 2, Modulation::Qpsk);
            cfg.stop = StopRule {
                max_bits: 200_000,
                target_errors: 100_000,
            };
            let snr_db = 5.0;
            let (_, stats) = run_point_with_stats(&cfg, snr_db).unwrap();
            assert!(stats.rx_samples > 50_000);
            let measured = stats.rx_power_mean() / (2.0 * cfg.sigma2_for(snr_db));
            let configured = 10f64.powf(snr_db / 10.0);
            assert!(
                (measured / configured - 1.0).abs() < 0.01,
                "{scheme}: measured snr {measured} vs {configured}"
            );
        }
    }

    #[test]
    fn identical_seeds_reproduce_counts_exactly() {
        let mut cfg = base(DesignId::Alamouti, Modulation::Qpsk);
        cfg.n_rx = 2;
        cfg.fec = FecMode::ConvR12;
        cfg.decision = DecisionMode::Soft;
        cfg.snr_grid_db = vec![2.0, 4.0];
        cfg.stop = StopRule {
            max_bits: 30_000,
            target_errors: 100,
        };
        let a = sweep(&cfg, None).unwrap();
        let b = sweep(&cfg, None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.bits, x.errors), (y.bits, y.errors));
        }
        cfg.seed = 2;
        let c = sweep(&cfg, None).unwrap();
        assert!(
            a.iter().zip(&c).any(|(x, y)| x.errors != y.errors),
            "different seed should change realizations"
        );
    }

    #[test]
    fn paired_modes_share_realizations() {
        // Hard and hard-energy agree decision-by-decision whenever no frame
        // needed correction; with noise off they count identical bits.
        let mut cfg = base(DesignId::Alamouti, Modulation::Qam16);
        cfg.fec = FecMode::ConvR12;
        cfg.noise_enabled = false;
        cfg.stop = StopRule {
            max_bits: 10_000,
            target_errors: 100,
        };
        cfg.decision = DecisionMode::Hard;
        let hard = run_point(&cfg, 8.0).unwrap();
        cfg.decision = DecisionMode::HardEnergy;
        let he = run_point(&cfg, 8.0).unwrap();
        assert_eq!(hard.bits, he.bits);
        assert_eq!(hard.errors, he.errors);
    }

    #[test]
    fn run_point_rejects_invalid_config() {
        let mut cfg = base(DesignId::Siso, Modulation::Bpsk);
        cfg.stop.target_errors = 10;
        assert!(matches!(run_point(&cfg, 5.0), Err(Error::Config(_))));
    }

    #[test]
    fn curves_fall_monotonically_on_identical_seeds() {
        // Transmit diversity 2x2 and receive-only 1x2 over the same seed and
        // grid, at least 1e5 bits per point.
        for (scheme, n_rx) in [(DesignId::Alamouti, 2), (DesignId::Siso, 2)] {
            let mut cfg = SimConfig::new(scheme, n_rx, Modulation::Qpsk);
            cfg.snr_grid_db = vec![4.0, 8.0, 12.0, 16.0];
            cfg.stop = StopRule {
                max_bits: 100_000,
                target_errors: 1_000_000,
            };
            let points = sweep(&cfg, None).unwrap();
            for p in &points {
                assert!(p.bits >= 100_000);
            }
            for w in points.windows(2) {
                assert!(
                    w[1].ber < w[0].ber,
                    "{scheme}: ber rose from {:.3e} to {:.3e}",
                    w[0].ber,
                    w[1].ber
                );
            }
        }
    }

    #[test]
    fn diversity_order_steepens_high_snr_slope() {
        // log10(BER) drop over 6 -> 16 dB grows with the product of antenna
        // counts: 1x1 falls about one decade, 2x1 about 1.5, 2x2 about 3.
        let drop = |scheme, n_rx| {
            let mut cfg = SimConfig::new(scheme, n_rx, Modulation::Qpsk);
            cfg.stop = StopRule {
                max_bits: 12_000_000,
                target_errors: 300,
            };
            let low = run_point(&cfg, 6.0).unwrap();
            let high = run_point(&cfg, 16.0).unwrap();
            assert!(high.errors > 50, "{scheme} {n_rx}rx: too few errors");
            (low.ber / high.ber).log10()
        };
        let order1 = drop(DesignId::Siso, 1);
        let order2 = drop(DesignId::Alamouti, 1);
        let order4 = drop(DesignId::Alamouti, 2);
        assert!(
            order1 + 0.3 < order2 && order2 + 0.5 < order4,
            "slopes not ordered: {order1:.2} {order2:.2} {order4:.2}"
        );
    }

    #[test]
    fn empty_grid_writes_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let cfg = base(DesignId::Siso, Modulation::Bpsk);
        let points = sweep(&cfg, Some(&path)).unwrap();
        assert!(points.is_empty());
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn rerun_is_byte_identical_except_wallclock() {
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        let mut cfg = base(DesignId::Alamouti, Modulation::Qpsk);
        cfg.snr_grid_db = vec![3.0, 6.0];
        cfg.stop = StopRule {
            max_bits: 20_000,
            target_errors: 100,
        };
        sweep(&cfg, Some(&p1)).unwrap();
        sweep(&cfg, Some(&p2)).unwrap();
        let a = std::fs::read_to_string(&p1).unwrap();
        let b = std::fs::read_to_string(&p2).unwrap();
        for (la, lb) in a.lines().zip(b.lines()) {
            let strip = |l: &str| l.rsplit_once(',').map(|(head, _)| head.to_string());
            assert_eq!(strip(la), strip(lb));
        }
        assert_eq!(a.lines().count(), 3);
        assert_eq!(a.lines().count(), b.lines().count());
    }
}
