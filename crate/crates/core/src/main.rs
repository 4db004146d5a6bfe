//! Command-line front end: Monte-Carlo BER sweeps to CSV, dB-gap readout
//! between two sweep files, and the built-in self-check suite.

use clap::{Parser, Subcommand, ValueEnum};
use mimolink::constellation::Modulation;
use mimolink::harness::{
    gap_at_ber, read_csv, sweep, Axis, DecisionMode, FecMode, SimConfig, StopRule,
};
use mimolink::stbc::DesignId;
use mimolink::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mimolink",
    version,
    about = "Space-time block code link simulator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a BER sweep over an SNR grid and write one CSV row per point
    Simulate {
        /// Transmit diversity scheme
        #[arg(long)]
        scheme: SchemeArg,
        /// Number of receive antennas
        #[arg(long, default_value_t = 1)]
        nrx: usize,
        /// Constellation
        #[arg(long = "mod")]
        modulation: ModArg,
        /// Decision metric fed to the decoder
        #[arg(long, default_value = "hard")]
        decision: DecisionArg,
        /// Outer code
        #[arg(long, default_value = "none")]
        fec: FecArg,
        /// SNR grid in dB as START:END:STEP (inclusive)
        #[arg(long)]
        snr: String,
        /// Stop a point once this many bit errors are seen
        #[arg(long, default_value_t = 300)]
        target_errors: u64,
        /// Hard cap on simulated information bits per point
        #[arg(long, default_value_t = 10_000_000)]
        max_bits: u64,
        /// Root seed; equal seeds reproduce results exactly
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Coded-bit interleaver span
        #[arg(long, default_value_t = 4200)]
        interleaver_len: usize,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure the horizontal dB gap between two sweep CSVs at a target BER
    Gap {
        /// Reference curve CSV
        #[arg(long)]
        a: PathBuf,
        /// Compared curve CSV (positive gap: needs more dB than the reference)
        #[arg(long)]
        b: PathBuf,
        /// Target bit error rate
        #[arg(long)]
        ber: f64,
        /// Horizontal axis for the crossing
        #[arg(long, default_value = "ebn0")]
        axis: AxisArg,
    },
    /// Run the built-in self checks and report pass/fail per check
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Siso,
    Alamouti,
    G3,
    G4,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModArg {
    Bpsk,
    Qpsk,
    #[value(name = "8psk")]
    Psk8,
    #[value(name = "16qam")]
    Qam16,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecisionArg {
    Hard,
    HardEnergy,
    Soft,
}

#[derive(Clone, Copy, ValueEnum)]
enum FecArg {
    None,
    Conv,
    ConvP23,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Ebn0,
    Snr,
}

impl From<SchemeArg> for DesignId {
    fn from(a: SchemeArg) -> Self {
        match a {
            SchemeArg::Siso => DesignId::Siso,
            SchemeArg::Alamouti => DesignId::Alamouti,
            SchemeArg::G3 => DesignId::G3,
            SchemeArg::G4 => DesignId::G4,
        }
    }
}

impl From<ModArg> for Modulation {
    fn from(a: ModArg) -> Self {
        match a {
            ModArg::Bpsk => Modulation::Bpsk,
            ModArg::Qpsk => Modulation::Qpsk,
            ModArg::Psk8 => Modulation::Psk8,
            ModArg::Qam16 => Modulation::Qam16,
        }
    }
}

impl From<DecisionArg> for DecisionMode {
    fn from(a: DecisionArg) -> Self {
        match a {
            DecisionArg::Hard => DecisionMode::Hard,
            DecisionArg::HardEnergy => DecisionMode::HardEnergy,
            DecisionArg::Soft => DecisionMode::Soft,
        }
    }
}

impl From<FecArg> for FecMode {
    fn from(a: FecArg) -> Self {
        match a {
            FecArg::None => FecMode::None,
            FecArg::Conv => FecMode::ConvR12,
            FecArg::ConvP23 => FecMode::ConvPunctR23,
        }
    }
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Ebn0 => Axis::Ebn0Db,
            AxisArg::Snr => Axis::SnrDb,
        }
    }
}

fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "--snr wants START:END:STEP, got '{s}'"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number '{p}' in --snr")))
        })
        .collect::<Result<_>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::Config(format!(
            "--snr step must be positive, got {step}"
        )));
    }
    if end < start {
        return Err(Error::Config(format!(
            "--snr end {end} below start {start}"
        )));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + step * i as f64).collect())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Simulate {
            scheme,
            nrx,
            modulation,
            decision,
            fec,
            snr,
            target_errors,
            max_bits,
            seed,
            interleaver_len,
            out,
        } => {
            let mut cfg = SimConfig::new(scheme.into(), nrx, modulation.into());
            cfg.decision = decision.into();
            cfg.fec = fec.into();
            cfg.snr_grid_db = parse_snr_grid(&snr)?;
            cfg.stop = StopRule {
                max_bits,
                target_errors,
            };
            cfg.seed = seed;
            cfg.interleaver_len = interleaver_len;
            let points = sweep(&cfg, Some(&out))?;
            for p in &points {
                eprintln!(
                    "snr {:+6.2} dB: ber {:.4e} ({} errors / {} bits, {:.1} s)",
                    p.snr_db, p.ber, p.errors, p.bits, p.wallclock_s
                );
            }
            println!("wrote {} points to {}", points.len(), out.display());
            Ok(true)
        }
        Cmd::Gap { a, b, ber, axis } => {
            let ca = read_csv(&a)?;
            let cb = read_csv(&b)?;
            let gap = gap_at_ber(&ca, &cb, ber, axis.into())?;
            println!("gap_db = {gap:+.4}");
            Ok(true)
        }
        Cmd::Verify => {
            let mut all_pass = true;
            for check in mimolink::verify::run_all() {
                let tag = if check.pass { "PASS" } else { "FAIL" };
                println!("{tag}  {} — {}", check.name, check.detail);
                all_pass &= check.pass;
            }
            Ok(all_pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e @ (Error::Config(_) | Error::Usage(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
