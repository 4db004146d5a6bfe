//! CSV emission/ingestion for BER curves and horizontal gap measurement.

use super::{BerPoint, SimConfig};
use crate::{Error, Result};
use std::path::Path;

pub const CSV_HEADER: &str =
    "snr_db,ebn0_db,bits,errors,ber,scheme,nrx,mod,decision,fec,seed,wallclock_s";

/// Ten significant digits so reruns diff cleanly.
fn fmt(x: f64) -> String {
    format!("{x:.9e}")
}

pub(super) fn format_row(cfg: &SimConfig, p: &BerPoint) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{:.3}",
        fmt(p.snr_db),
        fmt(p.ebn0_db),
        p.bits,
        p.errors,
        fmt(p.ber),
        cfg.scheme,
        cfg.n_rx,
        cfg.modulation,
        cfg.decision,
        cfg.fec,
        cfg.seed,
        p.wallclock_s
    )
}

/// Reads the numeric columns of a sweep CSV back into curve points.
pub fn read_csv(path: &Path) -> Result<Vec<BerPoint>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Usage(format!(
                "{} does not start with the sweep CSV header",
                path.display()
            )))
        }
    }
    let mut points = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 12 {
            return Err(Error::Usage(format!(
                "{} line {}: expected 12 columns, found {}",
                path.display(),
                n + 2,
                cols.len()
            )));
        }
        let field = |i: usize, what: &str| -> Result<f64> {
            cols[i].trim().parse::<f64>().map_err(|_| {
                Error::Usage(format!(
                    "{} line {}: bad {what} `{}`",
                    path.display(),
                    n + 2,
                    cols[i]
                ))
            })
        };
        points.push(BerPoint {
            snr_db: field(0, "snr_db")?,
            ebn0_db: field(1, "ebn0_db")?,
            bits: field(2, "bits")? as u64,
            errors: field(3, "errors")? as u64,
            ber: field(4, "ber")?,
            wallclock_s: field(11, "wallclock_s")?,
        });
    }
    Ok(points)
}

/// Abscissa used for curve interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Grid SNR per receive antenna.
    SnrDb,
    /// Information-bit energy over noise density (normalizes away spectral
    /// efficiency, so curves of different rate/modulation are comparable).
    Ebn0Db,
}

impl Axis {
    fn value(&self, p: &BerPoint) -> f64 {
        match self {
            Axis::SnrDb => p.snr_db,
            Axis::Ebn0Db => p.ebn0_db,
        }
    }
}

/// Abscissa at which a curve crosses `target_ber`, by linear interpolation
/// of log10(BER) against dB over the first bracketing segment.
pub fn crossing_db(points: &[BerPoint], target_ber: f64, axis: Axis) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 1.0) {
        return Err(Error::Domain(format!(
            "target ber must be in (0, 1), got {target_ber}"
        )));
    }
    let mut pts: Vec<&BerPoint> = points.iter().collect();
    pts.sort_by(|a, b| axis.value(a).total_cmp(&axis.value(b)));
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.ber == target_ber {
            return Ok(axis.value(a));
        }
        if a.ber >= target_ber && target_ber >= b.ber && b.ber > 0.0 {
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target_ber.log10());
            let t = if (lb - la).abs() < 1e-300 {
                0.0
            } else {
                (lt - la) / (lb - la)
            };
            return Ok(axis.value(a) + t * (axis.value(b) - axis.value(a)));
        }
    }
    if let Some(last) = pts.last() {
        if last.ber == target_ber {
            return Ok(axis.value(last));
        }
    }
    Err(Error::Range(format!(
        "target ber {target_ber:.3e} is not bracketed by measured points \
         (add grid points or increase max_bits)"
    )))
}

/// Horizontal dB distance between two curves at a target BER: positive when
/// curve `b` needs more dB than curve `a`.
pub fn gap_at_ber(a: &[BerPoint], b: &[BerPoint], target_ber: f64, axis: Axis) -> Result<f64> {
    Ok(crossing_db(b, target_ber, axis)? - crossing_db(a, target_ber, axis)?)
}
