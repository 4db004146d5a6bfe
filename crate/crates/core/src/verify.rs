//! Built-in self checks behind the `verify` subcommand: orthogonality and
//! noiseless recovery, the combined-SNR limit, LLR approximation quality,
//! exhaustive maximum-likelihood decoding, and the analytic bounds. Each
//! check returns a pass/fail verdict with a one-line measurement summary.

use crate::channel::substream;
use crate::constellation::{make_constellation, Modulation};
use crate::fec::{codeword_metric, viterbi_decode_soft, Codeword, ConvCode};
use crate::mat::CxMat;
use crate::stbc::{
    channel_energy, combined_snr, design, energy_loss_bound_db, max_rate_bound, DesignId, Rate,
};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

const ALL_DESIGNS: [DesignId; 4] = [
    DesignId::Siso,
    DesignId::Alamouti,
    DesignId::G3,
    DesignId::G4,
];

fn rand_c(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn rand_mat(rows: usize, cols: usize, rng: &mut impl Rng) -> CxMat {
    let mut m = CxMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, rand_c(rng));
        }
    }
    m
}

/// Gram-matrix defect <= 1e-12 and exact noiseless recovery (<= 1e-9) over
/// random symbols and channels for every transmit-diversity design.
pub fn check_orthogonality_and_recovery(cases_per_design: usize) -> CheckResult {
    let mut rng = substream(0xA11CE5, &[1]);
    let mut worst_defect = 0.0f64;
    let mut worst_err = 0.0f64;
    for id in [DesignId::Alamouti, DesignId::G3, DesignId::G4] {
        let d = design(id);
        for case in 0..cases_per_design {
            let syms: Vec<Complex64> = (0..d.n_syms).map(|_| rand_c(&mut rng)).collect();
            worst_defect = worst_defect.max(d.orthogonality_defect(&syms).unwrap());
            let n_rx = 1 + case % 2;
            let h = rand_mat(d.n_tx, n_rx, &mut rng);
            let r = d.encode(&syms).unwrap().mul(&h);
            let out = d.combine(&r, &h, 0.0).unwrap();
            for (got, want) in out.estimates.iter().zip(&syms) {
                worst_err = worst_err.max((got - want).norm());
            }
        }
    }
    CheckResult {
        name: "orthogonality and noiseless recovery",
        pass: worst_defect <= 1e-12 && worst_err <= 1e-9,
        detail: format!(
            "{cases_per_design} cases/design: max defect {worst_defect:.2e}, \
             max recovery error {worst_err:.2e}"
        ),
    }
}

/// Empirical post-combining SNR of every symbol estimate within 2% of
/// channel_energy / sigma2, for each design and 1-2 receive antennas.
pub fn check_mrc_limit(draws: usize) -> CheckResult {
    let mut rng = substream(0xA11CE5, &[2]);
    let sigma2 = 0.5;
    let mut worst_rel = 0.0f64;
    let mut detail_worst = String::new();
    for id in ALL_DESIGNS {
        let d = design(id);
        for n_rx in 1..=2usize {
            let h = rand_mat(d.n_tx, n_rx, &mut rng);
            let want = combined_snr(&h, sigma2).unwrap();
            let syms: Vec<Complex64> = (0..d.n_syms)
                .map(|_| {
                    let phase = std::f64::consts::FRAC_PI_4
                        + std::f64::consts::FRAC_PI_2 * rng.gen_range(0..4) as f64;
                    Complex64::new(phase.cos(), phase.sin())
                })
                .collect();
            let clean = d.encode(&syms).unwrap().mul(&h);
            let sd = sigma2.sqrt();
            let mut mse = vec![0.0f64; d.n_syms];
            for _ in 0..draws {
                let mut r = clean.clone();
                for v in r.entries_mut() {
                    *v += Complex64::new(
                        sd * rng.sample::<f64, _>(StandardNormal),
                        sd * rng.sample::<f64, _>(StandardNormal),
                    );
                }
                let out = d.combine(&r, &h, sigma2).unwrap();
                for (k, (got, want)) in out.estimates.iter().zip(&syms).enumerate() {
                    mse[k] += (got - want).norm_sqr();
                }
            }
            for (k, m) in mse.iter().enumerate() {
                // Complex error energy is twice the per-dimension variance.
                let emp = 2.0 / (m / draws as f64);
                let rel = (emp / want - 1.0).abs();
                if rel > worst_rel {
                    worst_rel = rel;
                    detail_worst = format!("{id} n_rx={n_rx} symbol {}", k + 1);
                }
            }
        }
    }
    CheckResult {
        name: "combined-SNR limit",
        pass: worst_rel < 0.02,
        detail: format!(
            "{draws} draws/config: worst deviation {:.2}% ({detail_worst})",
            100.0 * worst_rel
        ),
    }
}

/// Approximate LLRs agree with the exact ones in sign everywhere, and in
/// value (5% relative) near decision boundaries, at operating noise levels
/// (per-dimension sigma2 log-uniform over [0.005, 0.04]).
pub fn check_llr_approximations(qam16_samples: usize) -> CheckResult {
    let mut rng = substream(0xA11CE5, &[3]);
    let mut sign_misses = 0u64;
    let mut small_viol = 0u64;
    let mut max_rel = 0.0f64;
    for kind in [
        Modulation::Qam16,
        Modulation::Bpsk,
        Modulation::Qpsk,
        Modulation::Psk8,
    ] {
        let con = make_constellation(kind);
        let samples = if kind == Modulation::Qam16 {
            qam16_samples
        } else {
            qam16_samples / 4
        };
        for _ in 0..samples {
            let s2 = 0.005 * (0.04f64 / 0.005).powf(rng.gen::<f64>());
            let sd = s2.sqrt();
            let p = con.points[rng.gen_range(0..con.points.len())];
            let r = p + Complex64::new(
                sd * rng.sample::<f64, _>(StandardNormal),
                sd * rng.sample::<f64, _>(StandardNormal),
            );
            let ex = con.llr_exact(r, s2).unwrap();
            let ap = con.llr_approx(r, s2).unwrap();
            for q in 0..con.k {
                if ex[q].abs() > 1e-9 && ex[q].signum() != ap[q].signum() {
                    sign_misses += 1;
                }
                if kind == Modulation::Qam16 && ex[q].abs() < 1.0 {
                    let rel = (ap[q] - ex[q]).abs() / ex[q].abs().max(0.1);
                    max_rel = max_rel.max(rel);
                    if rel >= 0.05 {
                        small_viol += 1;
                    }
                }
            }
        }
    }
    CheckResult {
        name: "LLR approximation vs exact",
        pass: sign_misses == 0 && small_viol == 0,
        detail: format!(
            "{qam16_samples} 16-QAM samples: {sign_misses} sign mismatches, \
             max small-LLR relative error {:.2}%",
            100.0 * max_rel
        ),
    }
}

/// Soft Viterbi output equals the exhaustive metric argmax over all 2^12
/// code words, on noisy LLR streams.
pub fn check_ml_decoding(instances: usize) -> CheckResult {
    let code = ConvCode::new();
    let k = 12usize;
    let table: Vec<(Vec<u8>, Codeword)> = (0..1u32 << k)
        .map(|v| {
            let info: Vec<u8> = (0..k).map(|i| ((v >> (k - 1 - i)) & 1) as u8).collect();
            let cw = Codeword::from_bits(&code.encode(&info));
            (info, cw)
        })
        .collect();
    let mut rng = substream(0xA11CE5, &[4]);
    let mut mismatches = 0u64;
    for _ in 0..instances {
        let info: Vec<u8> = (0..k).map(|_| rng.gen_range(0..2u8)).collect();
        let lambdas: Vec<f64> = code
            .encode(&info)
            .iter()
            .map(|&b| (2.0 * b as f64 - 1.0) + 1.2 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let decoded = viterbi_decode_soft(&code, &lambdas).unwrap();
        let best = table
            .iter()
            .max_by(|a, b| {
                codeword_metric(&lambdas, &a.1)
                    .unwrap()
                    .total_cmp(&codeword_metric(&lambdas, &b.1).unwrap())
            })
            .unwrap();
        if decoded != best.0 {
            mismatches += 1;
        }
    }
    CheckResult {
        name: "ML decoding vs exhaustive search",
        pass: mismatches == 0,
        detail: format!("{instances} random 12-bit frames: {mismatches} mismatches"),
    }
}

/// The closed-form rate and energy bounds at their published values, and
/// the implemented designs meeting the rate bound with equality.
pub fn check_analytic_bounds() -> CheckResult {
    let rates_ok = max_rate_bound(2).unwrap() == Rate::new(1, 1)
        && max_rate_bound(3).unwrap() == Rate::new(3, 4)
        && max_rate_bound(4).unwrap() == Rate::new(3, 4)
        && max_rate_bound(5).unwrap() == Rate::new(2, 3);
    let losses_ok = energy_loss_bound_db(1).unwrap() == 0.0
        && (energy_loss_bound_db(2).unwrap() + 3.01).abs() < 0.005
        && (energy_loss_bound_db(4).unwrap() + 6.02).abs() < 0.005;
    let designs_ok = ALL_DESIGNS
        .iter()
        .all(|&id| design(id).rate() == max_rate_bound(design(id).n_tx).unwrap());
    let energy_ok = {
        // Sanity anchor for the energy accounting: 3x2 all-ones channel.
        let mut ones = CxMat::zeros(3, 2);
        for e in ones.entries_mut() {
            *e = Complex64::new(1.0, 0.0);
        }
        (channel_energy(&ones) - 6.0).abs() < 1e-12
    };
    CheckResult {
        name: "analytic rate/energy bounds",
        pass: rates_ok && losses_ok && designs_ok && energy_ok,
        detail: format!(
            "rate bounds {}, energy bounds {}, design rates {}",
            if rates_ok { "ok" } else { "WRONG" },
            if losses_ok { "ok" } else { "WRONG" },
            if designs_ok { "ok" } else { "WRONG" }
        ),
    }
}

/// Full suite at acceptance sizes.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check_orthogonality_and_recovery(10_000),
        check_mrc_limit(100_000),
        check_llr_approximations(100_000),
        check_ml_decoding(1_000),
        check_analytic_bounds(),
    ]
}
