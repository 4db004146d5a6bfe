//! Outer code: the memory-6 rate-1/2 convolutional code with generators
//! 133/171 (octal), optional puncturing to rate 2/3, a seeded random
//! interleaver, and a soft-input Viterbi decoder.
//!
//! Soft inputs are per-bit log-likelihood ratios, positive for bit value 1.
//! A punctured position re-enters the decoder as LLR 0 (a perfect erasure),
//! so depuncturing and decoding compose without special cases. The decoder
//! maximizes the correlation metric `sum_q sign(c_q) * lambda_q` over code
//! words, which is the maximum-likelihood rule for any positive scaling of
//! the LLRs.

use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;

const MEMORY: usize = 6;
const STATES: usize = 1 << MEMORY;

/// The fixed rate-1/2, memory-6 code (generators 133 and 171 octal).
#[derive(Debug, Clone, Copy)]
pub struct ConvCode {
    g0: u32,
    g1: u32,
}

impl ConvCode {
    pub fn new() -> Self {
        Self {
            g0: 0o133,
            g1: 0o171,
        }
    }

    pub fn memory(&self) -> usize {
        MEMORY
    }

    pub fn generators(&self) -> [u32; 2] {
        [self.g0, self.g1]
    }

    /// Encodes `info` with six zero flush bits; output holds the two coded
    /// bits of each step in order, `2 * (info.len() + 6)` bits total.
    ///
    /// The shift register keeps the newest bit in its highest position, so a
    /// generator's binary expansion reads taps from current bit to oldest.
    pub fn encode(&self, info: &[u8]) -> Vec<u8> {
        debug_assert!(info.iter().all(|&b| b <= 1));
        let mut out = Vec::with_capacity(2 * (info.len() + MEMORY));
        let mut state = 0u32;
        for &u in info.iter().chain(std::iter::repeat_n(&0u8, MEMORY)) {
            let reg = ((u as u32) << MEMORY) | state;
            out.push(parity(reg & self.g0));
            out.push(parity(reg & self.g1));
            state = (state >> 1) | ((u as u32) << (MEMORY - 1));
        }
        out
    }

    /// Coded output pair for a transition out of `state` on input `u`.
    fn branch_bits(&self, state: u32, u: u32) -> (u8, u8) {
        let reg = (u << MEMORY) | state;
        (parity(reg & self.g0), parity(reg & self.g1))
    }
}

impl Default for ConvCode {
    fn default() -> Self {
        Self::new()
    }
}

fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

/// A code word in antipodal form: coded bit `b` maps to `2 b - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub c: Vec<i8>,
}

impl Codeword {
    pub fn from_bits(bits: &[u8]) -> Self {
        Self {
            c: bits.iter().map(|&b| if b == 1 { 1 } else { -1 }).collect(),
        }
    }
}

/// Correlation metric between a soft word and a code word: the sum of LLRs
/// signed by the corresponding code bits. Higher is more likely.
pub fn codeword_metric(lambdas: &[f64], cw: &Codeword) -> Result<f64> {
    if lambdas.len() != cw.c.len() {
        return Err(Error::Usage(format!(
            "metric needs equal lengths, got {} LLRs and {} code bits",
            lambdas.len(),
            cw.c.len()
        )));
    }
    Ok(lambdas.iter().zip(&cw.c).map(|(l, &s)| l * s as f64).sum())
}

/// Fixed puncturing pattern `[[1, 1], [1, 0]]`: of every four rate-1/2
/// output bits, the second branch of the second step is dropped, giving
/// rate 2/3.
#[derive(Debug, Clone)]
pub struct Puncturer {
    keep: [bool; 4],
}

impl Puncturer {
    pub fn rate23() -> Self {
        Self {
            keep: [true, true, true, false],
        }
    }

    /// Punctured over unpunctured bit counts.
    pub fn rate(&self) -> (usize, usize) {
        (self.keep.iter().filter(|&&k| k).count(), self.keep.len())
    }

    pub fn puncture(&self, coded: &[u8]) -> Result<Vec<u8>> {
        if !coded.len().is_multiple_of(self.keep.len()) {
            return Err(Error::Usage(format!(
                "punctured stream length {} is not a multiple of {}",
                coded.len(),
                self.keep.len()
            )));
        }
        Ok(coded
            .iter()
            .enumerate()
            .filter(|(i, _)| self.keep[i % self.keep.len()])
            .map(|(_, &b)| b)
            .collect())
    }

    /// Re-expands received LLRs to the unpunctured length, inserting 0
    /// (an erasure) at every dropped position.
    pub fn depuncture(&self, lambdas: &[f64]) -> Result<Vec<f64>> {
        let kept = self.rate().0;
        if !lambdas.len().is_multiple_of(kept) {
            return Err(Error::Usage(format!(
                "cannot depuncture length {}, not a multiple of {kept}",
                lambdas.len()
            )));
        }
        let mut out = Vec::with_capacity(lambdas.len() / kept * self.keep.len());
        let mut it = lambdas.iter();
        while out.len() < lambdas.len() / kept * self.keep.len() {
            for &k in &self.keep {
                out.push(if k { *it.next().unwrap() } else { 0.0 });
            }
        }
        Ok(out)
    }
}

/// Random block interleaver with a fixed permutation.
#[derive(Debug, Clone)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    /// Uniformly random permutation from the given generator.
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(rng);
        Self { perm }
    }

    pub fn identity(len: usize) -> Self {
        Self {
            perm: (0..len).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.perm.len() {
            return Err(Error::Usage(format!(
                "interleaver length {} does not match input {}",
                self.perm.len(),
                x.len()
            )));
        }
        let mut out = vec![x[0]; x.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = x[i];
        }
        Ok(out)
    }

    pub fn deinterleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.perm.len() {
            return Err(Error::Usage(format!(
                "interleaver length {} does not match input {}",
                self.perm.len(),
                x.len()
            )));
        }
        let mut out = vec![x[0]; x.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[i] = x[p];
        }
        Ok(out)
    }
}

/// Soft-input Viterbi decoder over the 64-state trellis, zero-tail
/// termination. `lambdas` holds two LLRs per trellis step; returns the
/// decoded information bits (flush bits stripped).
pub fn viterbi_decode_soft(code: &ConvCode, lambdas: &[f64]) -> Result<Vec<u8>> {
    if !lambdas.len().is_multiple_of(2) {
        return Err(Error::Usage(format!(
            "soft input length {} is odd",
            lambdas.len()
        )));
    }
    let steps = lambdas.len() / 2;
    if steps <= MEMORY {
        return Err(Error::Usage(format!(
            "{steps} trellis steps cannot carry any payload"
        )));
    }
    // Branch outputs per (predecessor, input), packed as c0 | c1 << 1.
    let mut branch = [[0u8; 2]; STATES];
    for (p, row) in branch.iter_mut().enumerate() {
        for (u, cell) in row.iter_mut().enumerate() {
            let (c0, c1) = code.branch_bits(p as u32, u as u32);
            *cell = c0 | (c1 << 1);
        }
    }
    let mut metric = [f64::NEG_INFINITY; STATES];
    metric[0] = 0.0;
    let mut next = [0.0f64; STATES];
    let mut decisions: Vec<u64> = Vec::with_capacity(steps);
    for t in 0..steps {
        let (l0, l1) = (lambdas[2 * t], lambdas[2 * t + 1]);
        // Branch metric of an expected pair, indexed by the packed bits.
        let bm = [-l0 - l1, l0 - l1, -l0 + l1, l0 + l1];
        let mut dec = 0u64;
        for (s2, slot) in next.iter_mut().enumerate() {
            let u = s2 >> (MEMORY - 1);
            let p0 = (s2 & (STATES / 2 - 1)) << 1;
            let p1 = p0 + 1;
            let m0 = metric[p0] + bm[branch[p0][u] as usize];
            let m1 = metric[p1] + bm[branch[p1][u] as usize];
            // Ties keep the lower-numbered predecessor.
            if m1 > m0 {
                *slot = m1;
                dec |= 1 << s2;
            } else {
                *slot = m0;
            }
        }
        decisions.push(dec);
        metric = next;
    }
    // Zero tail: trace back from the all-zero state.
    let mut state = 0usize;
    let mut bits = vec![0u8; steps];
    for t in (0..steps).rev() {
        bits[t] = (state >> (MEMORY - 1)) as u8;
        let chosen = (decisions[t] >> state) & 1;
        state = ((state & (STATES / 2 - 1)) << 1) | chosen as usize;
    }
    bits.truncate(steps - MEMORY);
    Ok(bits)
}

/// Hard-decision Viterbi, optionally with per-bit reliability weights. Bit
/// `b` with weight `w` enters the trellis as the LLR `(2 b - 1) * w`; with
/// no weights every bit counts the same and the decoder reduces to minimum
/// Hamming distance. A weight of 0 marks an erasure.
pub fn viterbi_decode_hard(
    code: &ConvCode,
    bits: &[u8],
    weights: Option<&[f64]>,
) -> Result<Vec<u8>> {
    if let Some(w) = weights {
        if w.len() != bits.len() {
            return Err(Error::Usage(format!(
                "{} weights for {} bits",
                w.len(),
                bits.len()
            )));
        }
    }
    let lambdas: Vec<f64> = bits
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let w = weights.map_or(1.0, |w| w[i]);
            (2.0 * b as f64 - 1.0) * w
        })
        .collect();
    viterbi_decode_soft(code, &lambdas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::substream;
    use rand_distr::StandardNormal;

    fn random_bits(n: usize, rng: &mut impl Rng) -> Vec<u8> {
        (0..n).map(|_| rng.gen_range(0..2u8)).collect()
    }

    #[test]
    fn generators_match_the_standard_code() {
        let code = ConvCode::new();
        assert_eq!(code.generators(), [0b101_1011, 0b111_1001]);
        assert_eq!(code.memory(), 6);
    }

    #[test]
    fn all_zero_input_encodes_to_zeros() {
        let code = ConvCode::new();
        let out = code.encode(&[0; 20]);
        assert_eq!(out.len(), 2 * 26);
        assert!(out.iter().all(|&b| b == 0));
    }

    #[test]
    fn impulse_response_reads_out_the_generators() {
        // A single 1 followed by the flush shifts the impulse across both
        // tap sets: the interleaved output is the two generators MSB-first.
        let code = ConvCode::new();
        let out = code.encode(&[1]);
        assert_eq!(out, vec![1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 1, 0, 1, 1]);
    }

    #[test]
    fn encoder_is_linear_over_gf2() {
        let code = ConvCode::new();
        let mut rng = substream(21, &[0]);
        for _ in 0..50 {
            let a = random_bits(40, &mut rng);
            let b = random_bits(40, &mut rng);
            let xor: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let ea = code.encode(&a);
            let eb = code.encode(&b);
            let want: Vec<u8> = ea.iter().zip(&eb).map(|(x, y)| x ^ y).collect();
            assert_eq!(code.encode(&xor), want);
        }
    }

    #[test]
    fn puncture_drops_every_fourth_bit() {
        let p = Puncturer::rate23();
        assert_eq!(p.rate(), (3, 4));
        let out = p.puncture(&[1, 0, 1, 1, 0, 0, 1, 0]).unwrap();
        assert_eq!(out, vec![1, 0, 1, 0, 0, 1]);
        assert!(matches!(p.puncture(&[1, 0, 1]), Err(Error::Usage(_))));
    }

    #[test]
    fn depuncture_inserts_erasures_at_dropped_positions() {
        let p = Puncturer::rate23();
        let out = p.depuncture(&[0.5, -1.0, 2.0, 0.25, 0.75, -0.5]).unwrap();
        assert_eq!(out, vec![0.5, -1.0, 2.0, 0.0, 0.25, 0.75, -0.5, 0.0]);
        assert!(matches!(p.depuncture(&[0.1, 0.2]), Err(Error::Usage(_))));
    }

    #[test]
    fn puncture_depuncture_keeps_surviving_positions() {
        let p = Puncturer::rate23();
        let mut rng = substream(22, &[0]);
        let coded = random_bits(48, &mut rng);
        let kept = p.puncture(&coded).unwrap();
        let soft: Vec<f64> = kept.iter().map(|&b| 2.0 * b as f64 - 1.0).collect();
        let expanded = p.depuncture(&soft).unwrap();
        assert_eq!(expanded.len(), coded.len());
        for (i, &l) in expanded.iter().enumerate() {
            if i % 4 == 3 {
                assert_eq!(l, 0.0);
            } else {
                assert_eq!(l, 2.0 * coded[i] as f64 - 1.0);
            }
        }
    }

    #[test]
    fn interleaver_roundtrip_and_determinism() {
        let il = Interleaver::random(257, &mut substream(23, &[0]));
        let il2 = Interleaver::random(257, &mut substream(23, &[0]));
        let data: Vec<u32> = (0..257).collect();
        let mixed = il.interleave(&data).unwrap();
        assert_ne!(mixed, data, "permutation should move things");
        assert_eq!(il.deinterleave(&mixed).unwrap(), data);
        assert_eq!(il2.interleave(&data).unwrap(), mixed);

        let id = Interleaver::identity(5);
        assert_eq!(
            id.interleave(&[9, 8, 7, 6, 5]).unwrap(),
            vec![9, 8, 7, 6, 5]
        );

        assert!(matches!(il.interleave(&data[..100]), Err(Error::Usage(_))));
        assert!(matches!(
            il.deinterleave(&data[..100]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn codeword_metric_examples() {
        let cw = Codeword::from_bits(&[1, 0, 1]);
        assert_eq!(cw.c, vec![1, -1, 1]);
        let m = codeword_metric(&[0.5, -1.2, 2.0], &cw).unwrap();
        assert!((m - 3.7).abs() < 1e-12);
        assert_eq!(codeword_metric(&[0.0, 0.0, 0.0], &cw).unwrap(), 0.0);
        // Complementing the code word negates the metric.
        let inv = Codeword::from_bits(&[0, 1, 0]);
        let mi = codeword_metric(&[0.5, -1.2, 2.0], &inv).unwrap();
        assert!((m + mi).abs() < 1e-12);
        assert!(matches!(codeword_metric(&[0.1], &cw), Err(Error::Usage(_))));
    }

    #[test]
    fn clean_llrs_decode_error_free() {
        let code = ConvCode::new();
        let mut rng = substream(24, &[0]);
        for _ in 0..20 {
            let info = random_bits(100, &mut rng);
            let coded = code.encode(&info);
            let lambdas: Vec<f64> = coded
                .iter()
                .map(|&b| (2.0 * b as f64 - 1.0) * 2.5)
                .collect();
            assert_eq!(viterbi_decode_soft(&code, &lambdas).unwrap(), info);
        }
    }

    #[test]
    fn decoder_matches_exhaustive_ml_search() {
        // Oracle: enumerate all 2^12 information words, score each full code
        // word with the correlation metric, take the argmax.
        let code = ConvCode::new();
        let k = 12usize;
        let table: Vec<(Vec<u8>, Codeword)> = (0..1u32 << k)
            .map(|v| {
                let info: Vec<u8> = (0..k).map(|i| ((v >> (k - 1 - i)) & 1) as u8).collect();
                let cw = Codeword::from_bits(&code.encode(&info));
                (info, cw)
            })
            .collect();
        let mut rng = substream(25, &[0]);
        for _ in 0..50 {
            let info = random_bits(k, &mut rng);
            let coded = code.encode(&info);
            let lambdas: Vec<f64> = coded
                .iter()
                .map(|&b| (2.0 * b as f64 - 1.0) + 1.2 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let decoded = viterbi_decode_soft(&code, &lambdas).unwrap();
            let (best_info, best_m) = table
                .iter()
                .map(|(i, cw)| (i, codeword_metric(&lambdas, cw).unwrap()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert_eq!(&decoded, best_info);
            // The survivor's own metric equals the maximum.
            let m =
                codeword_metric(&lambdas, &Codeword::from_bits(&code.encode(&decoded))).unwrap();
            assert!((m - best_m).abs() < 1e-9);
        }
    }

    #[test]
    fn decoding_is_invariant_to_positive_scaling() {
        let code = ConvCode::new();
        let mut rng = substream(26, &[0]);
        for _ in 0..20 {
            let lambdas: Vec<f64> = (0..2 * 36)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let scaled: Vec<f64> = lambdas.iter().map(|l| l * 37.5).collect();
            assert_eq!(
                viterbi_decode_soft(&code, &lambdas).unwrap(),
                viterbi_decode_soft(&code, &scaled).unwrap()
            );
        }
    }

    #[test]
    fn all_zero_llrs_decode_deterministically() {
        let code = ConvCode::new();
        let lambdas = vec![0.0; 2 * 30];
        let a = viterbi_decode_soft(&code, &lambdas).unwrap();
        let b = viterbi_decode_soft(&code, &lambdas).unwrap();
        assert_eq!(a, b);
        // With every branch equally likely the lower-predecessor tie rule
        // walks the all-zero path.
        assert!(a.iter().all(|&x| x == 0));
    }

    #[test]
    fn soft_input_validation() {
        let code = ConvCode::new();
        assert!(matches!(
            viterbi_decode_soft(&code, &[0.1; 15]),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            viterbi_decode_soft(&code, &[0.1; 12]),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            viterbi_decode_hard(&code, &[1; 20], Some(&[1.0; 19])),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn hard_decoder_recovers_clean_streams() {
        let code = ConvCode::new();
        let mut rng = substream(27, &[0]);
        let info = random_bits(64, &mut rng);
        let coded = code.encode(&info);
        assert_eq!(viterbi_decode_hard(&code, &coded, None).unwrap(), info);
    }

    #[test]
    fn unweighted_hard_decoding_is_minimum_hamming_distance() {
        // Brute-force Hamming oracle at K = 8 with random bit flips.
        let code = ConvCode::new();
        let k = 8usize;
        let table: Vec<(Vec<u8>, Vec<u8>)> = (0..1u32 << k)
            .map(|v| {
                let info: Vec<u8> = (0..k).map(|i| ((v >> (k - 1 - i)) & 1) as u8).collect();
                let cw = code.encode(&info);
                (info, cw)
            })
            .collect();
        let mut rng = substream(28, &[0]);
        for _ in 0..100 {
            let info = random_bits(k, &mut rng);
            let mut rx = code.encode(&info);
            for b in rx.iter_mut() {
                if rng.gen::<f64>() < 0.08 {
                    *b ^= 1;
                }
            }
            let decoded = viterbi_decode_hard(&code, &rx, None).unwrap();
            let dist = |cw: &[u8]| cw.iter().zip(&rx).filter(|(a, b)| a != b).count();
            let best = table.iter().map(|(_, cw)| dist(cw)).min().unwrap();
            let got = dist(&code.encode(&decoded));
            assert_eq!(got, best, "decoder found distance {got}, minimum is {best}");
        }
    }

    #[test]
    fn log_odds_metric_preserves_likelihood_ordering() {
        // With lambda_q = ln(p_q / (1 - p_q)), the correlation metric is an
        // affine function of the log-likelihood ln prod_q P(bit q | obs), so
        // both rank every code word identically. Checked by comparing the
        // argmax over all 2^8 code words under each score.
        let code = ConvCode::new();
        let k = 8usize;
        let table: Vec<Codeword> = (0..1u32 << k)
            .map(|v| {
                let info: Vec<u8> = (0..k).map(|i| ((v >> (k - 1 - i)) & 1) as u8).collect();
                Codeword::from_bits(&code.encode(&info))
            })
            .collect();
        let n = 2 * (k + MEMORY);
        let mut rng = substream(30, &[0]);
        for _ in 0..1000 {
            let probs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..0.99)).collect();
            let lambdas: Vec<f64> = probs.iter().map(|p| (p / (1.0 - p)).ln()).collect();
            let by_metric = table
                .iter()
                .enumerate()
                .max_by(|a, b| {
                    codeword_metric(&lambdas, a.1)
                        .unwrap()
                        .total_cmp(&codeword_metric(&lambdas, b.1).unwrap())
                })
                .unwrap()
                .0;
            let log_lik = |cw: &Codeword| -> f64 {
                cw.c.iter()
                    .zip(&probs)
                    .map(|(&c, &p)| if c > 0 { p.ln() } else { (1.0 - p).ln() })
                    .sum()
            };
            let by_likelihood = table
                .iter()
                .enumerate()
                .max_by(|a, b| log_lik(a.1).total_cmp(&log_lik(b.1)))
                .unwrap()
                .0;
            assert_eq!(by_metric, by_likelihood);
        }
    }

    #[test]
    fn uniform_weights_match_unweighted_decoding() {
        let code = ConvCode::new();
        let mut rng = substream(29, &[0]);
        let info = random_bits(40, &mut rng);
        let mut rx = code.encode(&info);
        for b in rx.iter_mut() {
            if rng.gen::<f64>() < 0.1 {
                *b ^= 1;
            }
        }
        let plain = viterbi_decode_hard(&code, &rx, None).unwrap();
        let weighted = viterbi_decode_hard(&code, &rx, Some(&vec![0.7; rx.len()])).unwrap();
        assert_eq!(plain, weighted);
    }

    #[test]
    fn punctured_roundtrip_decodes_clean_frames() {
        let code = ConvCode::new();
        let p = Puncturer::rate23();
        let mut rng = substream(30, &[0]);
        let info = random_bits(94, &mut rng); // 2 * (94 + 6) = 200 coded bits
        let coded = code.encode(&info);
        let kept = p.puncture(&coded).unwrap();
        let soft: Vec<f64> = kept.iter().map(|&b| (2.0 * b as f64 - 1.0) * 3.0).collect();
        let expanded = p.depuncture(&soft).unwrap();
        assert_eq!(viterbi_decode_soft(&code, &expanded).unwrap(), info);
    }
}
