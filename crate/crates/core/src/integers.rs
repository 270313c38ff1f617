//! C-bit integer extraction from bit streams, K-bin histograms over the
//! rescaled range [0, 1], and the exact closed-form bin population of a
//! single-probability Bernoulli process.
//!
//! The theoretical population is evaluated without enumerating the 2^C
//! integer space: a digit DP counts, for every bin boundary, how many
//! integers below it carry each possible popcount, and the per-weight
//! Bernoulli probabilities are applied to those counts in log space.

use serde::Serialize;

use crate::bitstream::BitStream;
use crate::error::{Error, Result};
use crate::num::{real, real_of_u64, Real};

/// Ordered sequence of non-negative integers below `2^word_bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerSequence {
    values: Vec<u64>,
    word_bits: u32,
}

impl IntegerSequence {
    pub fn new(values: Vec<u64>, word_bits: u32) -> Result<Self> {
        check_word_bits(word_bits)?;
        let max = max_value(word_bits);
        if let Some(v) = values.iter().find(|&&v| v > max) {
            return Err(Error::Domain(format!(
                "value {v} exceeds the {word_bits}-bit maximum {max}"
            )));
        }
        Ok(Self { values, word_bits })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Largest representable C-bit integer, `ξ = 2^C − 1`.
pub fn max_value(word_bits: u32) -> u64 {
    if word_bits >= 64 {
        u64::MAX
    } else {
        (1u64 << word_bits) - 1
    }
}

fn check_word_bits(word_bits: u32) -> Result<()> {
    if !(1..=64).contains(&word_bits) {
        return Err(Error::Domain(format!(
            "word size must be between 1 and 64 bits, got {word_bits}"
        )));
    }
    Ok(())
}

/// Group a stream into C-bit words, first bit least significant. Trailing
/// bits that do not fill a word are discarded.
pub fn bits_to_integers(stream: &BitStream, word_bits: u32) -> Result<IntegerSequence> {
    check_word_bits(word_bits)?;
    let count = stream.len() / word_bits as usize;
    let mut values = Vec::with_capacity(count);
    let mut acc = 0u64;
    let mut filled = 0u32;
    stream.for_each_bit(|b| {
        if values.len() == count {
            return;
        }
        if b {
            acc |= 1u64 << filled;
        }
        filled += 1;
        if filled == word_bits {
            values.push(acc);
            acc = 0;
            filled = 0;
        }
    });
    Ok(IntegerSequence { values, word_bits })
}

/// 1-based bin index of `value` among `num_bins` equal divisions of
/// [0, 1] after rescaling by ξ. Lower-inclusive, upper-exclusive, with
/// the last bin also closed above.
///
/// The comparison `(k−1)/K ≤ value/ξ < k/K` is evaluated in exact integer
/// arithmetic (`(k−1)·ξ ≤ value·K < k·ξ`), so boundary values can never
/// be misassigned by rounding.
pub fn bin_assign(value: u64, num_bins: usize, word_bits: u32) -> Result<usize> {
    check_word_bits(word_bits)?;
    if num_bins == 0 {
        return Err(Error::Domain("need at least one bin".into()));
    }
    let xi = max_value(word_bits);
    if value > xi {
        return Err(Error::Domain(format!(
            "value {value} exceeds the {word_bits}-bit maximum {xi}"
        )));
    }
    let k0 = (value as u128 * num_bins as u128) / xi as u128;
    Ok((k0 as usize).min(num_bins - 1) + 1)
}

/// Whether a bin population is an observed count or a model prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HistogramKind {
    Measured,
    Theoretical,
}

/// K-bin population of rescaled C-bit integers. Counts are exact integers
/// for measured data and possibly fractional for the theoretical model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegerHistogram<F: Real> {
    counts: Vec<F>,
    total: F,
    kind: HistogramKind,
}

impl<F: Real> IntegerHistogram<F> {
    pub fn counts(&self) -> &[F] {
        &self.counts
    }

    pub fn num_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> F {
        self.total
    }

    pub fn kind(&self) -> HistogramKind {
        self.kind
    }

    /// Counts divided by the total, a probability vector over bins.
    pub fn normalized(&self) -> Vec<F> {
        self.counts.iter().map(|&c| c / self.total).collect()
    }

    /// Merge two shards by elementwise addition.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.num_bins() != other.num_bins() || self.kind != other.kind {
            return Err(Error::Shape(
                "histogram shards must share bins and kind".into(),
            ));
        }
        Ok(Self {
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(&a, &b)| a + b)
                .collect(),
            total: self.total + other.total,
            kind: self.kind,
        })
    }
}

/// Count the sequence into `num_bins` bins.
pub fn histogram<F: Real>(seq: &IntegerSequence, num_bins: usize) -> Result<IntegerHistogram<F>> {
    let mut acc = IntegerAccumulator::new(seq.word_bits(), num_bins)?;
    for &v in seq.values() {
        acc.push_value(v);
    }
    Ok(acc.finish())
}

/// Streaming word assembler and binner: feed bits (or packed bytes) and
/// get the measured histogram without materializing the integer sequence.
#[derive(Debug, Clone)]
pub struct IntegerAccumulator {
    word_bits: u32,
    num_bins: usize,
    xi: u64,
    acc: u64,
    filled: u32,
    counts: Vec<u64>,
    total: u64,
}

impl IntegerAccumulator {
    pub fn new(word_bits: u32, num_bins: usize) -> Result<Self> {
        check_word_bits(word_bits)?;
        if num_bins == 0 {
            return Err(Error::Domain("need at least one bin".into()));
        }
        Ok(Self {
            word_bits,
            num_bins,
            xi: max_value(word_bits),
            acc: 0,
            filled: 0,
            counts: vec![0; num_bins],
            total: 0,
        })
    }

    #[inline]
    pub fn push_bit(&mut self, bit: bool) {
        if bit {
            self.acc |= 1u64 << self.filled;
        }
        self.filled += 1;
        if self.filled == self.word_bits {
            let v = self.acc;
            self.acc = 0;
            self.filled = 0;
            self.push_value(v);
        }
    }

    #[inline]
    pub fn push_value(&mut self, value: u64) {
        debug_assert!(value <= self.xi);
        let k0 = (value as u128 * self.num_bins as u128) / self.xi as u128;
        self.counts[(k0 as usize).min(self.num_bins - 1)] += 1;
        self.total += 1;
    }

    /// Feed `nbits` from LSB-first packed bytes.
    pub fn push_packed(&mut self, bytes: &[u8], nbits: usize) {
        for i in 0..nbits {
            self.push_bit((bytes[i >> 3] >> (i & 7)) & 1 == 1);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn raw_counts(&self) -> &[u64] {
        &self.counts
    }

    /// Measured histogram; a partially assembled trailing word is
    /// discarded.
    pub fn finish<F: Real>(&self) -> IntegerHistogram<F> {
        IntegerHistogram {
            counts: self.counts.iter().map(|&c| real_of_u64(c)).collect(),
            total: real_of_u64(self.total),
            kind: HistogramKind::Measured,
        }
    }
}

/// Pascal-triangle table of binomial coefficients up to `n = 64`.
/// All entries fit in `u64` (the largest is C(64, 32) ≈ 1.8e18).
struct BinomialTable {
    rows: Vec<Vec<u64>>,
}

impl BinomialTable {
    fn new(max_n: u32) -> Self {
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(max_n as usize + 1);
        for n in 0..=max_n as usize {
            let mut row = vec![1u64; n + 1];
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
            rows.push(row);
        }
        Self { rows }
    }

    #[inline]
    fn get(&self, n: u32, k: u32) -> u64 {
        if k > n {
            0
        } else {
            self.rows[n as usize][k as usize]
        }
    }
}

/// For each weight `w`, the number of integers in `[0, x)` whose binary
/// representation has exactly `w` one bits. One DP walk over the bits of
/// `x` fills all weights at once.
fn counts_below_per_weight(x: u128, word_bits: u32, binom: &BinomialTable) -> Vec<u64> {
    let c = word_bits;
    if x >= 1u128 << c {
        return (0..=c).map(|w| binom.get(c, w)).collect();
    }
    let mut counts = vec![0u64; c as usize + 1];
    let mut ones_in_prefix = 0u32;
    for j in (0..c).rev() {
        if (x >> j) & 1 == 1 {
            // Fix this bit to 0: the j lower bits are free, the prefix
            // contributes `ones_in_prefix` ones.
            for w in ones_in_prefix..=(ones_in_prefix + j).min(c) {
                counts[w as usize] += binom.get(j, w - ones_in_prefix);
            }
            ones_in_prefix += 1;
        }
    }
    counts
}

/// Number of integers in `[0, x)` with exactly `weight` one bits, for
/// `0 ≤ x ≤ 2^word_bits`. Exact, O(word_bits) per query after the
/// binomial table is built.
pub fn popcount_count_below(x: u128, weight: u32, word_bits: u32) -> Result<u64> {
    check_word_bits(word_bits)?;
    if x > 1u128 << word_bits {
        return Err(Error::Domain(format!("bound {x} exceeds 2^{word_bits}")));
    }
    if weight > word_bits {
        return Ok(0);
    }
    let binom = BinomialTable::new(word_bits);
    Ok(counts_below_per_weight(x, word_bits, &binom)[weight as usize])
}

/// Exclusive upper boundaries of the bins in integer space: `b_0 = 0`,
/// `b_k = ⌈k·ξ/K⌉` for interior k, `b_K = 2^C`. Bin k (1-based) covers
/// integers `[b_{k−1}, b_k)`.
fn bin_boundaries(num_bins: usize, word_bits: u32) -> Vec<u128> {
    let xi = max_value(word_bits) as u128;
    let kk = num_bins as u128;
    let mut bounds = Vec::with_capacity(num_bins + 1);
    bounds.push(0u128);
    for k in 1..num_bins as u128 {
        bounds.push((k * xi).div_ceil(kk));
    }
    bounds.push(1u128 << word_bits);
    bounds
}

/// Predicted (possibly fractional) bin populations when every bit is an
/// independent Bernoulli draw with success probability `p` of producing
/// a one. Runs in O(K·C²) — never O(2^C).
pub fn theoretical_histogram<F: Real>(
    p: F,
    word_bits: u32,
    num_bins: usize,
    total: u64,
) -> Result<IntegerHistogram<F>> {
    check_word_bits(word_bits)?;
    if num_bins == 0 {
        return Err(Error::Domain("need at least one bin".into()));
    }
    if !(F::zero()..=F::one()).contains(&p) || p.is_nan() {
        return Err(Error::Domain(
            "success probability must lie in [0, 1]".into(),
        ));
    }
    let c = word_bits;
    let binom = BinomialTable::new(c);
    let bounds = bin_boundaries(num_bins, c);
    let l: F = real_of_u64(total);

    let ln_p = p.ln();
    let ln_q = (F::one() - p).ln();
    let mut prev = counts_below_per_weight(bounds[0], c, &binom);
    let mut counts = Vec::with_capacity(num_bins);
    for &upper in &bounds[1..] {
        let cur = counts_below_per_weight(upper, c, &binom);
        let mut mass = F::zero();
        for w in 0..=c as usize {
            let n_kw = cur[w] - prev[w];
            if n_kw == 0 {
                continue;
            }
            // degenerate p: only the all-zero or all-one weight class survives
            if p == F::zero() {
                if w == 0 {
                    mass += real_of_u64(n_kw);
                }
                continue;
            }
            if p == F::one() {
                if w == c as usize {
                    mass += real_of_u64(n_kw);
                }
                continue;
            }
            let ln_term = real_of_u64::<F>(n_kw).ln()
                + real::<F>(w as f64) * ln_p
                + real::<F>((c as usize - w) as f64) * ln_q;
            mass += ln_term.exp();
        }
        counts.push(l * mass);
        prev = cur;
    }
    Ok(IntegerHistogram {
        counts,
        total: l,
        kind: HistogramKind::Theoretical,
    })
}

/// Write a histogram as CSV: `k,count[,theory_count],normalized`.
pub fn write_histogram_csv<F: Real, W: std::io::Write>(
    out: &mut W,
    hist: &IntegerHistogram<F>,
    theory: Option<&IntegerHistogram<F>>,
) -> Result<()> {
    if let Some(t) = theory {
        if t.num_bins() != hist.num_bins() {
            return Err(Error::Shape("theory overlay must match bin count".into()));
        }
        writeln!(out, "k,count,theory_count,normalized")?;
    } else {
        writeln!(out, "k,count,normalized")?;
    }
    let norm = hist.normalized();
    for (k, &normalized) in norm.iter().enumerate() {
        match theory {
            Some(t) => writeln!(
                out,
                "{},{},{},{}",
                k + 1,
                fmt_real(hist.counts[k]),
                fmt_real(t.counts[k]),
                fmt_real(normalized)
            )?,
            None => writeln!(
                out,
                "{},{},{}",
                k + 1,
                fmt_real(hist.counts[k]),
                fmt_real(normalized)
            )?,
        }
    }
    Ok(())
}

/// 17-significant-digit rendering used by all CSV emitters.
pub fn fmt_real<F: Real>(x: F) -> String {
    format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::BitStream;
    use proptest::prelude::*;

    fn stream_of(bits: &[bool]) -> BitStream {
        BitStream::from_bits(bits, None).unwrap()
    }

    #[test]
    fn words_are_lsb_first() {
        let mut bits = vec![false; 32];
        assert_eq!(
            bits_to_integers(&stream_of(&bits), 32).unwrap().values(),
            &[0]
        );
        bits = vec![true; 32];
        assert_eq!(
            bits_to_integers(&stream_of(&bits), 32).unwrap().values(),
            &[4294967295]
        );
        bits = vec![false; 32];
        bits[0] = true;
        assert_eq!(
            bits_to_integers(&stream_of(&bits), 32).unwrap().values(),
            &[1]
        );
        bits = vec![false; 32];
        bits[1] = true;
        assert_eq!(
            bits_to_integers(&stream_of(&bits), 32).unwrap().values(),
            &[2]
        );
    }

    #[test]
    fn trailing_remainder_is_discarded() {
        let bits = vec![true; 70];
        let seq = bits_to_integers(&stream_of(&bits), 32).unwrap();
        assert_eq!(seq.len(), 2);
    }

    #[test]
    fn word_bits_domain_checked() {
        let bits = vec![true; 8];
        assert!(bits_to_integers(&stream_of(&bits), 0).is_err());
        assert!(bits_to_integers(&stream_of(&bits), 65).is_err());
        // 8 bits do not fill a 64-bit word
        assert!(bits_to_integers(&stream_of(&bits), 64).unwrap().is_empty());
        let wide = vec![true; 64];
        let seq = bits_to_integers(&stream_of(&wide), 64).unwrap();
        assert_eq!(seq.values(), &[u64::MAX]);
    }

    #[test]
    fn bin_assign_edges() {
        assert_eq!(bin_assign(0, 250, 32).unwrap(), 1);
        assert_eq!(bin_assign(u32::MAX as u64, 250, 32).unwrap(), 250);
        // C=8, K=4: 63/255 < 0.25 -> bin 1; 64/255 > 0.25 -> bin 2
        assert_eq!(bin_assign(63, 4, 8).unwrap(), 1);
        assert_eq!(bin_assign(64, 4, 8).unwrap(), 2);
        assert!(bin_assign(256, 4, 8).is_err());
        assert_eq!(bin_assign(u64::MAX, 2, 64).unwrap(), 2);
    }

    #[test]
    fn bin_assign_matches_rational_definition_exhaustively_c8() {
        // Brute-force the indicator of the binning definition at C=8.
        for num_bins in [1usize, 3, 4, 7, 250] {
            let xi = 255u128;
            for v in 0..=255u64 {
                let got = bin_assign(v, num_bins, 8).unwrap();
                let mut want = 0;
                for k in 1..=num_bins {
                    let lower_ok = (k as u128 - 1) * xi <= v as u128 * num_bins as u128;
                    let upper_ok = if k == num_bins {
                        true
                    } else {
                        (v as u128 * num_bins as u128) < k as u128 * xi
                    };
                    if lower_ok && upper_ok {
                        want = k;
                        break;
                    }
                }
                assert_eq!(got, want, "value {v}, K={num_bins}");
            }
        }
    }

    #[test]
    fn histogram_counts_and_conserves() {
        let seq = IntegerSequence::new(vec![], 32).unwrap();
        let h: IntegerHistogram<f64> = histogram(&seq, 16).unwrap();
        assert!(h.counts().iter().all(|&c| c == 0.0));

        let seq = IntegerSequence::new(vec![0, u32::MAX as u64], 32).unwrap();
        let h: IntegerHistogram<f64> = histogram(&seq, 250).unwrap();
        assert_eq!(h.counts()[0], 1.0);
        assert_eq!(h.counts()[249], 1.0);
        assert_eq!(h.counts().iter().sum::<f64>(), h.total());
    }

    #[test]
    fn popcount_count_below_small_cases() {
        assert_eq!(popcount_count_below(1 << 8, 4, 8).unwrap(), 70);
        assert_eq!(popcount_count_below(8, 1, 8).unwrap(), 3); // 1, 2, 4
        assert_eq!(popcount_count_below(0, 0, 8).unwrap(), 0);
        assert_eq!(popcount_count_below(1, 0, 8).unwrap(), 1); // just 0
        assert_eq!(popcount_count_below(1 << 64, 0, 64).unwrap(), 1);
        assert_eq!(
            popcount_count_below(1 << 64, 32, 64).unwrap(),
            1_832_624_140_942_590_534
        );
    }

    #[test]
    fn popcount_count_below_matches_exhaustive_prefix_oracle_c8() {
        // Independent oracle: running prefix counts per weight.
        let c = 8u32;
        let mut running = vec![0u64; c as usize + 1];
        for x in 0..=(1u128 << c) {
            for w in 0..=c {
                assert_eq!(
                    popcount_count_below(x, w, c).unwrap(),
                    running[w as usize],
                    "x={x}, w={w}"
                );
            }
            if x < (1u128 << c) {
                running[(x as u64).count_ones() as usize] += 1;
            }
        }
    }

    /// Brute-force bin populations by enumerating every C-bit integer.
    fn brute_theoretical(p: f64, word_bits: u32, num_bins: usize, total: u64) -> Vec<f64> {
        let xi = max_value(word_bits);
        let mut out = vec![0.0; num_bins];
        for v in 0..=(xi as u128) {
            let w = (v as u64).count_ones();
            let prob = p.powi(w as i32) * (1.0 - p).powi((word_bits - w) as i32);
            let k = bin_assign(v as u64, num_bins, word_bits).unwrap();
            out[k - 1] += total as f64 * prob;
        }
        out
    }

    #[test]
    fn theoretical_matches_brute_force_c8() {
        for &p in &[0.0, 0.1, 0.3, 0.5, 0.7, 1.0] {
            for &k in &[1usize, 4, 250] {
                let got = theoretical_histogram::<f64>(p, 8, k, 1000).unwrap();
                let want = brute_theoretical(p, 8, k, 1000);
                for (i, (&g, &w)) in got.counts().iter().zip(&want).enumerate() {
                    let err = if w == 0.0 {
                        g.abs()
                    } else {
                        ((g - w) / w).abs()
                    };
                    assert!(err < 1e-9, "p={p} K={k} bin {}: got {g}, want {w}", i + 1);
                }
            }
        }
    }

    #[test]
    fn theoretical_degenerate_probabilities() {
        let h = theoretical_histogram::<f64>(0.0, 32, 250, 500).unwrap();
        assert_eq!(h.counts()[0], 500.0);
        assert!(h.counts()[1..].iter().all(|&c| c == 0.0));
        let h = theoretical_histogram::<f64>(1.0, 32, 250, 500).unwrap();
        assert_eq!(h.counts()[249], 500.0);
        assert!(theoretical_histogram::<f64>(1.5, 32, 250, 500).is_err());
    }

    #[test]
    fn theoretical_conserves_total_at_c32() {
        for &p in &[0.1, 0.4888, 0.5, 0.9] {
            let total = 9_384_960u64;
            let h = theoretical_histogram::<f64>(p, 32, 250, total).unwrap();
            let sum: f64 = h.counts().iter().sum();
            assert!(
                ((sum - total as f64) / total as f64).abs() < 1e-9,
                "p={p}: sum {sum}"
            );
        }
    }

    #[test]
    fn complement_symmetry_at_power_of_two_bins() {
        // With K = 2^m the boundaries align with the bit-complement
        // involution, so bin k at p mirrors bin K+1−k at 1−p.
        let k = 8usize;
        let h_p = theoretical_histogram::<f64>(0.3, 8, k, 1_000_000).unwrap();
        let h_q = theoretical_histogram::<f64>(0.7, 8, k, 1_000_000).unwrap();
        for i in 0..k {
            let a = h_p.counts()[i];
            let b = h_q.counts()[k - 1 - i];
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "bin {}", i + 1);
        }
    }

    #[test]
    fn uniform_sequence_bins_concentrate() {
        // multinomial concentration: every bin within 5 sigma of L/K
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31337);
        let l = 1_000_000usize;
        let k = 250usize;
        let values: Vec<u64> = (0..l).map(|_| rng.next_u32() as u64).collect();
        let seq = IntegerSequence::new(values, 32).unwrap();
        let h: IntegerHistogram<f64> = histogram(&seq, k).unwrap();
        let expected = l as f64 / k as f64;
        let sigma = (l as f64 * (1.0 / k as f64) * (1.0 - 1.0 / k as f64)).sqrt();
        for (bin, &count) in h.counts().iter().enumerate() {
            assert!(
                (count - expected).abs() <= 5.0 * sigma,
                "bin {}: count {count} vs {expected} +- {}",
                bin + 1,
                5.0 * sigma
            );
        }
    }

    #[test]
    fn merge_adds_elementwise() {
        let a: IntegerHistogram<f64> =
            histogram(&IntegerSequence::new(vec![0, 1, 2], 8).unwrap(), 4).unwrap();
        let b: IntegerHistogram<f64> =
            histogram(&IntegerSequence::new(vec![250, 255], 8).unwrap(), 4).unwrap();
        let m = a.merge(&b).unwrap();
        assert_eq!(m.total(), 5.0);
        assert_eq!(m.counts()[0], 3.0);
        assert_eq!(m.counts()[3], 2.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let h: IntegerHistogram<f64> =
            histogram(&IntegerSequence::new(vec![0, 255], 8).unwrap(), 4).unwrap();
        let mut buf = Vec::new();
        write_histogram_csv(&mut buf, &h, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("k,count,normalized"));
        assert_eq!(lines.count(), 4);
    }

    #[test]
    fn f32_theory_small_case() {
        let h = theoretical_histogram::<f32>(0.5, 8, 4, 1000).unwrap();
        let sum: f32 = h.counts().iter().sum();
        assert!((sum - 1000.0).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn accumulator_matches_sequence_histogram(
            values in proptest::collection::vec(0u64..=255, 0..200),
            k in 1usize..40,
        ) {
            let seq = IntegerSequence::new(values.clone(), 8).unwrap();
            let h: IntegerHistogram<f64> = histogram(&seq, k).unwrap();
            // via bits
            let mut bits = Vec::new();
            for v in &values {
                for i in 0..8 {
                    bits.push((v >> i) & 1 == 1);
                }
            }
            let mut acc = IntegerAccumulator::new(8, k).unwrap();
            let stream = BitStream::from_bits(&bits, None).unwrap();
            stream.for_each_bit(|b| acc.push_bit(b));
            prop_assert_eq!(acc.finish::<f64>(), h);
        }
    }
}
