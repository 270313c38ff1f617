//! Bit streams organized as shots over qubits, their generation from
//! per-qubit Bernoulli processes, and per-qubit probability estimation.
//!
//! A stream of `M = N * S * R` bits is laid out shot-major: within each
//! shot the bits are ordered by ascending qubit hardware index, so the bit
//! at 0-based position `g` belongs to qubit `g % N`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{real_of_u64, Real};

/// Bits produced per generator chunk. Each chunk draws from its own
/// counter-derived substream, so output is independent of how work is
/// scheduled. Byte-aligned.
pub const GEN_CHUNK_BITS: usize = 1 << 16;

/// Shot layout of a stream: `num_qubits` bits per shot,
/// `shots_per_experiment` shots per experiment, `num_experiments`
/// experiments per job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StreamLayout {
    pub num_qubits: usize,
    pub shots_per_experiment: usize,
    pub num_experiments: usize,
}

impl StreamLayout {
    pub fn new(
        num_qubits: usize,
        shots_per_experiment: usize,
        num_experiments: usize,
    ) -> Result<Self> {
        if num_qubits == 0 || shots_per_experiment == 0 || num_experiments == 0 {
            return Err(Error::Layout("all layout fields must be at least 1".into()));
        }
        Ok(Self {
            num_qubits,
            shots_per_experiment,
            num_experiments,
        })
    }

    /// Total number of bits `M = N * S * R`.
    pub fn total_bits(&self) -> u64 {
        self.num_qubits as u64 * self.shots_per_experiment as u64 * self.num_experiments as u64
    }

    /// Bits contributed by each qubit, `M / N`.
    pub fn bits_per_qubit(&self) -> u64 {
        self.shots_per_experiment as u64 * self.num_experiments as u64
    }
}

/// An immutable ordered bit sequence, packed LSB-first into bytes, with
/// optional shot-layout metadata.
#[derive(Clone, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    len_bits: usize,
    layout: Option<StreamLayout>,
}

impl std::fmt::Debug for BitStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BitStream")
            .field("len_bits", &self.len_bits)
            .field("layout", &self.layout)
            .finish()
    }
}

impl BitStream {
    /// Build from individual bits.
    pub fn from_bits(bits: &[bool], layout: Option<StreamLayout>) -> Result<Self> {
        let mut builder = BitStreamBuilder::with_capacity(bits.len());
        for &b in bits {
            builder.push(b);
        }
        builder.finish(layout)
    }

    /// Build from LSB-first packed bytes; `len_bits` may leave a partial
    /// final byte, whose padding bits must be zero.
    pub fn from_packed_bytes(
        mut bytes: Vec<u8>,
        len_bits: usize,
        layout: Option<StreamLayout>,
    ) -> Result<Self> {
        let needed = len_bits.div_ceil(8);
        if bytes.len() != needed {
            return Err(Error::Length(format!(
                "{} bytes cannot hold exactly {} bits (need {})",
                bytes.len(),
                len_bits,
                needed
            )));
        }
        if !len_bits.is_multiple_of(8) {
            // keep the zero-padding invariant so byte equality equals bit equality
            let mask = (1u16 << (len_bits % 8)) as u8 - 1;
            if let Some(last) = bytes.last_mut() {
                if *last & !mask != 0 {
                    return Err(Error::Parse {
                        offset: (needed - 1) as u64,
                        message: "nonzero padding bits in final byte".into(),
                    });
                }
                *last &= mask;
            }
        }
        let stream = Self {
            bytes,
            len_bits,
            layout: None,
        };
        match layout {
            Some(l) => stream.with_layout(l),
            None => Ok(stream),
        }
    }

    /// Attach (or replace) layout metadata, validating the length.
    pub fn with_layout(mut self, layout: StreamLayout) -> Result<Self> {
        if layout.total_bits() != self.len_bits as u64 {
            return Err(Error::Layout(format!(
                "layout declares {} bits but stream holds {}",
                layout.total_bits(),
                self.len_bits
            )));
        }
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.len_bits
    }

    pub fn is_empty(&self) -> bool {
        self.len_bits == 0
    }

    pub fn layout(&self) -> Option<&StreamLayout> {
        self.layout.as_ref()
    }

    /// LSB-first packed bytes; padding bits of the final byte are zero.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Bit at 0-based position `i`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len_bits);
        (self.bytes[i >> 3] >> (i & 7)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len_bits).map(move |i| self.get(i))
    }

    /// Visit every bit in order. Faster than `iter` for large streams.
    pub fn for_each_bit(&self, mut f: impl FnMut(bool)) {
        let full_bytes = self.len_bits / 8;
        for &byte in &self.bytes[..full_bytes] {
            for k in 0..8 {
                f((byte >> k) & 1 == 1);
            }
        }
        for k in 0..(self.len_bits % 8) {
            f((self.bytes[full_bytes] >> k) & 1 == 1);
        }
    }

    pub fn zero_count(&self) -> u64 {
        self.len_bits as u64 - self.one_count()
    }

    pub fn one_count(&self) -> u64 {
        self.bytes.iter().map(|b| b.count_ones() as u64).sum()
    }

    fn layout_or_err(&self) -> Result<&StreamLayout> {
        self.layout.as_ref().ok_or(Error::MissingLayout(
            "operation requires shot-layout metadata",
        ))
    }
}

/// Incremental builder used by the generator and the file parsers.
pub struct BitStreamBuilder {
    bytes: Vec<u8>,
    len_bits: usize,
}

impl BitStreamBuilder {
    pub fn new() -> Self {
        Self::with_capacity(0)
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len_bits: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let slot = self.len_bits & 7;
        if slot == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 1 << slot;
        }
        self.len_bits += 1;
    }

    /// Append `nbits` from LSB-first packed `bytes`.
    pub fn push_packed(&mut self, bytes: &[u8], nbits: usize) {
        if self.len_bits.is_multiple_of(8) {
            let full = nbits / 8;
            self.bytes.extend_from_slice(&bytes[..full]);
            self.len_bits += full * 8;
            for k in 0..(nbits % 8) {
                self.push((bytes[full] >> k) & 1 == 1);
            }
        } else {
            for i in 0..nbits {
                self.push((bytes[i >> 3] >> (i & 7)) & 1 == 1);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len_bits
    }

    pub fn is_empty(&self) -> bool {
        self.len_bits == 0
    }

    pub fn finish(self, layout: Option<StreamLayout>) -> Result<BitStream> {
        BitStream::from_packed_bytes(self.bytes, self.len_bits, layout)
    }
}

impl Default for BitStreamBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// Per-qubit zero probabilities `p_n(0)`; the one probability is the
/// complement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QubitBiasProfile<F: Real> {
    zero_probs: Vec<F>,
}

impl<F: Real> QubitBiasProfile<F> {
    pub fn from_zero_probs(zero_probs: Vec<F>) -> Result<Self> {
        if zero_probs.is_empty() {
            return Err(Error::Layout(
                "profile must cover at least one qubit".into(),
            ));
        }
        for (n, &p) in zero_probs.iter().enumerate() {
            if !(F::zero()..=F::one()).contains(&p) || p.is_nan() {
                return Err(Error::Domain(format!(
                    "zero probability for qubit {n} is outside [0, 1]"
                )));
            }
        }
        Ok(Self { zero_probs })
    }

    /// Broadcast a single scalar bias to every qubit.
    pub fn uniform(zero_prob: F, num_qubits: usize) -> Result<Self> {
        Self::from_zero_probs(vec![zero_prob; num_qubits.max(1)])
    }

    pub fn num_qubits(&self) -> usize {
        self.zero_probs.len()
    }

    pub fn zero_probs(&self) -> &[F] {
        &self.zero_probs
    }
}

/// Estimated per-qubit zero probabilities with their aggregate summary.
#[derive(Debug, Clone, Serialize)]
pub struct BitProbabilityReport<F: Real> {
    /// Estimated `p_n(0)` per qubit hardware index.
    pub per_qubit: Vec<F>,
    /// Mean of the per-qubit estimates (equal sample counts per qubit).
    pub aggregate_mean: F,
    /// Population standard deviation of the per-qubit estimates.
    pub aggregate_std: F,
    /// Bits contributing to each estimate, `M / N`.
    pub samples_per_qubit: u64,
}

/// Streaming accumulator for per-qubit and whole-stream bit statistics.
///
/// Feeding bits in stream order yields, without holding the stream in
/// memory: zero counts and run counts per qubit, plus the whole-stream
/// totals. Used by both the in-memory operations and the chunked file
/// analyses.
#[derive(Debug, Clone)]
pub struct BitStreamStats {
    num_qubits: usize,
    zeros_per_qubit: Vec<u64>,
    runs_per_qubit: Vec<u64>,
    last_per_qubit: Vec<u8>, // 0, 1, or 2 = no bit seen yet
    total_bits: u64,
    total_zeros: u64,
    total_runs: u64,
    last_bit: u8,
    next_qubit: usize,
}

impl BitStreamStats {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            zeros_per_qubit: vec![0; num_qubits],
            runs_per_qubit: vec![0; num_qubits],
            last_per_qubit: vec![2; num_qubits],
            total_bits: 0,
            total_zeros: 0,
            total_runs: 0,
            last_bit: 2,
            next_qubit: 0,
        }
    }

    #[inline]
    pub fn push_bit(&mut self, bit: bool) {
        let b = bit as u8;
        let q = self.next_qubit;
        if !bit {
            self.zeros_per_qubit[q] += 1;
            self.total_zeros += 1;
        }
        if self.last_per_qubit[q] != b {
            self.runs_per_qubit[q] += 1;
            self.last_per_qubit[q] = b;
        }
        if self.last_bit != b {
            self.total_runs += 1;
            self.last_bit = b;
        }
        self.total_bits += 1;
        self.next_qubit += 1;
        if self.next_qubit == self.num_qubits {
            self.next_qubit = 0;
        }
    }

    /// Feed `nbits` from LSB-first packed bytes.
    pub fn push_packed(&mut self, bytes: &[u8], nbits: usize) {
        for i in 0..nbits {
            self.push_bit((bytes[i >> 3] >> (i & 7)) & 1 == 1);
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn total_bits(&self) -> u64 {
        self.total_bits
    }

    pub fn total_zeros(&self) -> u64 {
        self.total_zeros
    }

    pub fn total_ones(&self) -> u64 {
        self.total_bits - self.total_zeros
    }

    /// Number of maximal runs in the whole stream.
    pub fn total_runs(&self) -> u64 {
        self.total_runs
    }

    pub fn zeros_for_qubit(&self, n: usize) -> u64 {
        self.zeros_per_qubit[n]
    }

    pub fn runs_for_qubit(&self, n: usize) -> u64 {
        self.runs_per_qubit[n]
    }

    /// Bits seen by qubit `n` so far.
    pub fn bits_for_qubit(&self, n: usize) -> u64 {
        let per_cycle = self.total_bits / self.num_qubits as u64;
        let rem = (self.total_bits % self.num_qubits as u64) as usize;
        per_cycle + (n < rem) as u64
    }

    /// Build the probability report from the accumulated counts.
    pub fn probability_report<F: Real>(&self) -> Result<BitProbabilityReport<F>> {
        if self.total_bits == 0 {
            return Err(Error::Domain(
                "empty stream has no bit probabilities".into(),
            ));
        }
        let samples = self.bits_for_qubit(0);
        let per_qubit: Vec<F> = (0..self.num_qubits)
            .map(|n| {
                let m = self.bits_for_qubit(n);
                real_of_u64::<F>(self.zeros_per_qubit[n]) / real_of_u64::<F>(m.max(1))
            })
            .collect();
        let count = real_of_u64::<F>(self.num_qubits as u64);
        let mean = per_qubit.iter().copied().sum::<F>() / count;
        let var = per_qubit
            .iter()
            .map(|&p| (p - mean) * (p - mean))
            .sum::<F>()
            / count;
        Ok(BitProbabilityReport {
            per_qubit,
            aggregate_mean: mean,
            aggregate_std: var.sqrt(),
            samples_per_qubit: samples,
        })
    }
}

/// One-bit threshold per qubit, fixed-point against a full 64-bit draw.
fn one_thresholds<F: Real>(profile: &QubitBiasProfile<F>) -> Vec<u128> {
    profile
        .zero_probs()
        .iter()
        .map(|&p0| {
            let p1 = 1.0 - p0.to_f64().unwrap_or(0.0);
            let t = (p1 * 18_446_744_073_709_551_616.0).round();
            (t.max(0.0) as u128).min(1u128 << 64)
        })
        .collect()
}

/// Generate a Bernoulli bit stream: bit for qubit `n` is 1 with
/// probability `1 - p_n(0)`.
///
/// Deterministic in `(profile, layout, seed)`: bits are produced in
/// fixed-size chunks ([`GEN_CHUNK_BITS`]) whose substreams are derived
/// from `(seed, chunk index)`, so the result never depends on scheduling.
pub fn generate_bits<F: Real>(
    profile: &QubitBiasProfile<F>,
    layout: &StreamLayout,
    seed: u64,
) -> Result<BitStream> {
    if profile.num_qubits() != layout.num_qubits {
        return Err(Error::Layout(format!(
            "profile covers {} qubits but layout declares {}",
            profile.num_qubits(),
            layout.num_qubits
        )));
    }
    let total = layout.total_bits();
    if total > usize::MAX as u64 / 2 {
        return Err(Error::Layout(
            "stream too large for in-memory generation".into(),
        ));
    }
    let total = total as usize;
    let thresholds = one_thresholds(profile);
    let n_qubits = layout.num_qubits;

    let mut bytes = vec![0u8; total.div_ceil(8)];
    let num_chunks = total.div_ceil(GEN_CHUNK_BITS);
    for chunk in 0..num_chunks {
        let start = chunk * GEN_CHUNK_BITS;
        let end = (start + GEN_CHUNK_BITS).min(total);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        let mut qubit = start % n_qubits;
        for g in start..end {
            let draw = rng.next_u64() as u128;
            if draw < thresholds[qubit] {
                bytes[g >> 3] |= 1 << (g & 7);
            }
            qubit += 1;
            if qubit == n_qubits {
                qubit = 0;
            }
        }
    }
    BitStream::from_packed_bytes(bytes, total, Some(*layout))
}

/// Extract the sub-stream of measurements belonging to qubit `n`:
/// positions `n, n + N, n + 2N, ...` of the stream.
pub fn qubit_stream(stream: &BitStream, n: usize) -> Result<BitStream> {
    let layout = stream.layout_or_err()?;
    if n >= layout.num_qubits {
        return Err(Error::Index(format!(
            "qubit index {n} out of range for {} qubits",
            layout.num_qubits
        )));
    }
    let sub_layout = StreamLayout::new(1, layout.shots_per_experiment, layout.num_experiments)?;
    let mut builder = BitStreamBuilder::with_capacity(layout.bits_per_qubit() as usize);
    let mut i = n;
    while i < stream.len() {
        builder.push(stream.get(i));
        i += layout.num_qubits;
    }
    builder.finish(Some(sub_layout))
}

/// Estimate per-qubit zero probabilities and their aggregate over the
/// whole stream.
pub fn estimate_bit_probabilities<F: Real>(stream: &BitStream) -> Result<BitProbabilityReport<F>> {
    let layout = stream.layout_or_err()?;
    let stats = accumulate_stats(stream, layout.num_qubits);
    stats.probability_report()
}

/// Run the streaming accumulator over an in-memory stream.
pub fn accumulate_stats(stream: &BitStream, num_qubits: usize) -> BitStreamStats {
    let mut stats = BitStreamStats::new(num_qubits);
    stream.for_each_bit(|b| stats.push_bit(b));
    stats
}
