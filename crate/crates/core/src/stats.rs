//! Randomness and distribution-distance tests: discrete Hellinger
//! distance, chi-squared uniformity of the bit counts, Wald-Wolfowitz
//! runs test (whole-stream and per-qubit), and the monobit frequency
//! test.

use serde::Serialize;

use crate::bitstream::{BitProbabilityReport, BitStream, BitStreamStats};
use crate::error::{Error, Result};
use crate::num::{real, real_of_u64, Real};
use crate::special::{chi_squared_sf, erfc};

/// Default significance level used throughout.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// A discrete probability distribution over a shared index set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDistribution<F: Real> {
    probs: Vec<F>,
}

impl<F: Real> DiscreteDistribution<F> {
    /// Validates non-negativity and unit total mass.
    pub fn new(probs: Vec<F>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain(
                "distribution needs at least one outcome".into(),
            ));
        }
        if probs.iter().any(|p| *p < F::zero() || p.is_nan()) {
            return Err(Error::Domain("probabilities must be non-negative".into()));
        }
        let sum: F = probs.iter().copied().sum();
        let tol =
            real::<F>(1e-12).max(F::epsilon() * real::<F>(16.0) * real::<F>(probs.len() as f64));
        if (sum - F::one()).abs() > tol {
            return Err(Error::Domain(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Normalize non-negative counts into a distribution.
    pub fn from_counts(counts: &[F]) -> Result<Self> {
        let sum: F = counts.iter().copied().sum();
        if sum <= F::zero() {
            return Err(Error::Domain("counts must have positive total".into()));
        }
        Self::new(counts.iter().map(|&c| c / sum).collect())
    }

    /// The uniform distribution over `n` outcomes.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain(
                "distribution needs at least one outcome".into(),
            ));
        }
        let p = F::one() / real::<F>(n as f64);
        Ok(Self { probs: vec![p; n] })
    }

    /// Bernoulli pair `(p(0), p(1))`.
    pub fn bernoulli(zero_prob: F) -> Result<Self> {
        if !(F::zero()..=F::one()).contains(&zero_prob) || zero_prob.is_nan() {
            return Err(Error::Domain("zero probability must lie in [0, 1]".into()));
        }
        Ok(Self {
            probs: vec![zero_prob, F::one() - zero_prob],
        })
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Discrete Hellinger distance between two distributions on the same
/// index set; symmetric, in [0, 1], zero iff the distributions agree.
pub fn hellinger<F: Real>(q1: &DiscreteDistribution<F>, q2: &DiscreteDistribution<F>) -> Result<F> {
    if q1.len() != q2.len() {
        return Err(Error::Shape(format!(
            "distributions live on different index sets ({} vs {})",
            q1.len(),
            q2.len()
        )));
    }
    let sum: F = q1
        .probs()
        .iter()
        .zip(q2.probs())
        .map(|(&a, &b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    Ok((sum / real::<F>(2.0)).sqrt().min(F::one()))
}

/// Hellinger distance of a histogram (normalized) to the uniform
/// distribution over its bins.
pub fn hellinger_to_uniform<F: Real>(hist: &crate::integers::IntegerHistogram<F>) -> Result<F> {
    let measured = DiscreteDistribution::from_counts(hist.counts())?;
    let uniform = DiscreteDistribution::uniform(hist.num_bins())?;
    hellinger(&measured, &uniform)
}

/// Condition noticed while running a test; carried in the report instead
/// of aborting the battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFlag {
    /// The statistic is undefined (constant sequence, zero variance).
    Degenerate,
    /// Below the length where the normal approximation is trustworthy.
    ShortSequence,
}

/// Outcome of one hypothesis test at significance `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult<F: Real> {
    pub name: String,
    pub statistic: F,
    pub p_value: F,
    pub alpha: F,
    pub passed: bool,
    pub flags: Vec<TestFlag>,
}

impl<F: Real> TestResult<F> {
    fn new(name: &str, statistic: F, p_value: F, alpha: F) -> Self {
        Self {
            name: name.to_string(),
            statistic,
            p_value,
            alpha,
            passed: p_value > alpha,
            flags: Vec::new(),
        }
    }

    fn with_flag(mut self, flag: TestFlag) -> Self {
        self.flags.push(flag);
        self
    }

    /// `1 − p`, rounded to four decimals, the form used when quoting a
    /// rejection confidence.
    pub fn confidence_level(&self) -> F {
        let scale = real::<F>(1e4);
        ((F::one() - self.p_value) * scale).round() / scale
    }
}

/// Chi-squared test of the bit counts against a uniform zero/one split,
/// one degree of freedom.
pub fn chi_squared_uniform_bits<F: Real>(
    zero_count: u64,
    one_count: u64,
    alpha: F,
) -> Result<TestResult<F>> {
    let total = zero_count + one_count;
    if total == 0 {
        return Err(Error::Domain(
            "chi-squared test needs at least one bit".into(),
        ));
    }
    let diff = zero_count as i128 - one_count as i128;
    let statistic = real::<F>((diff * diff) as f64) / real_of_u64::<F>(total);
    let p = chi_squared_sf(statistic, F::one());
    Ok(TestResult::new("chi_squared_uniform", statistic, p, alpha))
}

/// Wald-Wolfowitz runs test from the sufficient statistics: number of
/// maximal runs and the zero/one counts. Normal approximation.
pub fn runs_test_from_counts<F: Real>(
    runs: u64,
    zero_count: u64,
    one_count: u64,
    alpha: F,
) -> Result<TestResult<F>> {
    if zero_count == 0 || one_count == 0 {
        return Err(Error::Degenerate(
            "runs test is undefined on a constant sequence".into(),
        ));
    }
    let n0 = real_of_u64::<F>(zero_count);
    let n1 = real_of_u64::<F>(one_count);
    let n = n0 + n1;
    let two = real::<F>(2.0);
    let mu = two * n0 * n1 / n + F::one();
    let var = two * n0 * n1 * (two * n0 * n1 - n) / (n * n * (n - F::one()));
    let z = (real_of_u64::<F>(runs) - mu) / var.sqrt();
    let p = erfc(z.abs() / real::<F>(std::f64::consts::SQRT_2));
    let mut result = TestResult::new("runs", z, p, alpha);
    if zero_count + one_count < 50 {
        result = result.with_flag(TestFlag::ShortSequence);
    }
    Ok(result)
}

/// Wald-Wolfowitz runs test over a whole bit stream.
pub fn runs_test<F: Real>(stream: &BitStream, alpha: F) -> Result<TestResult<F>> {
    let mut runs = 0u64;
    let mut zeros = 0u64;
    let mut last = 2u8;
    stream.for_each_bit(|b| {
        if !b {
            zeros += 1;
        }
        if b as u8 != last {
            runs += 1;
            last = b as u8;
        }
    });
    runs_test_from_counts(runs, zeros, stream.len() as u64 - zeros, alpha)
}

/// A degenerate per-qubit entry: reported as failed instead of aborting
/// the battery.
fn degenerate_result<F: Real>(name: &str, alpha: F) -> TestResult<F> {
    TestResult::new(name, F::zero(), F::zero(), alpha).with_flag(TestFlag::Degenerate)
}

/// Per-qubit runs tests plus the whole-stream test.
#[derive(Debug, Clone, Serialize)]
pub struct PerQubitRuns<F: Real> {
    /// One result per qubit hardware index, in index order.
    pub per_qubit: Vec<TestResult<F>>,
    /// The same test applied to the entire stream.
    pub whole_stream: TestResult<F>,
}

/// Run the runs test on every qubit sub-stream and on the whole stream.
/// Constant sub-streams are reported with a degenerate flag.
pub fn per_qubit_runs<F: Real>(stream: &BitStream, alpha: F) -> Result<PerQubitRuns<F>> {
    let layout = stream.layout().ok_or(Error::MissingLayout(
        "per-qubit runs tests need the shot layout",
    ))?;
    let stats = crate::bitstream::accumulate_stats(stream, layout.num_qubits);
    Ok(per_qubit_runs_from_stats(&stats, alpha))
}

/// Same as [`per_qubit_runs`] but from an already-filled accumulator
/// (the streaming analysis path).
pub fn per_qubit_runs_from_stats<F: Real>(stats: &BitStreamStats, alpha: F) -> PerQubitRuns<F> {
    let per_qubit = (0..stats.num_qubits())
        .map(|n| {
            let bits = stats.bits_for_qubit(n);
            let zeros = stats.zeros_for_qubit(n);
            runs_test_from_counts(stats.runs_for_qubit(n), zeros, bits - zeros, alpha)
                .unwrap_or_else(|_| degenerate_result("runs", alpha))
        })
        .collect();
    let whole_stream = runs_test_from_counts(
        stats.total_runs(),
        stats.total_zeros(),
        stats.total_ones(),
        alpha,
    )
    .unwrap_or_else(|_| degenerate_result("runs", alpha));
    PerQubitRuns {
        per_qubit,
        whole_stream,
    }
}

/// Monobit frequency test from the zero/one counts.
pub fn monobit_from_counts<F: Real>(
    zero_count: u64,
    one_count: u64,
    alpha: F,
) -> Result<TestResult<F>> {
    let total = zero_count + one_count;
    if total < 100 {
        return Err(Error::Domain(format!(
            "monobit frequency test needs at least 100 bits, got {total}"
        )));
    }
    let diff = (one_count as i128 - zero_count as i128).unsigned_abs() as u64;
    let s_obs = real_of_u64::<F>(diff) / real_of_u64::<F>(total).sqrt();
    let p = erfc(s_obs / real::<F>(std::f64::consts::SQRT_2));
    Ok(TestResult::new("monobit_frequency", s_obs, p, alpha))
}

/// NIST-style monobit frequency test over a stream.
pub fn monobit_frequency_test<F: Real>(stream: &BitStream, alpha: F) -> Result<TestResult<F>> {
    let zeros = stream.zero_count();
    monobit_from_counts(zeros, stream.len() as u64 - zeros, alpha)
}

/// Mean and population standard deviation, over qubits, of the Hellinger
/// distance between each qubit's bit distribution and the uniform coin.
pub fn qubit_hellinger_summary<F: Real>(report: &BitProbabilityReport<F>) -> Result<(F, F)> {
    if report.per_qubit.is_empty() {
        return Err(Error::Domain("report covers no qubits".into()));
    }
    let uniform = DiscreteDistribution::bernoulli(real::<F>(0.5))?;
    let distances: Vec<F> = report
        .per_qubit
        .iter()
        .map(|&p0| {
            let q = DiscreteDistribution::bernoulli(p0)?;
            hellinger(&q, &uniform)
        })
        .collect::<Result<_>>()?;
    let n = real::<F>(distances.len() as f64);
    let mean = distances.iter().copied().sum::<F>() / n;
    let var = distances
        .iter()
        .map(|&d| (d - mean) * (d - mean))
        .sum::<F>()
        / n;
    Ok((mean, var.sqrt()))
}
