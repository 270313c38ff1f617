//! Desk-scale training harness measuring the effect of an RNG source on
//! weight initialization.
//!
//! Only the initialization consumes the source under test. Everything
//! else that is random (the synthetic dataset and the batch order) draws
//! from an auxiliary generator seeded by `(base_seed, run_index)`, so two
//! experiments that differ only in their RNG source train on identical
//! data in identical order.
//!
//! The network is a two-layer fully connected classifier (2 → hidden → 2)
//! trained with plain mini-batch gradient descent on a two-class
//! Gaussian-blobs task.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bitfile::{parse_bitfile, read_sidecar, BitFileFormat};
use crate::bits_to_integers;
use crate::compare::RunMatrix;
use crate::error::{Error, Result};
use crate::integers::{max_value, IntegerSequence};
use crate::num::{real, real_of_u64, Real};

/// Word size of the integers every source emits.
pub const SOURCE_WORD_BITS: u32 = 32;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mix a base seed with a salt into an independent stream seed.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    splitmix64(base ^ splitmix64(salt))
}

/// Parseable description of an RNG source.
///
/// Spec strings: `unbiased`, `biased=<zero probability>`, `file=<path>`.
/// Bias values name the probability of a zero bit, matching the stream
/// generator's convention.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    PrngUnbiased,
    PrngBiased { zero_prob: f64 },
    FileSequence { path: PathBuf },
}

impl SourceSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "unbiased" {
            return Ok(Self::PrngUnbiased);
        }
        if let Some(v) = text.strip_prefix("biased=") {
            let zero_prob: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("invalid bias value '{v}'")))?;
            if !(0.0..=1.0).contains(&zero_prob) {
                return Err(Error::Config(format!("bias {zero_prob} outside [0, 1]")));
            }
            return Ok(Self::PrngBiased { zero_prob });
        }
        if let Some(p) = text.strip_prefix("file=") {
            return Ok(Self::FileSequence {
                path: PathBuf::from(p),
            });
        }
        Err(Error::Config(format!(
            "unknown source spec '{text}' (expected 'unbiased', 'biased=<p0>', or 'file=<path>')"
        )))
    }

    pub fn label(&self) -> String {
        match self {
            Self::PrngUnbiased => "unbiased".to_string(),
            Self::PrngBiased { zero_prob } => format!("biased({zero_prob})"),
            Self::FileSequence { path } => format!(
                "file({})",
                path.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string())
            ),
        }
    }

    /// Seed for the source's own generator, derived from the base seed
    /// and the spec itself so identical specs draw identical integers.
    fn stream_seed(&self, base_seed: u64) -> u64 {
        match self {
            Self::PrngUnbiased => derive_seed(base_seed, 0x5eed_0001),
            Self::PrngBiased { zero_prob } => {
                derive_seed(base_seed, 0x5eed_0002 ^ zero_prob.to_bits())
            }
            Self::FileSequence { .. } => 0, // file content is the stream
        }
    }
}

#[allow(clippy::large_enum_variant)] // one instance per source
enum SourceState {
    Prng {
        rng: ChaCha8Rng,
        /// Fixed-point threshold for a one bit, `round(p(1) * 2^64)`;
        /// `None` for the unbiased source, which draws words directly.
        one_threshold: Option<u128>,
    },
    File {
        values: Vec<u64>,
        cursor: usize,
    },
}

/// A stateful 32-bit integer source: an unbiased PRNG, a Bernoulli-biased
/// PRNG, or a predefined file sequence consumed strictly in order.
pub struct RngSource {
    label: String,
    state: SourceState,
    consumed: u64,
}

impl RngSource {
    /// Instantiate a spec. File sequences are loaded eagerly so
    /// exhaustion is detectable; prng variants seed from
    /// `(base_seed, spec)`.
    pub fn from_spec(spec: &SourceSpec, base_seed: u64) -> Result<Self> {
        let label = spec.label();
        let state = match spec {
            SourceSpec::PrngUnbiased => SourceState::Prng {
                rng: ChaCha8Rng::seed_from_u64(spec.stream_seed(base_seed)),
                one_threshold: None,
            },
            SourceSpec::PrngBiased { zero_prob } => {
                let p1 = 1.0 - zero_prob;
                let t = (p1 * 18_446_744_073_709_551_616.0).round();
                SourceState::Prng {
                    rng: ChaCha8Rng::seed_from_u64(spec.stream_seed(base_seed)),
                    one_threshold: Some((t.max(0.0) as u128).min(1u128 << 64)),
                }
            }
            SourceSpec::FileSequence { path } => {
                let seq = load_file_integers(path)?;
                SourceState::File {
                    values: seq.values().to_vec(),
                    cursor: 0,
                }
            }
        };
        Ok(Self {
            label,
            state,
            consumed: 0,
        })
    }

    /// Wrap an already-extracted integer sequence.
    pub fn from_integers(label: impl Into<String>, seq: &IntegerSequence) -> Self {
        Self {
            label: label.into(),
            state: SourceState::File {
                values: seq.values().to_vec(),
                cursor: 0,
            },
            consumed: 0,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Integers handed out so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    /// Next 32-bit integer. File sequences never wrap around: running
    /// past the end is an error.
    pub fn next_integer(&mut self) -> Result<u64> {
        let value = match &mut self.state {
            SourceState::Prng {
                rng,
                one_threshold: None,
            } => rng.next_u32() as u64,
            SourceState::Prng {
                rng,
                one_threshold: Some(t),
            } => {
                // Bernoulli bit string assembled LSB-first.
                let mut v = 0u64;
                for i in 0..SOURCE_WORD_BITS {
                    if (rng.next_u64() as u128) < *t {
                        v |= 1 << i;
                    }
                }
                v
            }
            SourceState::File { values, cursor } => {
                if *cursor >= values.len() {
                    return Err(Error::Exhausted(format!(
                        "file sequence '{}' ran out after {} integers",
                        self.label, self.consumed
                    )));
                }
                let v = values[*cursor];
                *cursor += 1;
                v
            }
        };
        self.consumed += 1;
        Ok(value)
    }

    /// Next value rescaled into [0, 1] by division by `2^32 − 1`.
    pub fn next_uniform<F: Real>(&mut self) -> Result<F> {
        let v = self.next_integer()?;
        Ok(real_of_u64::<F>(v) / real_of_u64::<F>(max_value(SOURCE_WORD_BITS)))
    }
}

fn load_file_integers(path: &Path) -> Result<IntegerSequence> {
    // packed when a sidecar is present, ascii otherwise
    let format = if read_sidecar(path)?.is_some() {
        BitFileFormat::Packed
    } else {
        BitFileFormat::Ascii
    };
    let stream = parse_bitfile(path, format)?;
    bits_to_integers(&stream, SOURCE_WORD_BITS)
}

/// Draw a `fan_out × fan_in` weight matrix (row-major) uniformly from
/// `[−√(6/fan_in), +√(6/fan_in)]`, consuming exactly
/// `fan_in * fan_out` integers from the source.
pub fn he_uniform_init<F: Real>(
    fan_in: usize,
    fan_out: usize,
    source: &mut RngSource,
) -> Result<Vec<F>> {
    if fan_in == 0 {
        return Err(Error::Domain("fan_in must be at least 1".into()));
    }
    let bound = (real::<F>(6.0) / real::<F>(fan_in as f64)).sqrt();
    let two = real::<F>(2.0);
    (0..fan_in * fan_out)
        .map(|_| {
            let u: F = source.next_uniform()?;
            Ok((two * u - F::one()) * bound)
        })
        .collect()
}

/// A labeled 2-d point.
pub type LabeledPoint<F> = ([F; 2], usize);

/// Experiment parameters. Defaults give a task that a fresh network
/// solves to high accuracy within the configured epochs while leaving
/// genuine run-to-run variance for the statistics to work on.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<F: Real> {
    pub runs: usize,
    pub epochs: usize,
    pub hidden_width: usize,
    pub learning_rate: F,
    pub batch_size: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub blob_std: F,
    pub base_seed: u64,
    pub alpha: F,
}

impl<F: Real> Default for ExperimentConfig<F> {
    fn default() -> Self {
        Self {
            runs: 31,
            epochs: 20,
            hidden_width: 16,
            learning_rate: real(0.1),
            batch_size: 32,
            train_size: 256,
            test_size: 1000,
            blob_std: real(0.6),
            base_seed: 1,
            alpha: real(0.05),
        }
    }
}

impl<F: Real> ExperimentConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 2 {
            return Err(Error::Config("runs must be at least 2".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.hidden_width == 0
            || self.batch_size == 0
            || self.train_size == 0
            || self.test_size == 0
        {
            return Err(Error::Config(
                "hidden_width, batch_size, train_size, test_size must be positive".into(),
            ));
        }
        if self.learning_rate <= F::zero() || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.blob_std <= F::zero() || !self.blob_std.is_finite() {
            return Err(Error::Config("blob_std must be positive".into()));
        }
        Ok(())
    }

    /// Trainable parameters drawn from the RNG source per run
    /// (both weight matrices; biases start at zero).
    pub fn params_per_run(&self) -> u64 {
        (2 * self.hidden_width + self.hidden_width * 2) as u64
    }
}

/// Parse a `key = value` experiment config. Unknown keys are rejected.
/// Returns the config and any `sources = ...` list found in the file.
pub fn parse_experiment_config<F: Real>(
    text: &str,
) -> Result<(ExperimentConfig<F>, Vec<SourceSpec>)> {
    let mut config = ExperimentConfig::default();
    let mut sources = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad =
            |what: &str| Error::Config(format!("line {}: invalid {what} '{value}'", lineno + 1));
        match key {
            "runs" => config.runs = value.parse().map_err(|_| bad("runs"))?,
            "epochs" => config.epochs = value.parse().map_err(|_| bad("epochs"))?,
            "hidden_width" => {
                config.hidden_width = value.parse().map_err(|_| bad("hidden_width"))?
            }
            "learning_rate" => {
                config.learning_rate = real(value.parse::<f64>().map_err(|_| bad("learning_rate"))?)
            }
            "batch_size" => config.batch_size = value.parse().map_err(|_| bad("batch_size"))?,
            "train_size" => config.train_size = value.parse().map_err(|_| bad("train_size"))?,
            "test_size" => config.test_size = value.parse().map_err(|_| bad("test_size"))?,
            "blob_std" => {
                config.blob_std = real(value.parse::<f64>().map_err(|_| bad("blob_std"))?)
            }
            "base_seed" => config.base_seed = value.parse().map_err(|_| bad("base_seed"))?,
            "alpha" => config.alpha = real(value.parse::<f64>().map_err(|_| bad("alpha"))?),
            "sources" => {
                sources = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(SourceSpec::parse)
                    .collect::<Result<_>>()?;
            }
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    config.validate()?;
    Ok((config, sources))
}

/// Two-layer fully connected network, 2 → hidden → 2.
///
/// Parameter vector layout: `w1` (hidden × 2, row-major), `b1`, `w2`
/// (2 × hidden, row-major), `b2`.
#[derive(Debug, Clone)]
pub struct MlpNetwork<F: Real> {
    hidden: usize,
    w1: Vec<F>,
    b1: Vec<F>,
    w2: Vec<F>,
    b2: Vec<F>,
}

impl<F: Real> MlpNetwork<F> {
    /// Initialize both weight matrices from the source (He-uniform,
    /// fan-in 2 then fan-in `hidden`); biases start at zero.
    pub fn init_from_source(hidden: usize, source: &mut RngSource) -> Result<Self> {
        let w1 = he_uniform_init(2, hidden, source)?;
        let w2 = he_uniform_init(hidden, 2, source)?;
        Ok(Self {
            hidden,
            w1,
            b1: vec![F::zero(); hidden],
            w2,
            b2: vec![F::zero(); 2],
        })
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn params(&self) -> Vec<F> {
        let mut out = Vec::with_capacity(self.num_params());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.extend_from_slice(&self.b2);
        out
    }

    pub fn set_params(&mut self, flat: &[F]) {
        assert_eq!(flat.len(), self.num_params());
        let (h2, h) = (self.w1.len(), self.hidden);
        self.w1.copy_from_slice(&flat[..h2]);
        self.b1.copy_from_slice(&flat[h2..h2 + h]);
        self.w2.copy_from_slice(&flat[h2 + h..h2 + h + 2 * h]);
        self.b2.copy_from_slice(&flat[h2 + h + 2 * h..]);
    }

    fn forward(&self, x: &[F; 2]) -> (Vec<F>, [F; 2]) {
        let mut act = vec![F::zero(); self.hidden];
        for (i, a) in act.iter_mut().enumerate() {
            let z = self.w1[2 * i] * x[0] + self.w1[2 * i + 1] * x[1] + self.b1[i];
            *a = z.max(F::zero());
        }
        let mut logits = [self.b2[0], self.b2[1]];
        for (o, logit) in logits.iter_mut().enumerate() {
            let row = &self.w2[o * self.hidden..(o + 1) * self.hidden];
            for (w, a) in row.iter().zip(&act) {
                *logit += *w * *a;
            }
        }
        (act, logits)
    }

    fn softmax(logits: &[F; 2]) -> [F; 2] {
        let m = logits[0].max(logits[1]);
        let e0 = (logits[0] - m).exp();
        let e1 = (logits[1] - m).exp();
        let z = e0 + e1;
        [e0 / z, e1 / z]
    }

    /// Mean cross-entropy loss over a batch.
    pub fn loss_on(&self, batch: &[LabeledPoint<F>]) -> F {
        let mut total = F::zero();
        for (x, y) in batch {
            let (_, logits) = self.forward(x);
            let probs = Self::softmax(&logits);
            total -= probs[*y].max(F::min_positive_value()).ln();
        }
        total / real::<F>(batch.len() as f64)
    }

    /// Mean gradient of the loss over a batch, in parameter-vector order.
    #[allow(clippy::needless_range_loop)] // indexed form mirrors the update equations
    pub fn grad_on(&self, batch: &[LabeledPoint<F>]) -> Vec<F> {
        let h = self.hidden;
        let mut g_w1 = vec![F::zero(); 2 * h];
        let mut g_b1 = vec![F::zero(); h];
        let mut g_w2 = vec![F::zero(); 2 * h];
        let mut g_b2 = [F::zero(); 2];
        for (x, y) in batch {
            let (act, logits) = self.forward(x);
            let probs = Self::softmax(&logits);
            let mut dz2 = [probs[0], probs[1]];
            dz2[*y] -= F::one();
            for o in 0..2 {
                for i in 0..h {
                    g_w2[o * h + i] += dz2[o] * act[i];
                }
                g_b2[o] += dz2[o];
            }
            for i in 0..h {
                if act[i] > F::zero() {
                    let da = self.w2[i] * dz2[0] + self.w2[h + i] * dz2[1];
                    g_w1[2 * i] += da * x[0];
                    g_w1[2 * i + 1] += da * x[1];
                    g_b1[i] += da;
                }
            }
        }
        let scale = real::<F>(batch.len() as f64).recip();
        let mut out = Vec::with_capacity(self.num_params());
        out.extend(g_w1.into_iter().map(|g| g * scale));
        out.extend(g_b1.into_iter().map(|g| g * scale));
        out.extend(g_w2.into_iter().map(|g| g * scale));
        out.extend(g_b2.into_iter().map(|g| g * scale));
        out
    }

    fn sgd_step(&mut self, batch: &[LabeledPoint<F>], lr: F) {
        let grad = self.grad_on(batch);
        let mut params = self.params();
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= lr * *g;
        }
        self.set_params(&params);
    }

    /// Fraction of points whose argmax logit matches the label.
    pub fn accuracy_on(&self, data: &[LabeledPoint<F>]) -> F {
        let correct = data
            .iter()
            .filter(|(x, y)| {
                let (_, logits) = self.forward(x);
                let pred = (logits[1] > logits[0]) as usize;
                pred == *y
            })
            .count();
        real::<F>(correct as f64) / real::<F>(data.len() as f64)
    }
}

/// Balanced two-class Gaussian blobs at (−1, −1) and (+1, +1).
fn gaussian_blobs<F: Real>(n: usize, std: F, rng: &mut ChaCha8Rng) -> Vec<LabeledPoint<F>> {
    (0..n)
        .map(|i| {
            let label = i % 2;
            let center = if label == 0 { -F::one() } else { F::one() };
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            ([center + std * real(z0), center + std * real(z1)], label)
        })
        .collect()
}

/// Deterministic train/test data for one run; independent of any RNG
/// source by construction.
pub fn make_run_data<F: Real>(
    config: &ExperimentConfig<F>,
    run_index: usize,
) -> (Vec<LabeledPoint<F>>, Vec<LabeledPoint<F>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.base_seed, run_index as u64));
    let train = gaussian_blobs(config.train_size, config.blob_std, &mut rng);
    let test = gaussian_blobs(config.test_size, config.blob_std, &mut rng);
    (train, test)
}

/// Train one run: He-uniform initialization from `source`, then
/// `config.epochs` epochs of mini-batch gradient descent. Returns the
/// held-out accuracy after each epoch.
pub fn train_toy_network<F: Real>(
    config: &ExperimentConfig<F>,
    source: &mut RngSource,
    run_index: usize,
) -> Result<Vec<F>> {
    config.validate()?;
    let (train, test) = make_run_data(config, run_index);
    let mut net = MlpNetwork::init_from_source(config.hidden_width, source)?;
    // batch order comes from its own auxiliary stream
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(
        config.base_seed,
        0x0BAD_5EED ^ run_index as u64,
    ));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut accuracies = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<LabeledPoint<F>> = chunk.iter().map(|&i| train[i]).collect();
            net.sgd_step(&batch, config.learning_rate);
        }
        let loss = net.loss_on(&train);
        if !loss.is_finite() {
            return Err(Error::Diverged(format!(
                "non-finite training loss in run {run_index}"
            )));
        }
        accuracies.push(net.accuracy_on(&test));
    }
    Ok(accuracies)
}

/// Run the full experiment: every source trains `config.runs` runs, file
/// sequences being consumed contiguously across runs in execution order.
/// Returns one matrix per source, labels deduplicated.
pub fn run_experiment<F: Real>(
    config: &ExperimentConfig<F>,
    specs: &[SourceSpec],
) -> Result<Vec<RunMatrix<F>>> {
    config.validate()?;
    if specs.is_empty() {
        return Err(Error::Config("experiment needs at least one source".into()));
    }
    let mut labels: Vec<String> = Vec::new();
    let mut matrices = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut source = RngSource::from_spec(spec, config.base_seed)?;
        let mut label = source.label().to_string();
        let duplicates = labels.iter().filter(|l| **l == label).count();
        labels.push(label.clone());
        if duplicates > 0 {
            label = format!("{label}#{}", duplicates + 1);
        }
        let mut rows = Vec::with_capacity(config.runs);
        for run in 0..config.runs {
            rows.push(train_toy_network(config, &mut source, run)?);
        }
        matrices.push(RunMatrix::from_rows(label, rows)?);
    }
    Ok(matrices)
}
