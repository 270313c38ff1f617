//! Bit-level bias modeling and validation for random number generators,
//! plus a desk-scale harness measuring how an RNG source affects neural
//! network weight initialization.
//!
//! The pipeline mirrors a hardware random number generator organized as
//! shots over qubits: per-qubit Bernoulli bit streams are generated or
//! ingested ([`bitstream`], [`bitfile`]), converted to C-bit integers and
//! binned ([`integers`]), screened with distance and randomness tests
//! ([`stats`]), and finally fed as initializers into small training runs
//! whose outcomes are compared across sources ([`compare`], [`toytrain`]).
//!
//! All floating-point math is generic over [`num::Real`] (`f32` or
//! `f64`); the aliases at the crate root fix the default `f64` scalar.

pub mod bitfile;
pub mod bitstream;
pub mod compare;
pub mod error;
pub mod integers;
pub mod num;
pub mod special;
pub mod stats;
pub mod toytrain;

pub use bitfile::{parse_bitfile, parse_bitfile_with_layout, write_bitfile, BitFileFormat};
pub use bitstream::{generate_bits, qubit_stream, BitStream, StreamLayout};
pub use error::{Error, ErrorCategory, Result};
pub use integers::{bin_assign, bits_to_integers, popcount_count_below, IntegerSequence};
pub use num::Real;
pub use stats::{hellinger, DEFAULT_ALPHA};
pub use toytrain::{run_experiment, train_toy_network, RngSource, SourceSpec};

/// Default scalar for the concrete aliases below.
pub type Scalar = f64;

pub type QubitBiasProfile = bitstream::QubitBiasProfile<Scalar>;
pub type BitProbabilityReport = bitstream::BitProbabilityReport<Scalar>;
pub type IntegerHistogram = integers::IntegerHistogram<Scalar>;
pub type DiscreteDistribution = stats::DiscreteDistribution<Scalar>;
pub type TestResult = stats::TestResult<Scalar>;
pub type PerQubitRuns = stats::PerQubitRuns<Scalar>;
pub type RunMatrix = compare::RunMatrix<Scalar>;
pub type PairComparison = compare::PairComparison<Scalar>;
pub type ComparisonReport = compare::ComparisonReport<Scalar>;
pub type ExperimentConfig = toytrain::ExperimentConfig<Scalar>;
pub type MlpNetwork = toytrain::MlpNetwork<Scalar>;

/// Pipeline defaults: 65 qubits, 8192 shots per experiment, 564
/// experiments, 32-bit words, 250 bins, significance 0.05.
pub mod defaults {
    pub const NUM_QUBITS: usize = 65;
    pub const SHOTS_PER_EXPERIMENT: usize = 8192;
    pub const NUM_EXPERIMENTS: usize = 564;
    pub const WORD_BITS: u32 = 32;
    pub const NUM_BINS: usize = 250;
    pub const ALPHA: f64 = 0.05;
}
