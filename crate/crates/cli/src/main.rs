//! Command-line pipeline: generate bit streams, analyze bit- and
//! integer-level statistics, evaluate the theoretical bin-population
//! model, and run RNG-source comparison experiments.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4
//! statistical-degeneracy error. Set `RUST_LOG=info` for progress
//! logging.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use bitbias::bitfile::{
    read_sidecar, write_bitfile_with_meta, BitChunkReader, BitFileFormat, BitFileMeta,
};
use bitbias::bitstream::{BitStreamStats, StreamLayout};
use bitbias::compare::compare_sources;
use bitbias::integers::{theoretical_histogram, write_histogram_csv, IntegerAccumulator};
use bitbias::stats::{
    chi_squared_uniform_bits, hellinger, monobit_from_counts, per_qubit_runs_from_stats,
    qubit_hellinger_summary, DiscreteDistribution,
};
use bitbias::toytrain::{parse_experiment_config, run_experiment, SourceSpec};
use bitbias::{defaults, generate_bits, Error, ErrorCategory, QubitBiasProfile, Result};

#[derive(Parser)]
#[command(
    name = "bitbias",
    version,
    about = "Bit-stream bias modeling and RNG comparison"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Bernoulli bit stream and write it to disk.
    Generate(GenerateArgs),
    /// Per-qubit bit probabilities, chi-squared, runs tests, Hellinger summary.
    AnalyzeBits(AnalyzeBitsArgs),
    /// Histogram the stream's C-bit integers, optionally against the model.
    AnalyzeInts(AnalyzeIntsArgs),
    /// Theoretical bin populations of the Bernoulli-process model.
    Theory(TheoryArgs),
    /// Train the toy network under several RNG sources and compare them.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of qubits N.
    #[arg(long, default_value_t = defaults::NUM_QUBITS)]
    qubits: usize,
    /// Shots per experiment S.
    #[arg(long, default_value_t = defaults::SHOTS_PER_EXPERIMENT)]
    shots: usize,
    /// Number of experiments R.
    #[arg(long, default_value_t = defaults::NUM_EXPERIMENTS)]
    experiments: usize,
    /// Zero-bit probability: a scalar, or a path to a per-qubit profile
    /// file (one probability per line).
    #[arg(long, default_value = "0.5")]
    bias: String,
    /// Generator seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output path; a `<out>.meta` sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// File encoding.
    #[arg(long, default_value = "packed")]
    format: String,
}

#[derive(Args)]
struct AnalyzeBitsArgs {
    /// Input bit file.
    #[arg(long = "in")]
    input: PathBuf,
    /// File encoding.
    #[arg(long, default_value = "packed")]
    format: String,
    /// Qubit count override when the sidecar carries no layout.
    #[arg(long)]
    qubits: Option<usize>,
    /// Shots per experiment (with --qubits/--experiments, declares the
    /// layout of a file that has no sidecar).
    #[arg(long)]
    shots: Option<usize>,
    /// Number of experiments.
    #[arg(long)]
    experiments: Option<usize>,
    /// Significance level.
    #[arg(long, default_value_t = defaults::ALPHA)]
    alpha: f64,
    /// Write the per-qubit table (probabilities, runs tests) as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the full test battery as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeIntsArgs {
    /// Input bit file.
    #[arg(long = "in")]
    input: PathBuf,
    /// File encoding.
    #[arg(long, default_value = "packed")]
    format: String,
    /// Number of histogram bins K.
    #[arg(long, default_value_t = defaults::NUM_BINS)]
    bins: usize,
    /// Word size C in bits.
    #[arg(long, default_value_t = defaults::WORD_BITS)]
    word_bits: u32,
    /// Overlay the theoretical model at this one-bit success probability.
    #[arg(long)]
    theory: Option<f64>,
    /// Histogram CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Layout declaration for packed files without a sidecar.
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    experiments: Option<usize>,
}

#[derive(Args)]
struct TheoryArgs {
    /// One-bit success probability p.
    #[arg(long)]
    p: f64,
    /// Word size C in bits.
    #[arg(long, default_value_t = defaults::WORD_BITS)]
    word_bits: u32,
    /// Number of histogram bins K.
    #[arg(long, default_value_t = defaults::NUM_BINS)]
    bins: usize,
    /// Total population L to distribute over the bins.
    #[arg(long)]
    total: u64,
    /// Histogram CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated source specs, overriding the config file
    /// (`unbiased`, `biased=<p0>`, `file=<path>`).
    #[arg(long)]
    sources: Option<String>,
    /// Output directory for run matrices and the comparison report.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::AnalyzeBits(args) => cmd_analyze_bits(args),
        Command::AnalyzeInts(args) => cmd_analyze_ints(args),
        Command::Theory(args) => cmd_theory(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        let code = match e.category() {
            ErrorCategory::Usage => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Degeneracy => 4,
        };
        std::process::exit(code);
    }
}

fn parse_format(s: &str) -> Result<BitFileFormat> {
    s.parse()
}

fn parse_bias(spec: &str, num_qubits: usize) -> Result<QubitBiasProfile> {
    if let Ok(p) = spec.parse::<f64>() {
        return QubitBiasProfile::uniform(p, num_qubits);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| {
        Error::Config(format!(
            "bias '{spec}' is neither a number nor a readable file: {e}"
        ))
    })?;
    let mut probs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        // accept bare values or trailing columns like "index,p"
        let field = line.rsplit(',').next().unwrap().trim();
        let p: f64 = field
            .parse()
            .map_err(|_| Error::Config(format!("invalid probability '{field}' in {spec}")))?;
        probs.push(p);
    }
    if probs.len() != num_qubits {
        return Err(Error::Layout(format!(
            "profile file holds {} probabilities but the layout declares {} qubits",
            probs.len(),
            num_qubits
        )));
    }
    QubitBiasProfile::from_zero_probs(probs)
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let format = parse_format(&args.format)?;
    let layout = StreamLayout::new(args.qubits, args.shots, args.experiments)?;
    let profile = parse_bias(&args.bias, args.qubits)?;
    info!("generating {} bits", layout.total_bits());
    let stream = generate_bits(&profile, &layout, args.seed)?;
    let meta = BitFileMeta {
        total_bits: stream.len() as u64,
        layout: Some(layout),
        generator: Some(format!("bernoulli bias={} seed={}", args.bias, args.seed)),
        seed: Some(args.seed),
    };
    write_bitfile_with_meta(&stream, &args.out, format, meta)?;
    println!("{}", stream.len());
    Ok(())
}

/// Resolve the declared bit count and qubit count for a streamed file
/// from its sidecar and/or explicit layout flags.
fn resolve_stream_geometry(
    path: &Path,
    format: BitFileFormat,
    qubits: Option<usize>,
    shots: Option<usize>,
    experiments: Option<usize>,
) -> Result<(Option<u64>, Option<usize>)> {
    if !path.exists() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("input file '{}' not found", path.display()),
        )));
    }
    if let (Some(n), Some(s), Some(r)) = (qubits, shots, experiments) {
        let layout = StreamLayout::new(n, s, r)?;
        return Ok((Some(layout.total_bits()), Some(n)));
    }
    let sidecar = read_sidecar(path)?;
    let declared = sidecar.as_ref().map(|m| m.total_bits);
    let n = qubits.or_else(|| {
        sidecar
            .as_ref()
            .and_then(|m| m.layout.map(|l| l.num_qubits))
    });
    match (declared, format) {
        (None, BitFileFormat::Packed) => Err(Error::Config(format!(
            "packed file '{}' has no sidecar; declare the layout via --qubits/--shots/--experiments",
            path.display()
        ))),
        (d, _) => Ok((d, n)),
    }
}

#[derive(Serialize)]
struct BitsReport {
    total_bits: u64,
    num_qubits: usize,
    aggregate_zero_prob: f64,
    aggregate_zero_prob_std: f64,
    qubit_hellinger_mean: f64,
    qubit_hellinger_std: f64,
    chi_squared: bitbias::TestResult,
    whole_stream_runs: bitbias::TestResult,
    /// Absent when the stream is below the test's 100-bit minimum.
    monobit: Option<bitbias::TestResult>,
    per_qubit_runs: Vec<bitbias::TestResult>,
    failed_runs_qubits: Vec<usize>,
}

fn cmd_analyze_bits(args: AnalyzeBitsArgs) -> Result<()> {
    let format = parse_format(&args.format)?;
    let (declared, num_qubits) = resolve_stream_geometry(
        &args.input,
        format,
        args.qubits,
        args.shots,
        args.experiments,
    )?;
    let num_qubits = num_qubits.ok_or_else(|| {
        Error::Config("qubit count unknown: no sidecar layout and no --qubits flag".into())
    })?;

    let mut stats = BitStreamStats::new(num_qubits);
    let mut reader = BitChunkReader::open(&args.input, format, declared)?;
    while let Some((bytes, nbits)) = reader.next_chunk()? {
        stats.push_packed(bytes, nbits);
    }
    info!(
        "analyzed {} bits over {} qubits",
        stats.total_bits(),
        num_qubits
    );

    let report = stats.probability_report::<f64>()?;
    let (h_mean, h_std) = qubit_hellinger_summary(&report)?;
    let chi = chi_squared_uniform_bits(stats.total_zeros(), stats.total_ones(), args.alpha)?;
    let runs = per_qubit_runs_from_stats(&stats, args.alpha);
    let monobit = if stats.total_bits() >= 100 {
        Some(monobit_from_counts(
            stats.total_zeros(),
            stats.total_ones(),
            args.alpha,
        )?)
    } else {
        None
    };

    let failed: Vec<usize> = runs
        .per_qubit
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.passed)
        .map(|(n, _)| n)
        .collect();

    println!("total bits        {}", stats.total_bits());
    println!("qubits            {num_qubits}");
    println!(
        "p(0) aggregate    {:.6} +- {:.6}",
        report.aggregate_mean, report.aggregate_std
    );
    println!("qubit Hellinger   {h_mean:.6} +- {h_std:.6}");
    println!(
        "chi-squared       statistic {:.6}, p {:.6e}, reject uniform: {} (confidence {:.4})",
        chi.statistic,
        chi.p_value,
        !chi.passed,
        chi.confidence_level()
    );
    println!(
        "runs (stream)     z {:.6}, p {:.6e}, passed: {}{}",
        runs.whole_stream.statistic,
        runs.whole_stream.p_value,
        runs.whole_stream.passed,
        if runs.whole_stream.flags.is_empty() {
            String::new()
        } else {
            format!(" {:?}", runs.whole_stream.flags)
        }
    );
    match &monobit {
        Some(m) => println!(
            "monobit           statistic {:.6}, p {:.6e}, passed: {}",
            m.statistic, m.p_value, m.passed
        ),
        None => println!("monobit           skipped (needs at least 100 bits)"),
    }
    println!(
        "runs per qubit    {}/{} fail at alpha {}: {:?}",
        failed.len(),
        num_qubits,
        args.alpha,
        failed
    );

    if let Some(csv_path) = &args.csv {
        let mut out = BufWriter::new(File::create(csv_path)?);
        writeln!(
            out,
            "n,zero_count,samples,p0,p1,hellinger_uniform,runs_statistic,runs_p,runs_passed,flags"
        )?;
        let uniform = DiscreteDistribution::bernoulli(0.5)?;
        for n in 0..num_qubits {
            let p0 = report.per_qubit[n];
            let q = DiscreteDistribution::bernoulli(p0)?;
            let h = hellinger(&q, &uniform)?;
            let r = &runs.per_qubit[n];
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                n,
                stats.zeros_for_qubit(n),
                stats.bits_for_qubit(n),
                fmt(p0),
                fmt(1.0 - p0),
                fmt(h),
                fmt(r.statistic),
                fmt(r.p_value),
                r.passed,
                flags_str(&r.flags)
            )?;
        }
    }

    if let Some(json_path) = &args.json {
        let payload = BitsReport {
            total_bits: stats.total_bits(),
            num_qubits,
            aggregate_zero_prob: report.aggregate_mean,
            aggregate_zero_prob_std: report.aggregate_std,
            qubit_hellinger_mean: h_mean,
            qubit_hellinger_std: h_std,
            chi_squared: chi,
            whole_stream_runs: runs.whole_stream,
            monobit,
            per_qubit_runs: runs.per_qubit,
            failed_runs_qubits: failed,
        };
        serde_json::to_writer_pretty(BufWriter::new(File::create(json_path)?), &payload)
            .map_err(|e| Error::Config(format!("json serialization failed: {e}")))?;
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    bitbias::integers::fmt_real(x)
}

fn flags_str(flags: &[bitbias::stats::TestFlag]) -> String {
    flags
        .iter()
        .map(|f| format!("{f:?}").to_lowercase())
        .collect::<Vec<_>>()
        .join("|")
}

fn cmd_analyze_ints(args: AnalyzeIntsArgs) -> Result<()> {
    let format = parse_format(&args.format)?;
    let (declared, _) = resolve_stream_geometry(
        &args.input,
        format,
        args.qubits,
        args.shots,
        args.experiments,
    )?;
    let mut acc = IntegerAccumulator::new(args.word_bits, args.bins)?;
    let mut reader = BitChunkReader::open(&args.input, format, declared)?;
    while let Some((bytes, nbits)) = reader.next_chunk()? {
        acc.push_packed(bytes, nbits);
    }
    let measured = acc.finish::<f64>();
    if measured.total() == 0.0 {
        return Err(Error::Length(format!(
            "input holds no complete {}-bit word",
            args.word_bits
        )));
    }
    let h_uniform = bitbias::stats::hellinger_to_uniform(&measured)?;
    let theory = match args.theory {
        Some(p) => Some(theoretical_histogram::<f64>(
            p,
            args.word_bits,
            args.bins,
            measured.total() as u64,
        )?),
        None => None,
    };

    let mut summary = format!(
        "integers {}  bins {}  H(measured, uniform) {:.6}",
        measured.total(),
        args.bins,
        h_uniform
    );
    if let Some(t) = &theory {
        let h_model = hellinger(
            &DiscreteDistribution::from_counts(measured.counts())?,
            &DiscreteDistribution::from_counts(t.counts())?,
        )?;
        let h_model_uniform = bitbias::stats::hellinger_to_uniform(t)?;
        summary.push_str(&format!(
            "  H(theory, uniform) {h_model_uniform:.6}  H(measured, theory) {h_model:.6}"
        ));
    }

    match &args.out {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            write_histogram_csv(&mut out, &measured, theory.as_ref())?;
            println!("{summary}");
        }
        None => {
            eprintln!("{summary}");
            let mut out = std::io::stdout().lock();
            write_histogram_csv(&mut out, &measured, theory.as_ref())?;
        }
    }
    Ok(())
}

fn cmd_theory(args: TheoryArgs) -> Result<()> {
    let hist = theoretical_histogram::<f64>(args.p, args.word_bits, args.bins, args.total)?;
    let sum: f64 = hist.counts().iter().sum();
    let h = bitbias::stats::hellinger_to_uniform(&hist)?;
    let summary = format!(
        "sum {}  declared total {}  H(theory, uniform) {:.6}",
        sum, args.total, h
    );
    match &args.out {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            write_histogram_csv(&mut out, &hist, None)?;
            println!("{summary}");
        }
        None => {
            eprintln!("{summary}");
            let mut out = std::io::stdout().lock();
            write_histogram_csv(&mut out, &hist, None)?;
        }
    }
    Ok(())
}

fn sanitize_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let (config, mut sources) = parse_experiment_config::<f64>(&text)?;
    if let Some(cli_sources) = &args.sources {
        sources = cli_sources
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(SourceSpec::parse)
            .collect::<Result<_>>()?;
    }
    if sources.len() < 2 {
        return Err(Error::Config(
            "experiment needs at least two sources (config 'sources = ...' or --sources)".into(),
        ));
    }
    std::fs::create_dir_all(&args.out)?;

    info!(
        "running {} sources x {} runs x {} epochs",
        sources.len(),
        config.runs,
        config.epochs
    );
    let matrices = run_experiment(&config, &sources)?;
    for m in &matrices {
        let path = args
            .out
            .join(format!("runs_{}.csv", sanitize_label(m.label())));
        let mut out = BufWriter::new(File::create(path)?);
        m.write_csv(&mut out)?;
    }

    let report = compare_sources(&matrices, config.alpha)?;
    let mut csv = BufWriter::new(File::create(args.out.join("comparison.csv"))?);
    report.write_csv(&mut csv)?;
    serde_json::to_writer_pretty(
        BufWriter::new(File::create(args.out.join("comparison.json"))?),
        &report,
    )
    .map_err(|e| Error::Config(format!("json serialization failed: {e}")))?;

    for pair in &report.pairs {
        println!(
            "{} vs {}: min adjusted p {:.4}, rho {:.4}, no significant difference: {}",
            pair.label_x, pair.label_y, pair.min_adjusted_p, pair.pearson_rho, pair.verdict
        );
    }
    println!(
        "overall verdict (min adjusted p > {}): {}",
        config.alpha, report.overall_verdict
    );
    Ok(())
}
