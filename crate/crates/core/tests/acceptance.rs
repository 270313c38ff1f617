//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `cargo test --test acceptance -- --nocapture` to
//! see them). Criteria with stated runtime budgets enforce them with a
//! wall clock.

use std::time::Instant;

use bitbias::bitfile::{write_bitfile, BitFileFormat};
use bitbias::bitstream::{
    accumulate_stats, generate_bits, BitStream, QubitBiasProfile, StreamLayout,
};
use bitbias::compare::{
    compare_sources, holm_bonferroni, pearson_epoch_correlation, welch_t_test, RunMatrix,
};
use bitbias::integers::{
    bin_assign, max_value, popcount_count_below, theoretical_histogram, IntegerAccumulator,
};
use bitbias::stats::{
    chi_squared_uniform_bits, hellinger_to_uniform, monobit_from_counts, per_qubit_runs_from_stats,
    runs_test_from_counts,
};
use bitbias::toytrain::{run_experiment, ExperimentConfig, MlpNetwork, RngSource, SourceSpec};

fn pass(n: u32, what: &str) {
    println!("ACCEPTANCE {n} {what}: PASS");
}

/// Brute-force the model populations by enumerating every C-bit integer.
fn brute_force_populations(p: f64, word_bits: u32, num_bins: usize, total: u64) -> Vec<f64> {
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
fn criterion_1_exhaustive_oracle_equivalence() {
    let start = Instant::now();
    for &c in &[4u32, 8, 12] {
        // popcount DP vs running exhaustive prefix counts, all (x, w)
        let mut running = vec![0u64; c as usize + 1];
        for x in 0..=(1u128 << c) {
            for w in 0..=c {
                assert_eq!(
                    popcount_count_below(x, w, c).unwrap(),
                    running[w as usize],
                    "C={c}, x={x}, w={w}"
                );
            }
            if x < (1u128 << c) {
                running[(x as u64).count_ones() as usize] += 1;
            }
        }
        for &k in &[1usize, 4, 250] {
            for pi in 0..=10 {
                let p = pi as f64 / 10.0;
                let model = theoretical_histogram::<f64>(p, c, k, 1_000_000).unwrap();
                let brute = brute_force_populations(p, c, k, 1_000_000);
                for (bin, (&got, &want)) in model.counts().iter().zip(&brute).enumerate() {
                    let err = if want == 0.0 {
                        got.abs()
                    } else {
                        ((got - want) / want).abs()
                    };
                    assert!(
                        err < 1e-9,
                        "C={c} K={k} p={p} bin {}: {got} vs {want}",
                        bin + 1
                    );
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "oracle sweep took {elapsed:?}"
    );
    pass(1, "exhaustive oracle equivalence");
}

/// The biased desk-scale stream shared by criteria 2 and 3:
/// p(0) = 0.5112 over 65 qubits, M just above 3e7 bits.
fn desk_scale_biased_stream() -> BitStream {
    // 65 * 8192 * 57 = 30,351,360 bits
    let layout = StreamLayout::new(65, 8192, 57).unwrap();
    assert!(layout.total_bits() >= 30_000_000);
    let profile = QubitBiasProfile::uniform(0.5112f64, 65).unwrap();
    generate_bits(&profile, &layout, 20210305).unwrap()
}

#[test]
fn criterion_2_bias_reproduction_chi_squared_rejects() {
    let start = Instant::now();
    let stream = desk_scale_biased_stream();
    let stats = accumulate_stats(&stream, 65);
    let chi =
        chi_squared_uniform_bits::<f64>(stats.total_zeros(), stats.total_ones(), 0.05).unwrap();
    assert!(
        chi.p_value < 1e-4,
        "chi-squared p {} fails to reject",
        chi.p_value
    );
    assert_eq!(chi.confidence_level(), 1.0);

    // the frequency test rejects the same bias
    let mono = monobit_from_counts::<f64>(stats.total_zeros(), stats.total_ones(), 0.05).unwrap();
    assert!(!mono.passed, "monobit p {}", mono.p_value);

    // independence holds even though the bits are biased: the per-qubit
    // runs failures stay near alpha * N
    let runs = per_qubit_runs_from_stats::<f64>(&stats, 0.05);
    let failures = runs.per_qubit.iter().filter(|r| !r.passed).count();
    assert!(failures <= 10, "runs failures {failures} of 65");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "criterion 2 took {elapsed:?}");
    pass(2, "bias reproduction (chi-squared rejects uniformity)");
}

#[test]
fn criterion_3_integer_distance_matches_model() {
    let start = Instant::now();
    let stream = desk_scale_biased_stream();
    let mut acc = IntegerAccumulator::new(32, 250).unwrap();
    stream.for_each_bit(|b| acc.push_bit(b));
    let measured = acc.finish::<f64>();
    assert!(measured.total() >= 930_000.0, "L = {}", measured.total());

    let theory =
        theoretical_histogram::<f64>(1.0 - 0.5112, 32, 250, measured.total() as u64).unwrap();
    let h_theory = hellinger_to_uniform(&theory).unwrap();
    // cross-check of the in-repo model evaluation against an independent
    // high-precision computation of the same quantity
    assert!(
        (h_theory - 0.0207823675).abs() < 1e-7,
        "model distance {h_theory}"
    );

    let h_measured = hellinger_to_uniform(&measured).unwrap();
    assert!(
        (h_measured - h_theory).abs() <= 0.15 * h_theory,
        "measured {h_measured} vs model {h_theory} beyond 15%"
    );

    // the measured histogram also converges to the model itself
    let h_to_model = bitbias::stats::hellinger(
        &bitbias::stats::DiscreteDistribution::from_counts(measured.counts()).unwrap(),
        &bitbias::stats::DiscreteDistribution::from_counts(theory.counts()).unwrap(),
    )
    .unwrap();
    assert!(h_to_model < 0.01, "measured-vs-model distance {h_to_model}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 3 took {elapsed:?}");
    pass(3, "integer-distribution distance within 15% of the model");
}

/// Optional full-scale rerun of criterion 3 at the complete job size;
/// slow, so opt-in via `--ignored`.
#[test]
#[ignore = "full-scale run, several hundred megabits"]
fn criterion_3_full_scale_distance_brackets_reference() {
    let layout = StreamLayout::new(65, 8192, 564).unwrap();
    let profile = QubitBiasProfile::uniform(0.5112f64, 65).unwrap();
    let stream = generate_bits(&profile, &layout, 20210305).unwrap();
    let mut acc = IntegerAccumulator::new(32, 250).unwrap();
    stream.for_each_bit(|b| acc.push_bit(b));
    let h = hellinger_to_uniform(&acc.finish::<f64>()).unwrap();
    assert!(
        (0.018..=0.025).contains(&h),
        "full-scale distance {h} outside [0.018, 0.025]"
    );
    pass(3, "full-scale integer distance inside [0.018, 0.025]");
}

#[test]
fn criterion_4_unbiased_control_is_near_uniform() {
    // "equal length" reads as the full job size: only there does the
    // sampling noise floor sit meaningfully below the 0.004 bound the
    // unbiased reference is held to.
    let layout = StreamLayout::new(65, 8192, 564).unwrap();
    let profile = QubitBiasProfile::uniform(0.5f64, 65).unwrap();
    let stream = generate_bits(&profile, &layout, 424242).unwrap();
    let mut acc = IntegerAccumulator::new(32, 250).unwrap();
    stream.for_each_bit(|b| acc.push_bit(b));
    let measured = acc.finish::<f64>();
    let h = hellinger_to_uniform(&measured).unwrap();
    assert!(h < 0.004, "unbiased control distance {h}");
    pass(4, "unbiased control close to uniform");
}

#[test]
fn criterion_5_test_battery_calibration() {
    let layout = StreamLayout::new(1, 100_000, 1).unwrap();
    let profile = QubitBiasProfile::uniform(0.5f64, 1).unwrap();
    let trials = 200;
    let mut rejects = [0u32; 3];
    for t in 0..trials {
        let stream = generate_bits(&profile, &layout, 90_000 + t).unwrap();
        let stats = accumulate_stats(&stream, 1);
        let chi =
            chi_squared_uniform_bits::<f64>(stats.total_zeros(), stats.total_ones(), 0.05).unwrap();
        let runs = runs_test_from_counts::<f64>(
            stats.total_runs(),
            stats.total_zeros(),
            stats.total_ones(),
            0.05,
        )
        .unwrap();
        let mono =
            monobit_from_counts::<f64>(stats.total_zeros(), stats.total_ones(), 0.05).unwrap();
        for (slot, result) in rejects.iter_mut().zip([&chi, &runs, &mono]) {
            if !result.passed {
                *slot += 1;
            }
        }
    }
    for (name, r) in ["chi_squared", "runs", "monobit"].iter().zip(rejects) {
        let rate = r as f64 / trials as f64;
        assert!(
            (0.02..=0.08).contains(&rate),
            "{name} rejection rate {rate} outside alpha +- 0.03"
        );
    }

    // adversarial inputs must be rejected overwhelmingly
    let alternating: Vec<bool> = (0..100_000).map(|i| i % 2 == 1).collect();
    let stream = BitStream::from_bits(&alternating, None).unwrap();
    let stats = accumulate_stats(&stream, 1);
    let runs = runs_test_from_counts::<f64>(
        stats.total_runs(),
        stats.total_zeros(),
        stats.total_ones(),
        0.05,
    )
    .unwrap();
    assert!(runs.p_value < 1e-6, "alternating stream p {}", runs.p_value);

    let mut block = vec![false; 50_000];
    block.extend(vec![true; 50_000]);
    let stream = BitStream::from_bits(&block, None).unwrap();
    let stats = accumulate_stats(&stream, 1);
    let runs = runs_test_from_counts::<f64>(
        stats.total_runs(),
        stats.total_zeros(),
        stats.total_ones(),
        0.05,
    )
    .unwrap();
    assert!(
        runs.p_value < 1e-6,
        "constant-block stream p {}",
        runs.p_value
    );

    pass(5, "test-battery calibration and adversarial rejection");
}

/// Multiplicative-congruential stream reproducing, bit for bit, the
/// fixture inputs whose Welch p-values were frozen from an independent
/// reference implementation.
struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / 9007199254740992.0
    }
}

const WELCH_REFERENCE_P: [f64; 20] = [
    0.8204393384638111,
    0.8691378875889337,
    0.6373939144495753,
    0.8234771748177108,
    0.24054837741327012,
    0.8815167609237125,
    0.8535421941443136,
    0.8291934545059576,
    0.12003078285911935,
    0.1576265048242838,
    0.7497030833179439,
    0.4891525853754273,
    0.10726881547258525,
    0.5003255024945614,
    0.1529300823841635,
    0.9097465589727127,
    0.00530151107298116,
    0.0007389558992975806,
    0.00877893218585585,
    0.016582945718385558,
];

#[test]
fn criterion_6_comparison_machinery_oracles() {
    for (k, &want) in WELCH_REFERENCE_P.iter().enumerate() {
        let mut g = Lcg(0x9E3779B97F4A7C15 ^ (k as u64).wrapping_mul(0x100000001B3));
        let nx = 5 + (k % 7) * 3;
        let ny = 6 + (k % 5) * 4;
        let shift = 0.02 * k as f64;
        let scale = 1.0 + 0.1 * (k % 4) as f64;
        let x: Vec<f64> = (0..nx).map(|_| g.next_f64() * scale).collect();
        let y: Vec<f64> = (0..ny).map(|_| g.next_f64() + shift).collect();
        let p = welch_t_test(&x, &y).unwrap();
        assert!(
            (p - want).abs() < 1e-6,
            "pair {k}: p {p} vs reference {want}"
        );
    }

    // Holm adjustment against hand-computed fixtures
    let adj = holm_bonferroni(&[0.01f64, 0.04, 0.03]).unwrap();
    assert!((adj[0] - 0.03).abs() < 1e-15);
    assert!((adj[1] - 0.06).abs() < 1e-15);
    assert!((adj[2] - 0.06).abs() < 1e-15);
    let adj = holm_bonferroni(&[0.02f64, 0.02]).unwrap();
    assert_eq!(adj, vec![0.04, 0.04]);

    // Pearson self-correlation and affine invariance
    let x = RunMatrix::<f64>::from_rows(
        "x",
        vec![vec![0.2, 0.5, 0.7, 0.9], vec![0.25, 0.45, 0.75, 0.85]],
    )
    .unwrap();
    assert!((pearson_epoch_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-12);
    let y = RunMatrix::from_rows(
        "y",
        vec![
            vec![
                0.2 * 3.0 + 1.0,
                0.5 * 3.0 + 1.0,
                0.7 * 3.0 + 1.0,
                0.9 * 3.0 + 1.0,
            ],
            vec![
                0.25 * 3.0 + 1.0,
                0.45 * 3.0 + 1.0,
                0.75 * 3.0 + 1.0,
                0.85 * 3.0 + 1.0,
            ],
        ],
    )
    .unwrap();
    assert!((pearson_epoch_correlation(&x, &y).unwrap() - 1.0).abs() < 1e-12);

    pass(6, "comparison machinery matches independent references");
}

/// Generate an unbiased in-repo file source holding exactly the integers
/// an experiment consumes.
fn write_file_source(dir: &std::path::Path, name: &str, seed: u64, bits: usize) -> SourceSpec {
    let layout = StreamLayout::new(1, bits, 1).unwrap();
    let profile = QubitBiasProfile::uniform(0.5f64, 1).unwrap();
    let stream = generate_bits(&profile, &layout, seed).unwrap();
    let path = dir.join(name);
    write_bitfile(&stream, &path, BitFileFormat::Packed).unwrap();
    SourceSpec::FileSequence { path }
}

#[test]
fn criterion_7_end_to_end_experiment() {
    let start = Instant::now();
    let config = ExperimentConfig::<f64>::default();
    assert_eq!((config.runs, config.epochs), (31, 20));

    // (a) gradient correctness through the public surface
    let mut src = RngSource::from_spec(&SourceSpec::PrngUnbiased, 2718).unwrap();
    let net = MlpNetwork::<f64>::init_from_source(config.hidden_width, &mut src).unwrap();
    let data = bitbias::toytrain::make_run_data(&config, 0).0;
    let batch = &data[..16];
    let analytic = net.grad_on(batch);
    let params = net.params();
    let eps = 1e-6;
    for i in 0..params.len() {
        let mut plus = net.clone();
        let mut minus = net.clone();
        let mut p = params.clone();
        p[i] += eps;
        plus.set_params(&p);
        p[i] -= 2.0 * eps;
        minus.set_params(&p);
        let numeric = (plus.loss_on(batch) - minus.loss_on(batch)) / (2.0 * eps);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-4);
        assert!(
            ((analytic[i] - numeric) / denom).abs() < 1e-5,
            "gradient mismatch at parameter {i}"
        );
    }

    let dir = tempfile::tempdir().unwrap();
    let needed_bits = (config.runs as u64 * config.params_per_run() * 32) as usize;
    let file_a = write_file_source(dir.path(), "source_a.bits", 1111, needed_bits);
    let file_b = write_file_source(dir.path(), "source_b.bits", 2222, needed_bits);
    let sources = vec![
        SourceSpec::PrngUnbiased,
        SourceSpec::PrngBiased { zero_prob: 0.5112 },
        file_a,
        file_b,
    ];

    let matrices = run_experiment(&config, &sources).unwrap();
    assert_eq!(matrices.len(), 4);
    let report = compare_sources(&matrices, config.alpha).unwrap();
    assert_eq!(report.pairs.len(), 6, "expected 6 pairwise rows");
    assert!(
        report.overall_verdict,
        "verdict false: {:?}",
        report
            .pairs
            .iter()
            .map(|p| (p.label_x.clone(), p.label_y.clone(), p.min_adjusted_p))
            .collect::<Vec<_>>()
    );
    for pair in &report.pairs {
        assert!(
            pair.pearson_rho > 0.95,
            "{} vs {}: rho {}",
            pair.label_x,
            pair.label_y,
            pair.pearson_rho
        );
    }

    // (b) bit-for-bit determinism across reruns
    let matrices_again = run_experiment(&config, &sources).unwrap();
    for (a, b) in matrices.iter().zip(&matrices_again) {
        assert_eq!(a, b, "rerun diverged for source {}", a.label());
    }

    // (c) verdict stability across auxiliary seeds
    let mut verdicts_true = 0;
    for base_seed in 1..=5u64 {
        let cfg = ExperimentConfig::<f64> {
            base_seed,
            ..ExperimentConfig::default()
        };
        let ms = run_experiment(&cfg, &sources).unwrap();
        let rep = compare_sources(&ms, cfg.alpha).unwrap();
        if rep.overall_verdict {
            verdicts_true += 1;
        }
    }
    assert!(
        verdicts_true >= 4,
        "verdict held for only {verdicts_true} of 5 auxiliary seeds"
    );

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "criterion 7 took {elapsed:?}"
    );
    pass(
        7,
        "end-to-end experiment (verdict, correlation, determinism, stability)",
    );
}

#[test]
fn criterion_8_generator_determinism_and_throughput() {
    let layout = StreamLayout::new(65, 8192, 38).unwrap(); // 20,234,240 bits
    let profile = QubitBiasProfile::uniform(0.5112f64, 65).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let start = Instant::now();
    let stream = generate_bits(&profile, &layout, 7).unwrap();
    let path_a = dir.path().join("a.bits");
    write_bitfile(&stream, &path_a, BitFileFormat::Packed).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let rate = layout.total_bits() as f64 / elapsed;
    assert!(
        rate >= 1e7,
        "generation+packing rate {rate:.3e} bits/s below 1e7"
    );

    let stream_again = generate_bits(&profile, &layout, 7).unwrap();
    let path_b = dir.path().join("b.bits");
    write_bitfile(&stream_again, &path_b, BitFileFormat::Packed).unwrap();
    let bytes_a = std::fs::read(&path_a).unwrap();
    let bytes_b = std::fs::read(&path_b).unwrap();
    assert_eq!(
        bytes_a, bytes_b,
        "identical seeds must give identical files"
    );

    pass(8, "generator determinism and throughput");
}
