//! Statistical comparison of run-by-epoch result matrices across RNG
//! sources: Welch's unequal-variance t-test per epoch, Holm-Bonferroni
//! adjustment across epochs, the minimum-adjusted-p criterion, and
//! Pearson correlation of the epoch-mean curves.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integers::fmt_real;
use crate::num::{real, Real};
use crate::special::student_t_two_tailed;

/// Performance metric of `runs` independent trainings over `epochs`
/// epochs, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMatrix<F: Real> {
    label: String,
    runs: usize,
    epochs: usize,
    values: Vec<F>,
}

impl<F: Real> RunMatrix<F> {
    pub fn from_rows(label: impl Into<String>, rows: Vec<Vec<F>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Shape("a run matrix needs at least 2 runs".into()));
        }
        let epochs = rows[0].len();
        if epochs == 0 {
            return Err(Error::Shape("a run matrix needs at least 1 epoch".into()));
        }
        if rows.iter().any(|r| r.len() != epochs) {
            return Err(Error::Shape(
                "run matrix rows must have equal length".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            runs: rows.len(),
            epochs,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn get(&self, run: usize, epoch: usize) -> F {
        self.values[run * self.epochs + epoch]
    }

    pub fn row(&self, run: usize) -> &[F] {
        &self.values[run * self.epochs..(run + 1) * self.epochs]
    }

    /// All runs' values at one epoch.
    pub fn column(&self, epoch: usize) -> Vec<F> {
        (0..self.runs).map(|r| self.get(r, epoch)).collect()
    }

    /// Mean over runs for each epoch.
    pub fn epoch_means(&self) -> Vec<F> {
        let n = real::<F>(self.runs as f64);
        (0..self.epochs)
            .map(|e| (0..self.runs).map(|r| self.get(r, e)).sum::<F>() / n)
            .collect()
    }

    /// CSV export, rows = runs, columns = epochs.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        write!(out, "run")?;
        for e in 0..self.epochs {
            write!(out, ",epoch_{}", e + 1)?;
        }
        writeln!(out)?;
        for r in 0..self.runs {
            write!(out, "{r}")?;
            for e in 0..self.epochs {
                write!(out, ",{}", fmt_real(self.get(r, e)))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn mean_and_var<F: Real>(sample: &[F]) -> (F, F) {
    let n = real::<F>(sample.len() as f64);
    let mean = sample.iter().copied().sum::<F>() / n;
    let ss = sample.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>();
    (mean, ss / (n - F::one()))
}

fn welch_components<F: Real>(x: &[F], y: &[F]) -> Result<(F, F)> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::Domain(
            "Welch's t-test needs at least 2 observations per sample".into(),
        ));
    }
    let (mx, vx) = mean_and_var(x);
    let (my, vy) = mean_and_var(y);
    let nx = real::<F>(x.len() as f64);
    let ny = real::<F>(y.len() as f64);
    let ax = vx / nx;
    let ay = vy / ny;
    let se2 = ax + ay;
    if se2 == F::zero() {
        // both samples constant: p by convention, signalled via NaN t
        return Ok((F::nan(), if mx == my { F::one() } else { F::zero() }));
    }
    let t = (mx - my) / se2.sqrt();
    let df = se2 * se2 / (ax * ax / (nx - F::one()) + ay * ay / (ny - F::one()));
    Ok((t, df))
}

/// Two-tailed p-value of Welch's unequal-variance t-test with
/// Welch-Satterthwaite degrees of freedom.
///
/// Degenerate inputs follow a documented convention instead of
/// propagating NaN: two constant equal samples give p = 1, two constant
/// but different samples give p = 0.
pub fn welch_t_test<F: Real>(x: &[F], y: &[F]) -> Result<F> {
    let (t, df_or_p) = welch_components(x, y)?;
    if t.is_nan() {
        return Ok(df_or_p);
    }
    Ok(student_t_two_tailed(t, df_or_p))
}

/// Holm-Bonferroni step-down adjustment. Sorted ascending (stable in the
/// original order on ties), the i-th smallest p becomes
/// `min(1, max_{j<=i} (m-j+1) * p_(j))`, then values are mapped back to
/// their original positions.
pub fn holm_bonferroni<F: Real>(p_values: &[F]) -> Result<Vec<F>> {
    for &p in p_values {
        if !(F::zero()..=F::one()).contains(&p) || p.is_nan() {
            return Err(Error::Domain(format!("p-value {p} outside [0, 1]")));
        }
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).unwrap());
    let mut adjusted = vec![F::zero(); m];
    let mut running = F::zero();
    for (rank, &i) in order.iter().enumerate() {
        let scaled = real::<F>((m - rank) as f64) * p_values[i];
        running = running.max(scaled);
        adjusted[i] = running.min(F::one());
    }
    Ok(adjusted)
}

/// Comparison of one pair of run matrices: per-epoch Welch p-values,
/// Holm adjustment across the epochs, the minimum adjusted p, and the
/// Pearson correlation of the epoch-mean curves.
#[derive(Debug, Clone, Serialize)]
pub struct PairComparison<F: Real> {
    pub label_x: String,
    pub label_y: String,
    pub raw_p: Vec<F>,
    pub adjusted_p: Vec<F>,
    pub min_adjusted_p: F,
    pub pearson_rho: F,
    pub alpha: F,
    /// True when no epoch shows a significant difference after
    /// adjustment, i.e. `min_adjusted_p > alpha`.
    pub verdict: bool,
}

/// Per-epoch Welch tests with Holm adjustment for one pair of sources.
pub fn pairwise_epoch_comparison<F: Real>(
    x: &RunMatrix<F>,
    y: &RunMatrix<F>,
    alpha: F,
) -> Result<PairComparison<F>> {
    if x.epochs() != y.epochs() {
        return Err(Error::Shape(format!(
            "epoch counts differ: {} vs {}",
            x.epochs(),
            y.epochs()
        )));
    }
    let raw_p: Vec<F> = (0..x.epochs())
        .map(|e| welch_t_test(&x.column(e), &y.column(e)))
        .collect::<Result<_>>()?;
    let adjusted_p = holm_bonferroni(&raw_p)?;
    let min_adjusted_p = adjusted_p.iter().copied().fold(F::one(), F::min);
    let pearson_rho = pearson_epoch_correlation(x, y)?;
    Ok(PairComparison {
        label_x: x.label().to_string(),
        label_y: y.label().to_string(),
        raw_p,
        adjusted_p,
        min_adjusted_p,
        pearson_rho,
        alpha,
        verdict: min_adjusted_p > alpha,
    })
}

/// Pearson correlation coefficient of the two epoch-mean curves.
pub fn pearson_epoch_correlation<F: Real>(x: &RunMatrix<F>, y: &RunMatrix<F>) -> Result<F> {
    if x.epochs() != y.epochs() {
        return Err(Error::Shape(format!(
            "epoch counts differ: {} vs {}",
            x.epochs(),
            y.epochs()
        )));
    }
    let mx = x.epoch_means();
    let my = y.epoch_means();
    let d = real::<F>(mx.len() as f64);
    let cx = mx.iter().copied().sum::<F>() / d;
    let cy = my.iter().copied().sum::<F>() / d;
    let mut sxx = F::zero();
    let mut syy = F::zero();
    let mut sxy = F::zero();
    for (&a, &b) in mx.iter().zip(&my) {
        let da = a - cx;
        let db = b - cy;
        sxx += da * da;
        syy += db * db;
        sxy += da * db;
    }
    if sxx == F::zero() || syy == F::zero() {
        return Err(Error::Degenerate(
            "Pearson correlation is undefined for a constant epoch-mean curve".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).max(-F::one()).min(F::one()))
}

/// All pairwise comparisons among a set of sources, ordered
/// lexicographically by `(label_x, label_y)`.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport<F: Real> {
    pub pairs: Vec<PairComparison<F>>,
    pub alpha: F,
    /// True when every pair's verdict holds, the all-epochs all-pairs
    /// minimum criterion.
    pub overall_verdict: bool,
}

/// Compare every unordered pair of matrices.
pub fn compare_sources<F: Real>(
    matrices: &[RunMatrix<F>],
    alpha: F,
) -> Result<ComparisonReport<F>> {
    if matrices.len() < 2 {
        return Err(Error::Shape("need at least two sources to compare".into()));
    }
    let mut pairs = Vec::new();
    for i in 0..matrices.len() {
        for j in (i + 1)..matrices.len() {
            pairs.push(pairwise_epoch_comparison(
                &matrices[i],
                &matrices[j],
                alpha,
            )?);
        }
    }
    pairs.sort_by(|a, b| {
        (a.label_x.as_str(), a.label_y.as_str()).cmp(&(b.label_x.as_str(), b.label_y.as_str()))
    });
    let overall_verdict = pairs.iter().all(|p| p.verdict);
    Ok(ComparisonReport {
        pairs,
        alpha,
        overall_verdict,
    })
}

impl<F: Real> ComparisonReport<F> {
    /// CSV in the shape of the summary table: one row per pair.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "x,y,min_adjusted_p,rho")?;
        for pair in &self.pairs {
            writeln!(
                out,
                "{},{},{},{}",
                pair.label_x,
                pair.label_y,
                fmt_real(pair.min_adjusted_p),
                fmt_real(pair.pearson_rho)
            )?;
        }
        Ok(())
    }
}
