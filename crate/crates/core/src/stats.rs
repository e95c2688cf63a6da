//! Empirical transition statistics and their distance from theory.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::{tv_distance, Distribution, Label, StochasticMatrix, Trajectory};

/// Default pooling threshold for [`chi_square`].
pub const MIN_EXPECTED: f64 = 5.0;

/// `counts[i][j]` = number of observed `i → j` steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransitionCounts {
    pub labels: Vec<Label>,
    pub counts: Vec<Vec<u64>>,
}

impl TransitionCounts {
    pub fn empty(labels: Vec<Label>) -> Self {
        let n = labels.len();
        TransitionCounts { labels, counts: vec![vec![0; n]; n] }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn visits(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    /// Adds another tally over the same labels.
    pub fn merge(&mut self, other: &TransitionCounts) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::DimensionMismatch("cannot merge counts over different outcome sets".into()));
        }
        for (mine, theirs) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
        Ok(())
    }
}

fn count_steps(t: &Trajectory, keep: impl Fn(usize) -> bool) -> TransitionCounts {
    let mut counts = TransitionCounts::empty(t.labels.clone());
    for (n, pair) in t.states.windows(2).enumerate() {
        if keep(n) {
            counts.counts[pair[0]][pair[1]] += 1;
        }
    }
    counts
}

pub fn transition_counts(t: &Trajectory) -> TransitionCounts {
    count_steps(t, |_| true)
}

/// Only the steps `n → n+1` with `n` of the given parity: even parity picks
/// `M → M′`, odd picks `M′ → M`.
pub fn transition_counts_by_parity(t: &Trajectory, odd: bool) -> TransitionCounts {
    count_steps(t, |n| (n % 2 == 1) == odd)
}

/// Row-normalized counts. Rows never left are `None` rather than guessed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalMatrix {
    pub labels: Vec<Label>,
    pub rows: Vec<Option<Vec<f64>>>,
    pub visits: Vec<u64>,
}

impl EmpiricalMatrix {
    pub fn is_observed(&self, row: usize) -> bool {
        self.rows[row].is_some()
    }

    /// Row `i` as a distribution, if observed.
    pub fn row_distribution(&self, row: usize) -> Option<Distribution> {
        let probs = self.rows[row].clone()?;
        Distribution::new(self.labels.clone(), probs).ok()
    }
}

pub fn empirical_matrix(c: &TransitionCounts) -> EmpiricalMatrix {
    let mut rows = Vec::with_capacity(c.counts.len());
    let mut visits = Vec::with_capacity(c.counts.len());
    for row in &c.counts {
        let total: u64 = row.iter().sum();
        visits.push(total);
        rows.push((total > 0).then(|| row.iter().map(|&x| x as f64 / total as f64).collect()));
    }
    EmpiricalMatrix { labels: c.labels.clone(), rows, visits }
}

/// `½ Σ |aᵢ − bᵢ|`.
pub fn total_variation(a: &Distribution, b: &Distribution) -> Result<f64> {
    if a.labels() != b.labels() {
        return Err(Error::DimensionMismatch(format!(
            "total variation between outcome sets of size {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(tv_distance(a.probs(), b.probs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
}

/// Pearson goodness of fit of one row of counts against `expected`.
///
/// Cells whose expected count falls below `min_expected` are pooled into a
/// single cell. If that pooled cell is still below the threshold it is folded
/// into the retained cell with the smallest expected count. Needs at least
/// two cells after pooling.
pub fn chi_square(observed: &[u64], expected: &Distribution, min_expected: f64) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observed cells for {} expected",
            observed.len(),
            expected.len()
        )));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::UndefinedTest("no observations in this row".into()));
    }
    let n = total as f64;

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected.probs()) {
        let e = p * n;
        if e >= min_expected {
            cells.push((o as f64, e));
        } else {
            pooled_obs += o as f64;
            pooled_exp += e;
        }
    }
    if cells.is_empty() {
        return Err(Error::UndefinedTest(format!("every cell has expected count below {min_expected}")));
    }
    if pooled_exp >= min_expected {
        cells.push((pooled_obs, pooled_exp));
    } else if pooled_obs > 0.0 || pooled_exp > 0.0 {
        let smallest = cells
            .iter_mut()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one retained cell");
        smallest.0 += pooled_obs;
        smallest.1 += pooled_exp;
    }
    if cells.len() < 2 {
        return Err(Error::UndefinedTest("fewer than two cells after pooling".into()));
    }
    let statistic = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    Ok(ChiSquare { statistic, dof: cells.len() - 1 })
}

/// 0.999 quantiles of χ²(k) for k = 1…50.
const CHI_SQUARE_999: [f64; 50] = [
    10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322, 26.124, 27.877, 29.588, 31.264, 32.909, 34.528,
    36.123, 37.697, 39.252, 40.790, 42.312, 43.820, 45.315, 46.797, 48.268, 49.728, 51.179, 52.620, 54.052,
    55.476, 56.892, 58.301, 59.703, 61.098, 62.487, 63.870, 65.247, 66.619, 67.985, 69.346, 70.703, 72.055,
    73.402, 74.745, 76.084, 77.419, 78.750, 80.077, 81.400, 82.720, 84.037, 85.351, 86.661,
];

/// 0.999 quantile of χ²(`dof`): tabulated through 50 degrees of freedom,
/// Wilson–Hilferty beyond.
pub fn chi_square_critical_999(dof: usize) -> f64 {
    match dof {
        0 => 0.0,
        1..=50 => CHI_SQUARE_999[dof - 1],
        _ => {
            let k = dof as f64;
            let z = 3.090_232_306_167_813; // Φ⁻¹(0.999)
            let a = 2.0 / (9.0 * k);
            k * (1.0 - a + z * a.sqrt()).powi(3)
        }
    }
}

/// One row of an empirical-vs-theory comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowComparison {
    pub label: Label,
    pub visits: u64,
    pub tv: f64,
    pub chi_square: Option<f64>,
    pub dof: Option<usize>,
    pub critical_999: Option<f64>,
    pub pass: bool,
}

/// Per-row comparison of observed counts against `theory`. Unvisited rows
/// are skipped. A row passes when its χ² statistic is below the 0.999
/// quantile (rows where the test is undefined pass on TV alone, with
/// `tv_limit`).
pub fn compare_rows(counts: &TransitionCounts, theory: &StochasticMatrix, tv_limit: f64) -> Result<Vec<RowComparison>> {
    if counts.labels != theory.labels() {
        return Err(Error::DimensionMismatch("counts and theory use different outcome sets".into()));
    }
    let empirical = empirical_matrix(counts);
    let mut out = Vec::new();
    for (i, row) in empirical.rows.iter().enumerate() {
        let Some(row) = row else { continue };
        let expected = theory.row_distribution(i);
        let tv = tv_distance(row, expected.probs());
        let (chi, dof, critical, pass) = match chi_square(&counts.counts[i], &expected, MIN_EXPECTED) {
            Ok(ChiSquare { statistic, dof }) => {
                let critical = chi_square_critical_999(dof);
                (Some(statistic), Some(dof), Some(critical), statistic < critical)
            }
            Err(Error::UndefinedTest(_)) => (None, None, None, tv <= tv_limit),
            Err(e) => return Err(e),
        };
        out.push(RowComparison {
            label: counts.labels[i].clone(),
            visits: empirical.visits[i],
            tv,
            chi_square: chi,
            dof,
            critical_999: critical,
            pass,
        });
    }
    Ok(out)
}

/// Summary of a 0/1 stream against a fair coin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BitSummary {
    pub count: usize,
    pub ones: u64,
    pub mean: f64,
    pub lag1_autocorrelation: f64,
    pub chi_square: f64,
    pub critical_999: f64,
}

pub fn bit_summary(bits: &[u8]) -> Result<BitSummary> {
    if bits.len() < 2 {
        return Err(Error::UndefinedTest("need at least two bits".into()));
    }
    let ones = bits.iter().filter(|&&b| b != 0).count() as u64;
    let n = bits.len() as f64;
    let mean = ones as f64 / n;
    let dev = |b: u8| f64::from(u8::from(b != 0)) - mean;
    let variance: f64 = bits.iter().map(|&b| dev(b) * dev(b)).sum();
    let covariance: f64 = bits.windows(2).map(|w| dev(w[0]) * dev(w[1])).sum();
    let lag1_autocorrelation = if variance > 0.0 { covariance / variance } else { f64::NAN };
    let fair = Distribution::new(Label::indices(2), vec![0.5, 0.5])?;
    let zeros = bits.len() as u64 - ones;
    let ChiSquare { statistic, dof } = chi_square(&[zeros, ones], &fair, MIN_EXPECTED)?;
    Ok(BitSummary {
        count: bits.len(),
        ones,
        mean,
        lag1_autocorrelation,
        chi_square: statistic,
        critical_999: chi_square_critical_999(dof),
    })
}
