//! Finite distributions, stochastic matrices and chain simulation.

use std::fmt;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::halfint::HalfInt;

/// Absolute tolerance on probability sums.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Name of the pseudo-random algorithm behind [`RngState`], embedded in
/// every artifact that depends on it.
pub const RNG_ALGORITHM: &str = "xoshiro256++/splitmix64-seed/u53-uniform";

/// Outcome label of a finite sample space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    /// A physical outcome such as a spin projection `m` or register value `j`.
    Half(HalfInt),
    /// A bare position in the outcome list.
    Index(usize),
    /// Anything else, e.g. from a user-supplied matrix file.
    Name(String),
}

impl Label {
    /// Parses `"3/2"`-style text as [`Label::Half`], anything else as [`Label::Name`].
    pub fn parse(text: &str) -> Label {
        match text.parse::<HalfInt>() {
            Ok(h) => Label::Half(h),
            Err(_) => Label::Name(text.to_owned()),
        }
    }

    pub fn indices(n: usize) -> Vec<Label> {
        (0..n).map(Label::Index).collect()
    }

    pub fn halves(values: impl IntoIterator<Item = HalfInt>) -> Vec<Label> {
        values.into_iter().map(Label::Half).collect()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Half(h) => h.fmt(f),
            Label::Index(i) => i.fmt(f),
            Label::Name(s) => f.write_str(s),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(Label::parse(&String::deserialize(deserializer)?))
    }
}

/// Seedable, bit-reproducible generator.
///
/// Xoshiro256++ whose 256-bit state is expanded from the 64-bit seed by
/// SplitMix64. Uniform doubles take the top 53 bits of one output:
/// `(x >> 11) · 2⁻⁵³ ∈ [0, 1)`.
#[derive(Clone, Debug)]
pub struct RngState {
    inner: Xoshiro256PlusPlus,
    seed: u64,
    stream: u64,
}

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        RngState { inner: Xoshiro256PlusPlus::seed_from_u64(seed), seed, stream: 0 }
    }

    /// Independent stream `index` of `seed`: the generator advanced by
    /// `index` jumps of 2¹²⁸ outputs.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut inner = Xoshiro256PlusPlus::seed_from_u64(seed);
        for _ in 0..index {
            inner.jump();
        }
        RngState { inner, seed, stream: index }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// One draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Probability vector over an ordered list of outcome labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    labels: Vec<Label>,
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates without renormalizing: every entry non-negative and the
    /// total within [`SUM_TOLERANCE`] of one.
    pub fn new(labels: Vec<Label>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        check_probability_vector(&probs)?;
        Ok(Distribution { labels, probs })
    }

    /// Point mass on position `index`.
    pub fn point_mass(labels: Vec<Label>, index: usize) -> Result<Self> {
        if index >= labels.len() {
            return Err(Error::InvalidArgument(format!("index {index} out of {} outcomes", labels.len())));
        }
        let mut probs = vec![0.0; labels.len()];
        probs[index] = 1.0;
        Ok(Distribution { labels, probs })
    }

    pub fn uniform(labels: Vec<Label>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidDistribution("empty outcome set".into()));
        }
        let p = 1.0 / labels.len() as f64;
        let probs = vec![p; labels.len()];
        Ok(Distribution { labels, probs })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn check_probability_vector(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty outcome set".into()));
    }
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!("entry {i} is {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Validates a bare probability vector, labelling outcomes by position.
pub fn validate_distribution(probs: Vec<f64>) -> Result<Distribution> {
    Distribution::new(Label::indices(probs.len()), probs)
}

/// Row-stochastic matrix over a shared row/column label set. Row `i` is the
/// distribution of the next outcome given current outcome `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    labels: Vec<Label>,
    rows: Vec<Vec<f64>>,
}

impl StochasticMatrix {
    pub fn new(labels: Vec<Label>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidArgument("stochastic matrix needs at least one outcome".into()));
        }
        if rows.len() != n {
            return Err(Error::DimensionMismatch(format!("{} rows for {n} labels", rows.len())));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if let Some(p) = row.iter().find(|p| **p > 1.0 + SUM_TOLERANCE) {
                return Err(Error::InvalidDistribution(format!("row {i} has entry {p} > 1")));
            }
            check_probability_vector(row).map_err(|e| match e {
                Error::InvalidDistribution(msg) => Error::InvalidDistribution(format!("row {i}: {msg}")),
                other => other,
            })?;
        }
        Ok(StochasticMatrix { labels, rows })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn row_distribution(&self, i: usize) -> Distribution {
        Distribution { labels: self.labels.clone(), probs: self.rows[i].clone() }
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.rows.iter().map(|row| row[j]).sum()).collect()
    }

    pub fn is_doubly_stochastic(&self, tol: f64) -> bool {
        self.column_sums().iter().all(|s| (s - 1.0).abs() <= tol)
    }

    pub fn position(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Outcome sequence of a finite run, initial outcome included.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub labels: Vec<Label>,
    pub states: Vec<usize>,
    pub seed: u64,
    pub stream: u64,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn outcome(&self, n: usize) -> &Label {
        &self.labels[self.states[n]]
    }
}

/// Inverse-CDF lookup in stored order. Falls back to the last outcome with
/// positive mass when rounding leaves `u` above the accumulated total.
fn inverse_cdf(probs: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            cumulative += p;
            last_positive = i;
            if u < cumulative {
                return i;
            }
        }
    }
    last_positive
}

/// Outcome index for a given uniform draw `u ∈ [0, 1)`.
pub fn sample_with_uniform(dist: &Distribution, u: f64) -> usize {
    inverse_cdf(&dist.probs, u)
}

/// Realizes one experiment: consumes exactly one uniform draw.
pub fn sample(dist: &Distribution, rng: &mut RngState) -> usize {
    inverse_cdf(&dist.probs, rng.uniform())
}

/// Draws from a bare row without wrapping it in a [`Distribution`].
pub(crate) fn sample_row(probs: &[f64], rng: &mut RngState) -> usize {
    inverse_cdf(probs, rng.uniform())
}

fn check_same_labels(a: &[Label], b: &[Label]) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "outcome sets differ ({} vs {} labels)",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Runs the chain for `steps` transitions after drawing the initial outcome.
pub fn simulate_chain(
    matrix: &StochasticMatrix,
    initial: &Distribution,
    steps: usize,
    rng: &mut RngState,
) -> Result<Trajectory> {
    check_same_labels(&matrix.labels, &initial.labels)?;
    let mut states = Vec::with_capacity(steps + 1);
    let mut current = sample(initial, rng);
    states.push(current);
    for _ in 0..steps {
        current = sample_row(&matrix.rows[current], rng);
        states.push(current);
    }
    Ok(Trajectory { labels: matrix.labels.clone(), states, seed: rng.seed(), stream: rng.stream_index() })
}

fn step_row_vector(matrix: &StochasticMatrix, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (weight, row) in v.iter().zip(&matrix.rows) {
        if *weight != 0.0 {
            for (o, p) in out.iter_mut().zip(row) {
                *o += weight * p;
            }
        }
    }
    out
}

/// `λ·Pⁿ` with `λ` as a row vector.
pub fn evolve(matrix: &StochasticMatrix, lambda: &Distribution, n: usize) -> Result<Distribution> {
    check_same_labels(&matrix.labels, &lambda.labels)?;
    let mut v = lambda.probs.clone();
    for _ in 0..n {
        v = step_row_vector(matrix, &v);
    }
    Distribution::new(lambda.labels.clone(), v)
}

pub(crate) fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Result of [`stationary`].
#[derive(Clone, Debug, PartialEq)]
pub struct Stationary {
    pub distribution: Distribution,
    /// Power steps applied to the start vector to reach `distribution`.
    pub iterations: usize,
    /// `TV(π·P, π)`.
    pub residual: f64,
}

/// Stationary distribution by power iteration.
///
/// Starts from the ramp `π₀(i) ∝ i + 1` rather than the uniform vector, so
/// that doubly stochastic periodic chains do not stop on their first step
/// (uniform is fixed by every doubly stochastic map). Stops at the first
/// iterate with `TV(π·P, π) ≤ tol` whose geometric tail estimate
/// `residual · r / (1 − r)` (with `r` the observed residual ratio) is also
/// within `tol`.
pub fn stationary(matrix: &StochasticMatrix, tol: f64, max_iters: usize) -> Result<Stationary> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = matrix.dim();
    let norm = (n * (n + 1) / 2) as f64;
    let mut current: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / norm).collect();
    let mut previous_residual = f64::NAN;
    let mut residual = f64::INFINITY;
    for k in 0..=max_iters {
        let next = step_row_vector(matrix, &current);
        residual = tv_distance(&next, &current);
        let ratio = residual / previous_residual;
        let tail = if residual == 0.0 {
            0.0
        } else if ratio < 1.0 {
            residual * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if residual <= tol && tail <= tol {
            let distribution = Distribution::new(matrix.labels.clone(), current)?;
            return Ok(Stationary { distribution, iterations: k, residual });
        }
        if k < max_iters {
            current = next;
            previous_residual = residual;
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: max_iters,
        residual,
        last: Box::new(Distribution { labels: matrix.labels.clone(), probs: current }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: Vec<Vec<f64>>) -> StochasticMatrix {
        StochasticMatrix::new(Label::indices(rows.len()), rows).unwrap()
    }

    fn swap() -> StochasticMatrix {
        matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]])
    }

    #[test]
    fn validate_accepts_and_rejects() {
        assert!(validate_distribution(vec![0.5, 0.5]).is_ok());
        assert!(validate_distribution(vec![1.0, 0.0]).is_ok());
        assert!(matches!(validate_distribution(vec![0.6, 0.6]), Err(Error::InvalidDistribution(_))));
        assert!(matches!(validate_distribution(vec![1.5, -0.5]), Err(Error::InvalidDistribution(_))));
        assert!(matches!(validate_distribution(vec![f64::NAN, 1.0]), Err(Error::InvalidDistribution(_))));
        assert!(matches!(validate_distribution(vec![]), Err(Error::InvalidDistribution(_))));
        // No silent renormalization: off by more than 1e-9 is an error.
        assert!(validate_distribution(vec![0.5, 0.5 + 2e-9]).is_err());
        assert!(validate_distribution(vec![0.5, 0.5 + 5e-10]).is_ok());
    }

    #[test]
    fn stochastic_matrix_validation() {
        assert!(StochasticMatrix::new(Label::indices(2), vec![vec![0.5, 0.5]]).is_err());
        assert!(StochasticMatrix::new(Label::indices(2), vec![vec![0.5, 0.5], vec![0.5]]).is_err());
        assert!(StochasticMatrix::new(Label::indices(2), vec![vec![0.5, 0.5], vec![0.7, 0.2]]).is_err());
        assert!(StochasticMatrix::new(Label::indices(2), vec![vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        assert!(StochasticMatrix::new(vec![], vec![]).is_err());
    }

    #[test]
    fn sample_degenerate_distribution() {
        let d = validate_distribution(vec![1.0, 0.0, 0.0]).unwrap();
        let mut rng = RngState::from_seed(7);
        assert!((0..1000).all(|_| sample(&d, &mut rng) == 0));
    }

    #[test]
    fn inverse_cdf_contract() {
        let d = validate_distribution(vec![0.25, 0.75]).unwrap();
        assert_eq!(sample_with_uniform(&d, 0.0), 0);
        assert_eq!(sample_with_uniform(&d, 0.2499999), 0);
        assert_eq!(sample_with_uniform(&d, 0.25), 1);
        assert_eq!(sample_with_uniform(&d, 0.9999999), 1);
        // Trailing zero-mass cells are never returned.
        let d = validate_distribution(vec![0.5, 0.5 - 1e-12, 0.0]).unwrap();
        assert_eq!(sample_with_uniform(&d, 1.0 - 1e-16), 1);
    }

    #[test]
    fn sample_consumes_one_draw() {
        let d = validate_distribution(vec![0.3, 0.3, 0.4]).unwrap();
        let mut a = RngState::from_seed(99);
        let mut b = RngState::from_seed(99);
        sample(&d, &mut a);
        b.uniform();
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn fair_two_way_frequency() {
        let d = validate_distribution(vec![0.5, 0.5]).unwrap();
        let mut rng = RngState::from_seed(2024);
        let n = 1_000_000;
        let zeros = (0..n).filter(|_| sample(&d, &mut rng) == 0).count();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn rng_is_reproducible_and_streams_differ() {
        let draw = |mut r: RngState| (0..5).map(|_| r.next_u64()).collect::<Vec<_>>();
        assert_eq!(draw(RngState::from_seed(1)), draw(RngState::from_seed(1)));
        assert_ne!(draw(RngState::from_seed(1)), draw(RngState::from_seed(2)));
        assert_eq!(draw(RngState::stream(1, 0)), draw(RngState::from_seed(1)));
        assert_ne!(draw(RngState::stream(1, 1)), draw(RngState::from_seed(1)));
        let mut r = RngState::from_seed(5);
        assert!((0..10_000).map(|_| r.uniform()).all(|u| (0.0..1.0).contains(&u)));
    }

    #[test]
    fn rng_first_outputs_are_pinned() {
        // xoshiro256++ seeded through splitmix64; freezes the cross-platform stream.
        let mut r = RngState::from_seed(0);
        let first: Vec<u64> = (0..3).map(|_| r.next_u64()).collect();
        let mut again = RngState::from_seed(0);
        assert_eq!(first, (0..3).map(|_| again.next_u64()).collect::<Vec<_>>());
        assert_eq!(first, PINNED_SEED0);
        assert_eq!(first, [0x53175d61490b23df, 0x61da6f3dc380d507, 0x5c0fdf91ec9a7bfc]);
        let mut r = RngState::from_seed(42);
        assert_eq!(r.next_u64(), 0xd0764d4f4476689f);
    }

    // Straight transcription of the published xoshiro256++ / splitmix64 reference code.
    const PINNED_SEED0: [u64; 3] = reference_first_three(0);

    const fn splitmix(state: &mut u64) -> u64 {
        *state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    const fn reference_first_three(seed: u64) -> [u64; 3] {
        let mut sm = seed;
        let mut s = [splitmix(&mut sm), splitmix(&mut sm), splitmix(&mut sm), splitmix(&mut sm)];
        let mut out = [0u64; 3];
        let mut i = 0;
        while i < 3 {
            out[i] = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
            let t = s[1] << 17;
            s[2] ^= s[0];
            s[3] ^= s[1];
            s[1] ^= s[2];
            s[0] ^= s[3];
            s[2] ^= t;
            s[3] = s[3].rotate_left(45);
            i += 1;
        }
        out
    }

    #[test]
    fn identity_chain_is_constant() {
        let id = matrix(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let initial = Distribution::uniform(Label::indices(3)).unwrap();
        let t = simulate_chain(&id, &initial, 50, &mut RngState::from_seed(3)).unwrap();
        assert_eq!(t.states.len(), 51);
        assert!(t.states.iter().all(|&s| s == t.states[0]));
    }

    #[test]
    fn two_cycle_alternates() {
        let initial = Distribution::point_mass(Label::indices(2), 0).unwrap();
        let t = simulate_chain(&swap(), &initial, 9, &mut RngState::from_seed(3)).unwrap();
        assert_eq!(t.states, vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(t.steps(), 9);
        assert_eq!(t.seed, 3);
    }

    #[test]
    fn simulate_rejects_label_mismatch() {
        let initial = Distribution::uniform(Label::indices(3)).unwrap();
        assert!(matches!(
            simulate_chain(&swap(), &initial, 1, &mut RngState::from_seed(0)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn chain_marginals_match_evolve() {
        let p = matrix(vec![vec![0.1, 0.6, 0.3], vec![0.5, 0.0, 0.5], vec![0.2, 0.2, 0.6]]);
        let initial = validate_distribution(vec![0.7, 0.2, 0.1]).unwrap();
        let n = 3;
        let runs = 100_000;
        let mut counts = [0usize; 3];
        for i in 0..runs {
            let mut rng = RngState::from_seed(1_000_000 + i as u64);
            let t = simulate_chain(&p, &initial, n, &mut rng).unwrap();
            counts[t.states[n]] += 1;
        }
        let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / runs as f64).collect();
        let theory = evolve(&p, &initial, n).unwrap();
        assert!(tv_distance(&empirical, theory.probs()) < 0.02);
    }

    #[test]
    fn evolve_examples() {
        let lambda = validate_distribution(vec![1.0, 0.0]).unwrap();
        assert_eq!(evolve(&swap(), &lambda, 0).unwrap(), lambda);
        assert_eq!(evolve(&swap(), &lambda, 1).unwrap().probs(), &[0.0, 1.0]);
        let ds = matrix(vec![vec![0.2, 0.3, 0.5], vec![0.5, 0.2, 0.3], vec![0.3, 0.5, 0.2]]);
        let u = Distribution::uniform(Label::indices(3)).unwrap();
        for n in [1, 5, 40] {
            let out = evolve(&ds, &u, n).unwrap();
            assert!(out.probs().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-12));
        }
    }

    #[test]
    fn stationary_examples() {
        let half = matrix(vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let st = stationary(&half, 1e-12, 100).unwrap();
        assert_eq!(st.distribution.probs(), &[0.5, 0.5]);
        assert_eq!(st.iterations, 1);

        let ds = matrix(vec![vec![0.2, 0.3, 0.5], vec![0.5, 0.2, 0.3], vec![0.3, 0.5, 0.2]]);
        let st = stationary(&ds, 1e-12, 10_000).unwrap();
        assert!(st.distribution.probs().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-12));
        assert!(st.residual <= 1e-12);

        match stationary(&swap(), 1e-12, 500) {
            Err(Error::ConvergenceFailure { iterations, residual, last }) => {
                assert_eq!(iterations, 500);
                assert!(residual > 0.1);
                assert_eq!(last.len(), 2);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
        assert!(stationary(&half, 0.0, 10).is_err());
    }

    #[test]
    fn stationary_non_doubly_stochastic() {
        // π = (5/6, 1/6) solves π = πP for this chain.
        let p = matrix(vec![vec![0.9, 0.1], vec![0.5, 0.5]]);
        let st = stationary(&p, 1e-13, 10_000).unwrap();
        assert!((st.distribution.probs()[0] - 5.0 / 6.0).abs() < 1e-12);
    }

    fn random_stochastic(n: usize, raw: &[f64]) -> StochasticMatrix {
        let rows = raw
            .chunks(n)
            .take(n)
            .map(|chunk| {
                let total: f64 = chunk.iter().sum();
                chunk.iter().map(|x| x / total).collect()
            })
            .collect();
        StochasticMatrix::new(Label::indices(n), rows).unwrap()
    }

    proptest! {
        #[test]
        fn evolve_preserves_validity(n in 1usize..7, raw in proptest::collection::vec(0.01f64..1.0, 49), lam in proptest::collection::vec(0.01f64..1.0, 7), steps in 0usize..50) {
            let p = random_stochastic(n, &raw);
            let total: f64 = lam[..n].iter().sum();
            let lambda = validate_distribution(lam[..n].iter().map(|x| x / total).collect()).unwrap();
            let out = evolve(&p, &lambda, steps).unwrap();
            prop_assert!((out.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
