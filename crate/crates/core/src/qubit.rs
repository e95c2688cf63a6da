//! Markov chain of a register of `N` independent qubits read out alternately
//! along `z` and along `n`.
//!
//! A readout with outcome `j` leaves `N/2 + j` qubits up and `N/2 − j` down
//! in the basis just measured. Reading the other basis flips each qubit
//! independently with probability `sin²(β/2)`, in either direction, so the
//! outcome `j` alone carries everything the next step depends on.

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::markov::{Label, RngState, StochasticMatrix, Trajectory};
use crate::numeric::{binomial_small, ln_binomial, CompensatedSum};
use crate::spin::MeasurementBasis;

/// Largest register handled by the closed form.
pub const MAX_QUBITS: u32 = 64;
/// Largest register handled by the enumeration oracle.
pub const MAX_BRUTE_FORCE_QUBITS: u32 = 20;
/// Above this size binomials go through `ln Γ`.
const EXACT_BINOMIAL_QUBITS: u32 = 20;
/// Required agreement of the two printed branches where both apply.
pub const BRANCH_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitChainSpec {
    pub n_qubits: u32,
    pub beta: f64,
}

impl QubitChainSpec {
    pub fn new(n_qubits: u32, beta: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("register needs at least one qubit".into()));
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::Range(format!("{n_qubits} qubits exceeds the supported maximum {MAX_QUBITS}")));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
        }
        Ok(QubitChainSpec { n_qubits, beta })
    }

    /// `N/2` as a half-integer: the largest outcome.
    pub fn half_n(&self) -> HalfInt {
        HalfInt::from_twice(self.n_qubits as i64)
    }

    /// Outcomes `N/2, N/2 − 1, …, −N/2`.
    pub fn outcomes(&self) -> impl ExactSizeIterator<Item = HalfInt> + Clone {
        self.half_n().projections()
    }

    pub fn labels(&self) -> Vec<Label> {
        Label::halves(self.outcomes())
    }

    fn check_outcome(&self, j: HalfInt) -> Result<()> {
        if j.is_projection_of(self.half_n()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{j} is not a register outcome for N = {} (|j| ≤ N/2, N/2 − j integral)",
                self.n_qubits
            )))
        }
    }
}

/// Collapsed register: how many qubits point up in the basis last measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterConfiguration {
    pub n_qubits: u32,
    pub ups: u32,
    pub basis: MeasurementBasis,
}

impl RegisterConfiguration {
    /// `j = ups − N/2`.
    pub fn outcome(&self) -> HalfInt {
        HalfInt::from_twice(2 * self.ups as i64 - self.n_qubits as i64)
    }

    /// Position of the outcome in [`QubitChainSpec::labels`].
    pub fn index(&self) -> usize {
        (self.n_qubits - self.ups) as usize
    }
}

/// `sin²(β/2)`: chance that one qubit reads opposite to its collapsed state
/// when measured in the other basis.
pub fn flip_probability(beta: f64) -> f64 {
    let s = (beta / 2.0).sin();
    s * s
}

/// Value of a half-integer combination known to be integral.
fn int(h: HalfInt) -> i64 {
    h.to_integer().expect("register counts are integral")
}

/// Branch printed for `j ≥ j′`: `m` counts up-qubits that flip down.
fn q_branch_down(n: i64, j: HalfInt, jp: HalfInt, c2: f64, s2: f64, exact: bool) -> f64 {
    let half = HalfInt::from_twice(n);
    let ups = int(half + j);
    let downs = int(half - j);
    let lo = int(j - jp);
    let hi = int(half - jp);
    let mut sum = CompensatedSum::default();
    for m in lo..=hi {
        let k = int(half - jp) - m;
        let cos_pow = int(HalfInt::from_int(n) + j - jp) - 2 * m;
        let sin_pow = int(jp - j) + 2 * m;
        sum.add(term(ups, m, downs, k, c2, cos_pow, s2, sin_pow, exact));
    }
    sum.value()
}

/// Branch printed for `j ≤ j′`: `m` counts down-qubits that flip up.
fn q_branch_up(n: i64, j: HalfInt, jp: HalfInt, c2: f64, s2: f64, exact: bool) -> f64 {
    let half = HalfInt::from_twice(n);
    let ups = int(half + j);
    let downs = int(half - j);
    let lo = int(jp - j);
    let hi = int(half + jp);
    let mut sum = CompensatedSum::default();
    for m in lo..=hi {
        let k = int(half + jp) - m;
        let cos_pow = int(HalfInt::from_int(n) - j + jp) - 2 * m;
        let sin_pow = int(j - jp) + 2 * m;
        sum.add(term(downs, m, ups, k, c2, cos_pow, s2, sin_pow, exact));
    }
    sum.value()
}

/// `C(n1, k1) C(n2, k2) c2^cos_pow s2^sin_pow`, zero when a binomial vanishes.
#[allow(clippy::too_many_arguments)]
fn term(n1: i64, k1: i64, n2: i64, k2: i64, c2: f64, cos_pow: i64, s2: f64, sin_pow: i64, exact: bool) -> f64 {
    if k1 < 0 || k1 > n1 || k2 < 0 || k2 > n2 {
        return 0.0;
    }
    let coefficient = if exact {
        binomial_small(n1, k1) * binomial_small(n2, k2)
    } else {
        (ln_binomial(n1, k1) + ln_binomial(n2, k2)).exp()
    };
    coefficient * c2.powi(cos_pow as i32) * s2.powi(sin_pow as i32)
}

/// `q_{j′j}`: probability that the readout after outcome `j` gives `j′`.
///
/// Uses the branch for `j ≥ j′` or `j ≤ j′`; on the diagonal both apply and
/// must agree within [`BRANCH_TOLERANCE`].
pub fn q_formula(spec: &QubitChainSpec, j: HalfInt, j_prime: HalfInt) -> Result<f64> {
    spec.check_outcome(j)?;
    spec.check_outcome(j_prime)?;
    let (n, c2, s2, exact) = branch_inputs(spec);
    if j > j_prime {
        Ok(q_branch_down(n, j, j_prime, c2, s2, exact))
    } else if j < j_prime {
        Ok(q_branch_up(n, j, j_prime, c2, s2, exact))
    } else {
        let (down, up) = diagonal_branches(spec, j)?;
        if (down - up).abs() > BRANCH_TOLERANCE {
            return Err(Error::InternalConsistency(format!(
                "branches disagree at N = {n}, beta = {}, j = j' = {j}: {down} vs {up}",
                spec.beta
            )));
        }
        Ok(down)
    }
}

fn branch_inputs(spec: &QubitChainSpec) -> (i64, f64, f64, bool) {
    let (sin_half, cos_half) = (spec.beta / 2.0).sin_cos();
    (
        spec.n_qubits as i64,
        cos_half * cos_half,
        sin_half * sin_half,
        spec.n_qubits <= EXACT_BINOMIAL_QUBITS,
    )
}

/// Both printed branches evaluated at `j′ = j`, as `(j ≥ j′ branch, j ≤ j′ branch)`.
pub fn diagonal_branches(spec: &QubitChainSpec, j: HalfInt) -> Result<(f64, f64)> {
    spec.check_outcome(j)?;
    let (n, c2, s2, exact) = branch_inputs(spec);
    Ok((q_branch_down(n, j, j, c2, s2, exact), q_branch_up(n, j, j, c2, s2, exact)))
}

/// `(q_{j′j})` with rows indexed by the current `j` and columns by `j′`,
/// both running `N/2 … −N/2`.
pub fn qubit_transition_matrix(spec: &QubitChainSpec) -> Result<StochasticMatrix> {
    let outcomes: Vec<HalfInt> = spec.outcomes().collect();
    let rows = outcomes
        .iter()
        .map(|&j| outcomes.iter().map(|&jp| q_formula(spec, j, jp)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    StochasticMatrix::new(spec.labels(), rows)
}

/// Pascal's triangle in exact integers.
fn pascal(n: usize) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let mut row = vec![1u64; r + 1];
        for k in 1..r {
            row[k] = rows[r - 1][k - 1] + rows[r - 1][k];
        }
        rows.push(row);
    }
    rows
}

/// Enumeration oracle for `q_{j′j}`: sums over the number `a` of up→down
/// and `b` of down→up flips with weight `C(U,a) C(D,b) p^{a+b} (1−p)^{N−a−b}`,
/// keeping `U − a + b = N/2 + j′`.
pub fn brute_force_q(spec: &QubitChainSpec, j: HalfInt, j_prime: HalfInt) -> Result<f64> {
    if spec.n_qubits > MAX_BRUTE_FORCE_QUBITS {
        return Err(Error::Range(format!(
            "enumeration is limited to {MAX_BRUTE_FORCE_QUBITS} qubits, got {}",
            spec.n_qubits
        )));
    }
    spec.check_outcome(j)?;
    spec.check_outcome(j_prime)?;
    let n = spec.n_qubits as usize;
    let ups = ((j.twice() + n as i64) / 2) as usize;
    let downs = n - ups;
    let target_ups = ((j_prime.twice() + n as i64) / 2) as usize;
    let p = flip_probability(spec.beta);
    let keep = 1.0 - p;
    let binom = pascal(n);

    let mut total = 0.0;
    for a in 0..=ups {
        for b in 0..=downs {
            if ups - a + b != target_ups {
                continue;
            }
            let flips = (a + b) as i32;
            let weight = binom[ups][a] as f64 * binom[downs][b] as f64;
            total += weight * p.powi(flips) * keep.powi(n as i32 - flips);
        }
    }
    Ok(total)
}

/// Per-qubit simulator: every qubit of the collapsed register reads out
/// flipped with probability `sin²(β/2)`, one uniform draw per qubit per step.
#[derive(Clone, Debug)]
pub struct Register {
    config: RegisterConfiguration,
    flip: f64,
}

impl Register {
    /// Register just after an `M` readout with outcome `j`.
    pub fn collapsed(spec: &QubitChainSpec, j: HalfInt) -> Result<Self> {
        spec.check_outcome(j)?;
        let ups = ((j.twice() + spec.n_qubits as i64) / 2) as u32;
        Ok(Register {
            config: RegisterConfiguration { n_qubits: spec.n_qubits, ups, basis: MeasurementBasis::Z },
            flip: flip_probability(spec.beta),
        })
    }

    /// Product state with each qubit up with probability `up_probability`,
    /// read out once along `z`. Consumes `N` draws.
    pub fn prepared(spec: &QubitChainSpec, up_probability: f64, rng: &mut RngState) -> Result<Self> {
        if !(0.0..=1.0).contains(&up_probability) {
            return Err(Error::InvalidArgument(format!("up probability {up_probability} outside [0, 1]")));
        }
        let ups = (0..spec.n_qubits).filter(|_| rng.uniform() < up_probability).count() as u32;
        Ok(Register {
            config: RegisterConfiguration { n_qubits: spec.n_qubits, ups, basis: MeasurementBasis::Z },
            flip: flip_probability(spec.beta),
        })
    }

    pub fn configuration(&self) -> RegisterConfiguration {
        self.config
    }

    /// Reads out every qubit in the other basis.
    pub fn measure(&mut self, rng: &mut RngState) -> RegisterConfiguration {
        let RegisterConfiguration { n_qubits, ups, basis } = self.config;
        let mut new_ups = 0;
        for qubit in 0..n_qubits {
            let was_up = qubit < ups;
            let flipped = rng.uniform() < self.flip;
            if was_up != flipped {
                new_ups += 1;
            }
        }
        let basis = match basis {
            MeasurementBasis::Z => MeasurementBasis::N,
            MeasurementBasis::N => MeasurementBasis::Z,
        };
        self.config = RegisterConfiguration { n_qubits, ups: new_ups, basis };
        self.config
    }
}

fn run_register(spec: &QubitChainSpec, mut register: Register, steps: usize, rng: &mut RngState) -> Trajectory {
    let mut states = Vec::with_capacity(steps + 1);
    states.push(register.configuration().index());
    for _ in 0..steps {
        states.push(register.measure(rng).index());
    }
    Trajectory { labels: spec.labels(), states, seed: rng.seed(), stream: rng.stream_index() }
}

/// Starts from an `M` readout with outcome `initial_j` and performs `steps`
/// further alternating readouts.
pub fn simulate_register(
    spec: &QubitChainSpec,
    initial_j: HalfInt,
    steps: usize,
    rng: &mut RngState,
) -> Result<Trajectory> {
    let register = Register::collapsed(spec, initial_j)?;
    Ok(run_register(spec, register, steps, rng))
}

/// Like [`simulate_register`] but the first readout is drawn from a product
/// state with per-qubit up probability `up_probability`.
pub fn simulate_register_from_product(
    spec: &QubitChainSpec,
    up_probability: f64,
    steps: usize,
    rng: &mut RngState,
) -> Result<Trajectory> {
    let register = Register::prepared(spec, up_probability, rng)?;
    Ok(run_register(spec, register, steps, rng))
}
