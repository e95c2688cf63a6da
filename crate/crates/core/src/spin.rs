//! Markov chain of alternating `S_z` / `S_n` measurements on a single spin.
//!
//! After a measurement with outcome `m₁` the spin sits in `|s m₁⟩` (after
//! `M`) or `|s m₁′⟩ = R⁻¹|s m₁⟩` (after `M′`). The next outcome is then
//! distributed as `|⟨s m₂′|s m₁⟩|² = |D_{m₂m₁}|²` or
//! `|⟨s m₂|s m₁′⟩|² = |D_{m₁m₂}|²`, and both equal `|d^s_{m₂m₁}(β)|²`.
//! That equality is what makes the outcome sequence a time-homogeneous
//! chain with `p_{ij} = |d^s_{ji}(β)|²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::markov::{sample_row, Distribution, Label, RngState, StochasticMatrix, Trajectory};
use crate::wigner::{big_d, small_d, EulerAngles};

/// Spin `s` and the Euler angles of the second measurement axis.
///
/// `alpha` and `gamma` only contribute phases and never change a
/// probability; they default to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinChainSpec {
    pub s: HalfInt,
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl SpinChainSpec {
    pub fn new(s: HalfInt, beta: f64) -> Result<Self> {
        Self::with_euler(s, 0.0, beta, 0.0)
    }

    pub fn with_euler(s: HalfInt, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if s.twice() < 1 {
            return Err(Error::InvalidArgument(format!("spin must be at least 1/2, got {s}")));
        }
        EulerAngles::new(alpha, beta, gamma)?;
        Ok(SpinChainSpec { s, beta, alpha, gamma })
    }

    pub fn angles(&self) -> EulerAngles {
        EulerAngles { alpha: self.alpha, beta: self.beta, gamma: self.gamma }
    }

    pub fn labels(&self) -> Vec<Label> {
        Label::halves(self.s.projections())
    }

    pub fn dim(&self) -> usize {
        self.s.multiplicity()
    }
}

/// Pure state in the `S_z` eigenbasis, components ordered `m = s … −s`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if amplitudes.is_empty() || !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("squared norm is {norm}, expected 1")));
        }
        Ok(QuantumState { amplitudes })
    }

    /// The basis state `|s m⟩`.
    pub fn basis(s: HalfInt, m: HalfInt) -> Result<Self> {
        let index = crate::wigner::projection_index(s, m)
            .ok_or_else(|| Error::InvalidArgument(format!("{m} is not a projection of spin {s}")))?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); s.multiplicity()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// Which observable a measurement reads out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementBasis {
    /// `M`: the `z` component.
    #[serde(rename = "z")]
    Z,
    /// `M′`: the component along the rotated axis `n`.
    #[serde(rename = "n")]
    N,
}

impl MeasurementBasis {
    /// `M` on even steps, `M′` on odd ones.
    pub fn for_step(step: usize) -> Self {
        if step.is_multiple_of(2) {
            MeasurementBasis::Z
        } else {
            MeasurementBasis::N
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub step: usize,
    pub kind: MeasurementBasis,
    pub outcome: HalfInt,
}

/// `p_{ij} = |d^s_{ji}(β)|²`: row `i` is the current outcome, column `j` the next.
pub fn spin_transition_matrix(spec: &SpinChainSpec) -> Result<StochasticMatrix> {
    let d = small_d(spec.s, spec.beta)?;
    let n = d.dim();
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let x = d.get(j, i);
                    x * x
                })
                .collect()
        })
        .collect();
    StochasticMatrix::new(spec.labels(), rows)
}

/// Born-rule distribution `|⟨s m|ψ⟩|²` of the first `S_z` measurement.
pub fn initial_distribution(spec: &SpinChainSpec, psi: &QuantumState) -> Result<Distribution> {
    if psi.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} components, spin {} needs {}",
            psi.dim(),
            spec.s,
            spec.dim()
        )));
    }
    let probs = psi.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    Distribution::new(spec.labels(), probs)
}

/// Measurement-level simulator: tracks the collapsed state as
/// `(basis, outcome index)` and draws each outcome from the overlap of that
/// eigenvector with the eigenbasis being measured next.
#[derive(Clone, Debug)]
pub struct AlternatingMeasurements {
    /// `after_z[i][j] = |⟨s m_j′|s m_i⟩|² = |D_{m_j m_i}|²`
    after_z: Vec<Vec<f64>>,
    /// `after_n[i][j] = |⟨s m_j|s m_i′⟩|² = |D_{m_i m_j}|²`
    after_n: Vec<Vec<f64>>,
    state: Option<(MeasurementBasis, usize)>,
    step: usize,
}

impl AlternatingMeasurements {
    pub fn new(spec: &SpinChainSpec) -> Result<Self> {
        let big = big_d(spec.s, spec.angles())?;
        let n = big.dim();
        let after_z = (0..n).map(|i| (0..n).map(|j| big.get(j, i).norm_sqr()).collect()).collect();
        let after_n = (0..n).map(|i| (0..n).map(|j| big.get(i, j).norm_sqr()).collect()).collect();
        Ok(AlternatingMeasurements { after_z, after_n, state: None, step: 0 })
    }

    /// Performs `M₀` on `|ψ⟩` with Born probabilities.
    pub fn prepare(&mut self, initial: &Distribution, rng: &mut RngState) -> usize {
        let index = sample_row(initial.probs(), rng);
        self.state = Some((MeasurementBasis::Z, index));
        self.step = 1;
        index
    }

    /// Performs the next measurement; returns its basis and outcome index.
    ///
    /// # Panics
    ///
    /// If called before [`prepare`](Self::prepare).
    pub fn measure(&mut self, rng: &mut RngState) -> (MeasurementBasis, usize) {
        let (basis, current) = self.state.expect("measure called before prepare");
        let (table, next_basis) = match basis {
            MeasurementBasis::Z => (&self.after_z, MeasurementBasis::N),
            MeasurementBasis::N => (&self.after_n, MeasurementBasis::Z),
        };
        debug_assert_eq!(next_basis, MeasurementBasis::for_step(self.step));
        let next = sample_row(&table[current], rng);
        self.state = Some((next_basis, next));
        self.step += 1;
        (next_basis, next)
    }
}

/// Runs `M₀, M₁, …, M_steps` starting from `psi`.
pub fn simulate_measurements(
    spec: &SpinChainSpec,
    psi: &QuantumState,
    steps: usize,
    rng: &mut RngState,
) -> Result<(Trajectory, Vec<MeasurementRecord>)> {
    let initial = initial_distribution(spec, psi)?;
    let labels: Vec<HalfInt> = spec.s.projections().collect();
    let mut device = AlternatingMeasurements::new(spec)?;

    let mut states = Vec::with_capacity(steps + 1);
    let mut records = Vec::with_capacity(steps + 1);
    let first = device.prepare(&initial, rng);
    states.push(first);
    records.push(MeasurementRecord { step: 0, kind: MeasurementBasis::Z, outcome: labels[first] });
    for step in 1..=steps {
        let (kind, index) = device.measure(rng);
        states.push(index);
        records.push(MeasurementRecord { step, kind, outcome: labels[index] });
    }
    let trajectory = Trajectory { labels: spec.labels(), states, seed: rng.seed(), stream: rng.stream_index() };
    Ok((trajectory, records))
}

/// Fair coin from a spin-½ measured alternately along `z` and `x`
/// (`β = π/2`, `α = γ = 0`). Outcome `+½` maps to `1`, `−½` to `0`.
///
/// The device is prepared in `|½ ½⟩`; that preparation outcome is certain
/// and is not part of the stream, so `count` bits come from `M₁ … M_count`.
pub fn coin_toss_stream(count: usize, rng: &mut RngState) -> Vec<u8> {
    let spec = coin_toss_spec();
    let mut device = AlternatingMeasurements::new(&spec).expect("spin-1/2 parameters are valid");
    let prepared = Distribution::point_mass(spec.labels(), 0).expect("two outcomes");
    device.prepare(&prepared, rng);
    (0..count)
        .map(|_| {
            let (_, index) = device.measure(rng);
            // index 0 is m = +1/2
            u8::from(index == 0)
        })
        .collect()
}

pub fn coin_toss_spec() -> SpinChainSpec {
    SpinChainSpec { s: HalfInt::HALF, beta: std::f64::consts::FRAC_PI_2, alpha: 0.0, gamma: 0.0 }
}
