//! Wigner rotation matrices `d^s(β)` and `D^s(α, β, γ)`.
//!
//! Convention: active rotation `e^{−iβS_y}`, element `(m₂, m₁)` is
//! `⟨s m₂| e^{−iβS_y} |s m₁⟩`. Rows and columns both run `m = s, s−1, …, −s`.
//! With this convention `d^{1/2}(β) = [[cos β/2, −sin β/2], [sin β/2, cos β/2]]`.
//!
//! Elements are evaluated through the Jacobi-polynomial form
//!
//! ```text
//! d^s_{m₂m₁}(β) = ξ √(k!(k+a+b)! / ((k+a)!(k+b)!)) · sin(β/2)^a · cos(β/2)^b · P_k^{(a,b)}(cos β)
//! a = |m₁ − m₂|,  b = |m₁ + m₂|,  k = s − max(|m₁|, |m₂|)
//! ξ = (−1)^{m₂−m₁} when m₂ ≥ |m₁| or m₁ ≤ −|m₂|, else 1
//! ```
//!
//! with `P_k^{(a,b)}` from its three-term recurrence. Unlike the textbook
//! alternating factorial sum this has no cancellation between large terms,
//! so orthogonality holds to ~1e-13 up to [`MAX_SPIN`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::numeric::ln_factorial;

/// Largest supported spin, `25` (matrix dimension 51).
pub const MAX_SPIN: HalfInt = HalfInt::from_int(25);

/// Euler angles `(α, β, γ)` in the `z-y-z` convention, radians.
///
/// Conventional ranges are `α, γ ∈ [0, 2π]`, `β ∈ [0, π]`, but any finite
/// value is accepted: the matrix elements are entire in each angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (name, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !value.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite, got {value}")));
            }
        }
        Ok(EulerAngles { alpha, beta, gamma })
    }

    /// Pure rotation about `y`: `(0, β, 0)`.
    pub fn about_y(beta: f64) -> Result<Self> {
        Self::new(0.0, beta, 0.0)
    }
}

/// Real `(2s+1)×(2s+1)` matrix `d^s(β)`, row-major, rows `m₂`, columns `m₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallDMatrix {
    s: HalfInt,
    beta: f64,
    entries: Vec<f64>,
}

impl SmallDMatrix {
    pub fn spin(&self) -> HalfInt {
        self.s
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.s.multiplicity()
    }

    /// Element at row index `row` (`m₂ = s − row`) and column index `col`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim() + col]
    }

    /// `d^s_{m₂m₁}(β)`, or `None` if either label is not a projection of `s`.
    pub fn element(&self, m2: HalfInt, m1: HalfInt) -> Option<f64> {
        let row = projection_index(self.s, m2)?;
        let col = projection_index(self.s, m1)?;
        Some(self.get(row, col))
    }

    pub fn labels(&self) -> Vec<HalfInt> {
        self.s.projections().collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.dim())
    }
}

/// Complex `(2s+1)×(2s+1)` matrix `D^s(α, β, γ)`, same indexing as [`SmallDMatrix`].
#[derive(Clone, Debug, PartialEq)]
pub struct BigDMatrix {
    s: HalfInt,
    angles: EulerAngles,
    entries: Vec<Complex64>,
}

impl BigDMatrix {
    pub fn spin(&self) -> HalfInt {
        self.s
    }

    pub fn angles(&self) -> EulerAngles {
        self.angles
    }

    pub fn dim(&self) -> usize {
        self.s.multiplicity()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn element(&self, m2: HalfInt, m1: HalfInt) -> Option<Complex64> {
        let row = projection_index(self.s, m2)?;
        let col = projection_index(self.s, m1)?;
        Some(self.get(row, col))
    }
}

/// Position of `m` in the list `s, s−1, …, −s`.
pub fn projection_index(s: HalfInt, m: HalfInt) -> Option<usize> {
    m.is_projection_of(s).then(|| ((s.twice() - m.twice()) / 2) as usize)
}

fn check_spin(s: HalfInt) -> Result<()> {
    if s.is_negative() {
        return Err(Error::InvalidArgument(format!("spin must be non-negative, got {s}")));
    }
    if s > MAX_SPIN {
        return Err(Error::Range(format!("spin {s} exceeds the supported maximum {MAX_SPIN}")));
    }
    Ok(())
}

/// Wigner small-d matrix `d^s(β)`.
pub fn small_d(s: HalfInt, beta: f64) -> Result<SmallDMatrix> {
    check_spin(s)?;
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
    }
    let (sin_half, cos_half) = (beta / 2.0).sin_cos();
    let dim = s.multiplicity();
    let mut entries = Vec::with_capacity(dim * dim);
    for m2 in s.projections() {
        for m1 in s.projections() {
            entries.push(element(s, m2, m1, beta, cos_half, sin_half));
        }
    }
    Ok(SmallDMatrix { s, beta, entries })
}

/// Wigner big-D matrix `D^s_{m₂m₁}(α,β,γ) = e^{−im₂α} d^s_{m₂m₁}(β) e^{−im₁γ}`.
pub fn big_d(s: HalfInt, angles: EulerAngles) -> Result<BigDMatrix> {
    let EulerAngles { alpha, beta, gamma } = EulerAngles::new(angles.alpha, angles.beta, angles.gamma)?;
    let small = small_d(s, beta)?;
    let phase = |m: HalfInt, angle: f64| Complex64::from_polar(1.0, -m.to_f64() * angle);
    let mut entries = Vec::with_capacity(small.entries.len());
    for (row, m2) in s.projections().enumerate() {
        let left = phase(m2, alpha);
        for (col, m1) in s.projections().enumerate() {
            entries.push(left * small.get(row, col) * phase(m1, gamma));
        }
    }
    Ok(BigDMatrix { s, angles, entries })
}

fn element(s: HalfInt, m2: HalfInt, m1: HalfInt, beta: f64, cos_half: f64, sin_half: f64) -> f64 {
    let (t2, t1) = (m2.twice(), m1.twice());
    // Integers for valid projections.
    let a = (t1 - t2).abs() / 2;
    let b = (t1 + t2).abs() / 2;
    let degree = (s.twice() - t1.abs().max(t2.abs())) / 2;

    let ln_norm = 0.5 * ((ln_factorial(degree) + ln_factorial(degree + a + b)) - (ln_factorial(degree + a) + ln_factorial(degree + b)));
    let value = ln_norm.exp()
        * sin_half.powi(a as i32)
        * cos_half.powi(b as i32)
        * jacobi(degree, a as f64, b as f64, beta.cos());

    let flips = t2 >= t1.abs() || t1 <= -t2.abs();
    if flips && ((t2 - t1) / 2).rem_euclid(2) == 1 {
        -value
    } else {
        value
    }
}

/// Jacobi polynomial `P_n^{(a,b)}(x)` by upward recurrence in `n`.
fn jacobi(n: i64, a: f64, b: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut curr = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    for k in 2..=n {
        let k = k as f64;
        let c = 2.0 * k + a + b;
        let next = ((c - 1.0) * (c * (c - 2.0) * x + a * a - b * b) * curr
            - 2.0 * (k + a - 1.0) * (k + b - 1.0) * c * prev)
            / (2.0 * k * (k + a + b) * (c - 2.0));
        prev = curr;
        curr = next;
    }
    curr
}
