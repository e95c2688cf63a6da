//! Cross-checks of the qubit-register formula over a grid of register sizes
//! and angles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::markov::SUM_TOLERANCE;
use crate::qubit::{brute_force_q, diagonal_branches, q_formula, QubitChainSpec, BRANCH_TOLERANCE, MAX_BRUTE_FORCE_QUBITS};
use crate::spin::{spin_transition_matrix, SpinChainSpec};

pub const DEFAULT_N_MAX: u32 = 12;
pub const DEFAULT_BETAS: [f64; 5] = [0.3, 1.0, PI / 2.0, 2.2, 2.7];
pub const FORMULA_TOLERANCE: f64 = 1e-10;
pub const SPIN_HALF_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    FormulaVsEnumeration,
    BranchSeam,
    RowSum,
    SpinHalf,
}

/// Offset added to one formula value before checking; used to prove the
/// sweep catches a corrupted entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub n: u32,
    pub j: HalfInt,
    pub j_prime: HalfInt,
    pub delta: f64,
    /// Restrict to one angle; `None` applies at every angle.
    pub beta: Option<f64>,
}

impl Perturbation {
    fn offset(&self, n: u32, beta: f64, j: HalfInt, j_prime: HalfInt) -> f64 {
        let beta_matches = self.beta.is_none_or(|b| b == beta);
        if self.n == n && self.j == j && self.j_prime == j_prime && beta_matches {
            self.delta
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub check: Check,
    pub n: u32,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<HalfInt>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_prime: Option<HalfInt>,
    pub value: f64,
    pub reference: f64,
    pub difference: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n_max: u32,
    pub betas: Vec<f64>,
    pub entries_checked: usize,
    pub max_formula_difference: f64,
    pub max_branch_difference: f64,
    pub max_row_sum_error: f64,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn sweep(n_max: u32, betas: &[f64], perturbation: Option<&Perturbation>) -> Result<Report> {
    if n_max == 0 || n_max > MAX_BRUTE_FORCE_QUBITS {
        return Err(Error::Range(format!("n_max must be in 1..={MAX_BRUTE_FORCE_QUBITS}, got {n_max}")));
    }
    if betas.is_empty() {
        return Err(Error::InvalidArgument("at least one angle is required".into()));
    }
    let mut report = Report {
        n_max,
        betas: betas.to_vec(),
        entries_checked: 0,
        max_formula_difference: 0.0,
        max_branch_difference: 0.0,
        max_row_sum_error: 0.0,
        failures: Vec::new(),
    };
    let offset = |n, beta, j, jp| perturbation.map_or(0.0, |p| p.offset(n, beta, j, jp));

    for n in 1..=n_max {
        for &beta in betas {
            let spec = QubitChainSpec::new(n, beta)?;
            let outcomes: Vec<HalfInt> = spec.outcomes().collect();
            let mut rows = Vec::with_capacity(outcomes.len());
            for &j in &outcomes {
                let mut row = Vec::with_capacity(outcomes.len());
                for &jp in &outcomes {
                    let value = if j == jp {
                        let (down, up) = diagonal_branches(&spec, j)?;
                        let down = down + offset(n, beta, j, jp);
                        let diff = (down - up).abs();
                        report.max_branch_difference = report.max_branch_difference.max(diff);
                        if diff > BRANCH_TOLERANCE {
                            report.failures.push(Failure {
                                check: Check::BranchSeam,
                                n,
                                beta,
                                j: Some(j),
                                j_prime: Some(jp),
                                value: down,
                                reference: up,
                                difference: diff,
                                tolerance: BRANCH_TOLERANCE,
                            });
                        }
                        down
                    } else {
                        q_formula(&spec, j, jp)? + offset(n, beta, j, jp)
                    };
                    let reference = brute_force_q(&spec, j, jp)?;
                    let diff = (value - reference).abs();
                    report.max_formula_difference = report.max_formula_difference.max(diff);
                    if diff > FORMULA_TOLERANCE {
                        report.failures.push(Failure {
                            check: Check::FormulaVsEnumeration,
                            n,
                            beta,
                            j: Some(j),
                            j_prime: Some(jp),
                            value,
                            reference,
                            difference: diff,
                            tolerance: FORMULA_TOLERANCE,
                        });
                    }
                    report.entries_checked += 1;
                    row.push(value);
                }
                let sum: f64 = row.iter().sum();
                let err = (sum - 1.0).abs();
                report.max_row_sum_error = report.max_row_sum_error.max(err);
                if err > SUM_TOLERANCE {
                    report.failures.push(Failure {
                        check: Check::RowSum,
                        n,
                        beta,
                        j: Some(j),
                        j_prime: None,
                        value: sum,
                        reference: 1.0,
                        difference: err,
                        tolerance: SUM_TOLERANCE,
                    });
                }
                rows.push(row);
            }

            if n == 1 {
                let spin = spin_transition_matrix(&SpinChainSpec::new(HalfInt::HALF, beta)?)?;
                for (a, &j) in outcomes.iter().enumerate() {
                    for (b, &jp) in outcomes.iter().enumerate() {
                        let diff = (rows[a][b] - spin.get(a, b)).abs();
                        if diff > SPIN_HALF_TOLERANCE {
                            report.failures.push(Failure {
                                check: Check::SpinHalf,
                                n,
                                beta,
                                j: Some(j),
                                j_prime: Some(jp),
                                value: rows[a][b],
                                reference: spin.get(a, b),
                                difference: diff,
                                tolerance: SPIN_HALF_TOLERANCE,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_is_clean() {
        let report = sweep(DEFAULT_N_MAX, &DEFAULT_BETAS, None).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        let expected: usize = (1..=12usize).map(|n| (n + 1) * (n + 1)).sum::<usize>() * 5;
        assert_eq!(report.entries_checked, expected);
        assert!(report.max_formula_difference < 1e-12, "{}", report.max_formula_difference);
    }

    #[test]
    fn off_diagonal_perturbation_is_named() {
        let p = Perturbation {
            n: 4,
            j: HalfInt::from_int(1),
            j_prime: HalfInt::from_int(-1),
            delta: 1e-6,
            beta: Some(1.0),
        };
        let report = sweep(6, &DEFAULT_BETAS, Some(&p)).unwrap();
        let formula: Vec<_> = report.failures.iter().filter(|f| f.check == Check::FormulaVsEnumeration).collect();
        assert_eq!(formula.len(), 1);
        assert_eq!((formula[0].n, formula[0].beta, formula[0].j, formula[0].j_prime), (4, 1.0, Some(p.j), Some(p.j_prime)));
        assert!(report.failures.iter().any(|f| f.check == Check::RowSum && f.n == 4 && f.j == Some(p.j)));
    }

    #[test]
    fn diagonal_perturbation_trips_the_seam() {
        let p = Perturbation { n: 1, j: HalfInt::HALF, j_prime: HalfInt::HALF, delta: 1e-9, beta: None };
        let report = sweep(2, &[0.3, 2.2], Some(&p)).unwrap();
        let checks: Vec<Check> = report.failures.iter().map(|f| f.check).collect();
        assert!(checks.contains(&Check::BranchSeam));
        assert!(checks.contains(&Check::SpinHalf));
        assert!(report.failures.iter().all(|f| f.n == 1));
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(sweep(0, &DEFAULT_BETAS, None).is_err());
        assert!(sweep(21, &DEFAULT_BETAS, None).is_err());
        assert!(sweep(3, &[], None).is_err());
    }
}
