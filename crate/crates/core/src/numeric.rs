//! Small numeric helpers shared by the closed-form evaluators.

use std::sync::OnceLock;

const TABLE_LEN: usize = 171;

fn factorial_table() -> &'static [f64; TABLE_LEN] {
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; TABLE_LEN];
        let mut acc = 1.0_f64;
        for (n, slot) in table.iter_mut().enumerate() {
            if n > 0 {
                acc *= n as f64;
            }
            *slot = acc.ln();
        }
        table
    })
}

/// `ln Γ(n + 1) = ln n!` for `0 ≤ n ≤ 170`.
///
/// Tabulated from the running product, which is exact through `22!` and
/// within a few ulps above that.
pub fn ln_factorial(n: i64) -> f64 {
    assert!((0..TABLE_LEN as i64).contains(&n), "ln_factorial({n}) out of table range");
    factorial_table()[n as usize]
}

/// Binomial coefficient `C(n, k)`, zero outside `0 ≤ k ≤ n`.
///
/// Multiplicative accumulation in `f64`: exact while the running value stays
/// below `2^53`, which holds for every `n ≤ 20`.
pub fn binomial_small(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// `ln C(n, k)` through `ln Γ`, `-∞` outside `0 ≤ k ≤ n`.
pub fn ln_binomial(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
