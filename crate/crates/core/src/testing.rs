//! Test-only linear-algebra oracle: spin operators from ladder-operator
//! matrix elements, exponentiated by Hermitian eigendecomposition.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::halfint::HalfInt;

/// `(S_x, S_y, S_z)` in the basis `m = s, s−1, …, −s`.
pub fn spin_matrices(s: HalfInt) -> (DMatrix<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = s.multiplicity();
    let sf = s.to_f64();
    let mut raise = DMatrix::<Complex64>::zeros(n, n);
    let mut sz = DMatrix::<Complex64>::zeros(n, n);
    for (col, m) in s.projections().enumerate() {
        let mf = m.to_f64();
        sz[(col, col)] = Complex64::new(mf, 0.0);
        if col > 0 {
            // S+|m⟩ = √(s(s+1) − m(m+1)) |m+1⟩, and m+1 sits one row up.
            raise[(col - 1, col)] = Complex64::new((sf * (sf + 1.0) - mf * (mf + 1.0)).sqrt(), 0.0);
        }
    }
    let lower = raise.adjoint();
    let sx = (&raise + &lower).map(|z| z * 0.5);
    let sy = (&raise - &lower).map(|z| z / Complex64::new(0.0, 2.0));
    (sx, sy, sz)
}

/// `e^{iθH}` for Hermitian `H`.
pub fn exp_i_theta(h: &DMatrix<Complex64>, theta: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, theta * eig.eigenvalues[i])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}
