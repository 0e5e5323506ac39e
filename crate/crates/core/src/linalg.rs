//! Small dense helpers shared by the Fock-space code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex operator on a truncated Fock space.
pub type Operator = DMatrix<Complex64>;

/// `exp(iH)` for Hermitian `H`, via its eigendecomposition.
pub fn exp_i_hermitian(h: &Operator) -> Operator {
    let eig = h.clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)),
    );
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, phase) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *phase;
    }
    scaled * v.adjoint()
}

/// Largest entry of `|A − A†|`.
pub fn hermiticity_defect(a: &Operator) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry magnitude.
pub fn max_abs(a: &Operator) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}
