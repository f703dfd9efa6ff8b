//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Primitive cube root of unity, exp(2πi/3).
pub fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// ω^k for k taken mod 3. Uses the exact rectangular values of the three roots.
pub fn omega_pow(k: i64) -> C64 {
    const HALF_SQRT3: f64 = 0.866_025_403_784_438_6;
    match k.rem_euclid(3) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(-0.5, HALF_SQRT3),
        _ => C64::new(-0.5, -HALF_SQRT3),
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    // Symmetrize first so roundoff in the input cannot leak an imaginary part.
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Base-3 digits of a flat basis index, site 1 most significant.
pub fn digits(mut index: usize, sites: usize) -> Vec<usize> {
    let mut out = vec![0; sites];
    for slot in out.iter_mut().rev() {
        *slot = index % 3;
        index /= 3;
    }
    out
}

pub fn flat_index(digits: &[usize]) -> usize {
    digits.iter().fold(0, |acc, &d| acc * 3 + d)
}

/// Rounds to 12 significant digits for machine-readable output.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn complex_pair(z: C64) -> [f64; 2] {
    [sig12(z.re), sig12(z.im)]
}
