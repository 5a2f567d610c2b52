//! Dense complex matrix helpers on top of `nalgebra`.
//!
//! Problem sizes here are desk scale (pn ≤ a few dozen), so everything is a
//! plain `DMatrix<Complex64>` and factorizations are recomputed freely.

use nalgebra::DMatrix;

use crate::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn scalar_matrix(n: usize, value: Complex64) -> CMatrix {
    CMatrix::identity(n, n) * value
}

/// `(M + M^*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

/// `(M - M^*) / 2i`, the matrix imaginary part.
pub fn imaginary_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()) * c64(0.0, -0.5)
}

/// Hermitian within `tol` relative to `1 + ‖M‖_F`.
pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).norm() <= tol * (1.0 + m.norm())
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank with singular values compared against `rel_tol * σ_max`.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

pub fn det(m: &CMatrix) -> Complex64 {
    m.clone().lu().determinant()
}

pub fn solve(m: &CMatrix, rhs: &CMatrix) -> Option<CMatrix> {
    m.clone().lu().solve(rhs)
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().lu().try_inverse()
}

/// LU inverse followed by one step of iterative refinement,
/// `X ← X + X (I − M X)`.
pub fn inverse_refined(m: &CMatrix) -> Option<CMatrix> {
    let x = inverse(m)?;
    let residual = identity(m.nrows()) - m * &x;
    Some(&x + &x * residual)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let herm = hermitian_part(h);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigenvalues of a general square matrix (Schur form of the complex matrix).
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    match m.clone().eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => m
            .clone()
            .schur()
            .eigenvalues()
            .map(|e| e.iter().copied().collect())
            .unwrap_or_default(),
    }
}

/// Copy of the `p × p` block at block position `(bi, bj)`.
pub fn block(m: &CMatrix, bi: usize, bj: usize, p: usize) -> CMatrix {
    m.view((bi * p, bj * p), (p, p)).into_owned()
}

pub fn set_block(m: &mut CMatrix, bi: usize, bj: usize, value: &CMatrix) {
    let (r, c) = value.shape();
    m.view_mut((bi * r, bj * c), (r, c)).copy_from(value);
}

/// Vertical stack `[top; bottom]`.
pub fn vstack(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    assert_eq!(top.ncols(), bottom.ncols());
    let mut out = CMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), top.shape()).copy_from(top);
    out.view_mut((top.nrows(), 0), bottom.shape())
        .copy_from(bottom);
    out
}

/// Horizontal stack `[left right]`.
pub fn hstack(left: &CMatrix, right: &CMatrix) -> CMatrix {
    assert_eq!(left.nrows(), right.nrows());
    let mut out = CMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape())
        .copy_from(right);
    out
}

/// Relative Frobenius distance `‖A − B‖ / max(1, ‖B‖)`.
pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}
