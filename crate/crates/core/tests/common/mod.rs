//! Independent reference computations shared by the integration tests.
//! Everything here is written from the definitions with plain dense
//! linear algebra, without calling the structured routines under test.

#![allow(dead_code)]

use std::f64::consts::TAU;

use indef_entropy_core::frame::SolutionMode;
use indef_entropy_core::linalg::{c64, CMatrix, I, ONE};
use indef_entropy_core::{
    build_structured_triple, Complex64, HerglotzSpec, Parameter, Solution, ToeplitzSpec,
};

pub const DEFINITE: [f64; 2] = [2.0, 1.0];
pub const INDEFINITE: [f64; 3] = [1.0, 1.3, -0.3];

pub fn flagship(values: &[f64]) -> (ToeplitzSpec, Solution) {
    let spec = ToeplitzSpec::scalar(values).unwrap();
    let triple = build_structured_triple(&spec).unwrap();
    let sol = Solution::new(
        triple,
        Parameter::Herglotz(HerglotzSpec::constant_i(1)),
        SolutionMode::Pair,
    )
    .unwrap();
    (spec, sol)
}

pub fn solution_for(spec: &ToeplitzSpec, param: Parameter) -> Solution {
    Solution::new(
        build_structured_triple(spec).unwrap(),
        param,
        SolutionMode::Pair,
    )
    .unwrap()
}

fn block_of(spec: &ToeplitzSpec, k: isize) -> CMatrix {
    if k >= 0 {
        spec.blocks[k as usize].clone()
    } else {
        spec.blocks[(-k) as usize].adjoint()
    }
}

/// `S(n)` with block `(i, j)` equal to `s_{j−i}`.
pub fn toeplitz(spec: &ToeplitzSpec) -> CMatrix {
    let (p, n) = (spec.p, spec.n);
    let mut s = CMatrix::zeros(p * n, p * n);
    for i in 0..n {
        for j in 0..n {
            s.view_mut((i * p, j * p), (p, p))
                .copy_from(&block_of(spec, j as isize - i as isize));
        }
    }
    s
}

/// `A`: `(i/2)I` on the block diagonal, `iI` in every strictly lower block.
pub fn generator(p: usize, n: usize) -> CMatrix {
    CMatrix::from_fn(p * n, p * n, |r, c| {
        let (bi, bj) = (r / p, c / p);
        if r % p != c % p {
            c64(0.0, 0.0)
        } else if bi == bj {
            c64(0.0, 0.5)
        } else if bi > bj {
            I
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// `(Φ₁, Φ₂)`.
pub fn phis(spec: &ToeplitzSpec) -> (CMatrix, CMatrix) {
    let (p, n) = (spec.p, spec.n);
    let mut phi1 = CMatrix::zeros(p * n, p);
    let mut phi2 = CMatrix::zeros(p * n, p);
    let mut acc = &spec.blocks[0] * c64(0.5, 0.0);
    for k in 0..n {
        if k > 0 {
            acc += block_of(spec, -(k as isize));
        }
        phi1.view_mut((k * p, 0), (p, p))
            .copy_from(&(&acc + &spec.nu * I));
        phi2.view_mut((k * p, 0), (p, p))
            .copy_from(&CMatrix::identity(p, p));
    }
    (phi1, phi2)
}

/// `AS − SA^* − i(Φ₁Φ₂^* + Φ₂Φ₁^*)`, relative to `‖S‖`.
pub fn displacement_residual(spec: &ToeplitzSpec) -> f64 {
    let s = toeplitz(spec);
    let a = generator(spec.p, spec.n);
    let (f1, f2) = phis(spec);
    let r = &a * &s - &s * a.adjoint() - (&f1 * f2.adjoint() + &f2 * f1.adjoint()) * I;
    r.norm() / s.norm()
}

/// `U(z) = I − izΠ^*(I − zA^*)⁻¹S⁻¹ΠJ` with general dense inverses.
pub fn frame(spec: &ToeplitzSpec, z: Complex64) -> CMatrix {
    let (p, n) = (spec.p, spec.n);
    let m = p * n;
    let (f1, f2) = phis(spec);
    let mut pi = CMatrix::zeros(m, 2 * p);
    pi.view_mut((0, 0), (m, p)).copy_from(&f1);
    pi.view_mut((0, p), (m, p)).copy_from(&f2);
    let mut j = CMatrix::zeros(2 * p, 2 * p);
    for d in 0..p {
        j[(d, p + d)] = ONE;
        j[(p + d, d)] = ONE;
    }
    let s_inv = toeplitz(spec).try_inverse().unwrap();
    let a = generator(p, n);
    let res = (CMatrix::identity(m, m) - a.adjoint() * z)
        .try_inverse()
        .unwrap();
    CMatrix::identity(2 * p, 2 * p) - pi.adjoint() * res * s_inv * pi * j * (I * z)
}

/// `−z/(1 − iz/2)·((1 + iz/2)/(1 − iz/2))^k` in block `k`.
pub fn resolvent_closed_form(p: usize, n: usize, z: Complex64) -> CMatrix {
    let h = c64(0.0, 0.5) * z;
    CMatrix::from_fn(p * n, p, |r, c| {
        if r % p != c {
            return c64(0.0, 0.0);
        }
        let k = (r / p) as i32;
        -z / (ONE - h) * ((ONE + h) / (ONE - h)).powi(k)
    })
}

/// `(A − I/z)⁻¹Φ₂` by a general solve.
pub fn resolvent_dense(spec: &ToeplitzSpec, z: Complex64) -> CMatrix {
    let m = spec.p * spec.n;
    let (_, f2) = phis(spec);
    (generator(spec.p, spec.n) - CMatrix::identity(m, m) / z)
        .lu()
        .solve(&f2)
        .unwrap()
}

/// Count of eigenvalues below zero, straight from the eigen-decomposition.
pub fn negative_eigenvalues(h: &CMatrix) -> usize {
    let herm = (h + h.adjoint()) * c64(0.5, 0.0);
    herm.symmetric_eigenvalues()
        .iter()
        .filter(|&&e| e < 0.0)
        .count()
}

/// Midpoint rule for `−(1/4π)∫P(θ, λ̃) b(θ) dθ`.
pub fn midpoint_entropy(b: impl Fn(f64) -> f64, lambda_tilde: Complex64, nodes: usize) -> f64 {
    let mut sum = 0.0;
    for k in 0..nodes {
        let t = TAU * (k as f64 + 0.5) / nodes as f64;
        let kernel = (1.0 - lambda_tilde.norm_sqr())
            / (Complex64::from_polar(1.0, t) - lambda_tilde).norm_sqr();
        sum += kernel * b(t);
    }
    -sum * TAU / nodes as f64 / (2.0 * TAU)
}

/// Coefficients of a polynomial of degree below `nodes` from its values on
/// the unit circle.
pub fn polynomial_coefficients(f: impl Fn(Complex64) -> Complex64, nodes: usize) -> Vec<Complex64> {
    let values: Vec<Complex64> = (0..nodes)
        .map(|k| f(Complex64::from_polar(1.0, TAU * k as f64 / nodes as f64)))
        .collect();
    (0..nodes)
        .map(|m| {
            values
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    v * Complex64::from_polar(1.0, -TAU * (k * m % nodes) as f64 / nodes as f64)
                })
                .sum::<Complex64>()
                / nodes as f64
        })
        .collect()
}

/// Roots of `Σ c_k λ^k` from the companion matrix, after trimming
/// coefficients below `trim` relative to the largest.
pub fn polynomial_roots(coeffs: &[Complex64], trim: f64) -> Vec<Complex64> {
    let big = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let degree = coeffs
        .iter()
        .rposition(|c| c.norm() > trim * big)
        .unwrap_or(0);
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let mut comp = CMatrix::zeros(degree, degree);
    for r in 1..degree {
        comp[(r, r - 1)] = ONE;
    }
    for r in 0..degree {
        comp[(r, degree - 1)] = -coeffs[r] / lead;
    }
    comp.eigenvalues()
        .map(|e| e.iter().copied().collect())
        .unwrap_or_else(|| {
            comp.schur()
                .eigenvalues()
                .map(|e| e.iter().copied().collect())
                .unwrap_or_default()
        })
}
