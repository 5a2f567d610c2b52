//! Taylor coefficients of `ω⋆` and the Toeplitz extensions they generate.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Solution;
use crate::linalg::{self, c64, CMatrix, I};
use crate::toeplitz::{negative_index, ToeplitzSpec};
use crate::zeros::DiskZeros;
use crate::{entropy, json, Complex64};

pub const MATCH_TOL: f64 = 1e-6;
pub const RADIUS_RATIO: f64 = 0.8;
const NONCONVERGENCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorSeries {
    #[serde(with = "json::matrix_list")]
    pub coeffs: Vec<CMatrix>,
    pub radius: f64,
    pub confirm_radius: f64,
    pub error_estimate: f64,
}

fn node_count(m: usize) -> usize {
    256usize.max(8 * m).next_power_of_two()
}

/// Direct DFT of samples on the circle of radius `r`; returns the first `m`
/// coefficients and the largest sampled norm.
fn extract<F>(f: &F, m: usize, r: f64) -> Result<(Vec<CMatrix>, f64)>
where
    F: Fn(Complex64) -> Result<CMatrix>,
{
    let nodes = node_count(m);
    let roots: Vec<Complex64> = (0..nodes)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / nodes as f64))
        .collect();
    let mut samples = Vec::with_capacity(nodes);
    let mut max_norm = 0.0f64;
    for &w in &roots {
        let v = match f(w * r) {
            Ok(v) => v,
            Err(Error::SolutionPole { .. } | Error::DenominatorSingular { .. }) => {
                return Err(Error::PoleInsideRadius { radius: r })
            }
            Err(e) => return Err(e),
        };
        max_norm = max_norm.max(v.norm());
        samples.push(v);
    }
    let (rows, cols) = samples[0].shape();
    let coeffs = (0..m)
        .map(|k| {
            let mut acc = CMatrix::zeros(rows, cols);
            for (j, v) in samples.iter().enumerate() {
                acc += v * roots[(j * k) % nodes].conj();
            }
            acc / c64(nodes as f64 * r.powi(k as i32), 0.0)
        })
        .collect();
    Ok((coeffs, max_norm))
}

/// First `m` Taylor coefficients of `f` at 0 by the trapezoid rule on the
/// circle of radius `radius`, confirmed on the circle of radius `0.8·radius`.
pub fn taylor_coefficients_of<F>(f: F, m: usize, radius: f64) -> Result<TaylorSeries>
where
    F: Fn(Complex64) -> Result<CMatrix>,
{
    if !(radius > 0.0 && radius < 1.0) || m == 0 {
        return Err(Error::InvalidInput(format!(
            "radius {radius} and count {m} are not usable"
        )));
    }
    let confirm_radius = RADIUS_RATIO * radius;
    let (coeffs, big) = extract(&f, m, radius)?;
    let (check, small) = extract(&f, m, confirm_radius)?;
    let scale = big.max(small).max(f64::MIN_POSITIVE);
    let error_estimate = coeffs
        .iter()
        .zip(&check)
        .enumerate()
        .map(|(k, (a, b))| (a - b).norm() * confirm_radius.powi(k as i32) / scale)
        .fold(0.0, f64::max);
    if error_estimate > NONCONVERGENCE {
        return Err(Error::NonConvergent {
            discrepancy: error_estimate,
        });
    }
    Ok(TaylorSeries {
        coeffs,
        radius,
        confirm_radius,
        error_estimate,
    })
}

/// Taylor coefficients of `ω⋆` for a solution.
pub fn taylor_coefficients(sol: &Solution, m: usize, radius: f64) -> Result<TaylorSeries> {
    taylor_coefficients_of(|l| sol.eval_omega_star(l), m, radius)
}

/// Extraction radius that keeps clear of the poles of `ω⋆`, which sit at
/// `−λ_j` for the zeros `λ_j` of `q̃`.
pub fn extraction_radius(zeros: &DiskZeros) -> f64 {
    let rho = zeros.min_modulus().unwrap_or(1.0).min(1.0);
    (0.85 * rho).clamp(0.05, 0.9)
}

/// Taylor coefficients of `ω⋆` with the radius chosen from the zeros of `q̃`.
pub fn solution_series(sol: &Solution, m: usize) -> Result<TaylorSeries> {
    let zeros = entropy::q_tilde_zeros(sol)?;
    taylor_coefficients(sol, m, extraction_radius(&zeros))
}

/// Coefficients that `ω⋆` must reproduce: `s₀/2 − iν, s₁, …, s_{n−1}`.
pub fn interpolation_targets(spec: &ToeplitzSpec) -> Vec<CMatrix> {
    (0..spec.n)
        .map(|k| {
            if k == 0 {
                &spec.blocks[0] * c64(0.5, 0.0) - &spec.nu * I
            } else {
                spec.blocks[k].clone()
            }
        })
        .collect()
}

/// Relative residuals `‖c_k − target_k‖ / max(1, ‖target_k‖)` for `k < n`.
pub fn match_residuals(spec: &ToeplitzSpec, series: &TaylorSeries) -> Vec<f64> {
    interpolation_targets(spec)
        .iter()
        .zip(&series.coeffs)
        .map(|(t, c)| (c - t).norm() / t.norm().max(1.0))
        .collect()
}

/// Data `s₀ … s_{ñ−1}` of the extension generated by the series.
pub fn build_extension(
    spec: &ToeplitzSpec,
    series: &TaylorSeries,
    n_tilde: usize,
) -> Result<ToeplitzSpec> {
    if n_tilde < spec.n {
        return Err(Error::InvalidInput(format!(
            "extension size {n_tilde} is below n = {}",
            spec.n
        )));
    }
    if series.coeffs.len() < n_tilde {
        return Err(Error::InvalidInput(format!(
            "series has {} coefficients, need {n_tilde}",
            series.coeffs.len()
        )));
    }
    for (index, residual) in match_residuals(spec, series).into_iter().enumerate() {
        if residual > MATCH_TOL || residual.is_nan() {
            return Err(Error::CoefficientMismatch { index, residual });
        }
    }
    let mut blocks = spec.blocks.clone();
    blocks.extend(series.coeffs[spec.n..n_tilde].iter().cloned());
    ToeplitzSpec::new(blocks, spec.nu.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub base_n: usize,
    pub extended_n: usize,
    /// Negative index of `S(i)` for `i = base_n, …, extended_n`.
    pub kappas: Vec<usize>,
    /// `Λ_i = det S(i)` for `i = 1, …, extended_n`.
    #[serde(with = "json::complex_list")]
    pub dets: Vec<Complex64>,
    pub match_residuals: Vec<f64>,
    pub series_error: f64,
    pub stopped_early: Option<String>,
    pub passed: bool,
}

/// Checks that `ω⋆` interpolates the data and that every extension up to
/// `n + depth` keeps the negative index of `S(n)`.
pub fn verify_with_series(
    spec: &ToeplitzSpec,
    series: &TaylorSeries,
    depth: usize,
) -> Result<ExtensionReport> {
    let residuals = match_residuals(spec, series);
    let target = (spec.n + depth).min(series.coeffs.len());
    let ext = build_extension(spec, series, target)?;
    let mut kappas = Vec::new();
    let mut dets = Vec::new();
    let mut stopped_early = None;
    let mut extended_n = 0;
    for i in 1..=target {
        let s = ext.truncated(i).toeplitz_matrix();
        let det = linalg::det(&s);
        if !(det.norm() >= 1e-300 && det.norm().is_finite()) {
            stopped_early = Some(format!("determinant of S({i}) left floating-point range"));
            break;
        }
        if i >= spec.n {
            match negative_index(&s) {
                Ok(k) => kappas.push(k),
                Err(e @ Error::AmbiguousInertia { .. }) => {
                    stopped_early = Some(format!("S({i}): {e}"));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        dets.push(det);
        extended_n = i;
    }
    let base = kappas.first().copied();
    let passed = residuals.iter().all(|&r| r <= MATCH_TOL)
        && base.is_some()
        && kappas.iter().all(|&k| Some(k) == base);
    Ok(ExtensionReport {
        base_n: spec.n,
        extended_n,
        kappas,
        dets,
        match_residuals: residuals,
        series_error: series.error_estimate,
        stopped_early,
        passed,
    })
}

pub fn verify_solution(
    sol: &Solution,
    spec: &ToeplitzSpec,
    depth: usize,
) -> Result<ExtensionReport> {
    let series = solution_series(sol, spec.n + depth)?;
    verify_with_series(spec, &series, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::SolutionMode;
    use crate::params::{HerglotzSpec, Parameter};
    use crate::toeplitz::build_structured_triple;

    fn scalar(v: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, v)
    }

    fn flagship(values: &[f64]) -> (ToeplitzSpec, Solution) {
        let spec = ToeplitzSpec::scalar(values).unwrap();
        let t = build_structured_triple(&spec).unwrap();
        let sol = Solution::new(
            t,
            Parameter::Herglotz(HerglotzSpec::constant_i(1)),
            SolutionMode::Pair,
        )
        .unwrap();
        (spec, sol)
    }

    #[test]
    fn constant_function() {
        let s = taylor_coefficients_of(|_| Ok(scalar(c64(3.0, -1.0))), 4, 0.5).unwrap();
        assert!((s.coeffs[0][(0, 0)] - c64(3.0, -1.0)).norm() < 1e-14);
        assert!(s.coeffs[1..].iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn geometric_series() {
        let s = taylor_coefficients_of(|l| Ok(scalar((c64(1.0, 0.0) - l / 2.0).inv())), 20, 0.5)
            .unwrap();
        for (k, c) in s.coeffs.iter().enumerate() {
            // Roundoff grows like r^{−k}.
            assert!((c[(0, 0)].re - 0.5f64.powi(k as i32)).abs() < 1e-13 * 2f64.powi(k as i32));
        }
    }

    #[test]
    fn pole_inside_radius_is_reported() {
        let f = |l: Complex64| {
            let d = l - c64(0.3, 0.0);
            if d.norm() < 0.05 {
                Err(Error::SolutionPole { lambda: l })
            } else {
                Ok(scalar(d.inv()))
            }
        };
        assert!(matches!(
            taylor_coefficients_of(f, 8, 0.3),
            Err(Error::PoleInsideRadius { .. }) | Err(Error::NonConvergent { .. })
        ));
    }

    #[test]
    fn definite_flagship_coefficients() {
        let (_, sol) = flagship(&[2.0, 1.0]);
        let s = taylor_coefficients(&sol, 4, 0.5).unwrap();
        assert!((s.coeffs[0][(0, 0)] - c64(1.0, 0.0)).norm() < 1e-8);
        assert!((s.coeffs[1][(0, 0)] - c64(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn extension_rules() {
        let (spec, sol) = flagship(&[2.0, 1.0]);
        let series = taylor_coefficients(&sol, 10, 0.5).unwrap();
        assert_eq!(build_extension(&spec, &series, spec.n).unwrap(), spec);
        let mut bad = series.clone();
        bad.coeffs[1][(0, 0)] += c64(0.01, 0.0);
        assert!(matches!(
            build_extension(&spec, &bad, 4),
            Err(Error::CoefficientMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn indefinite_flagship_keeps_inertia() {
        let (spec, sol) = flagship(&[1.0, 1.3, -0.3]);
        let report = verify_solution(&sol, &spec, 12).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.kappas.iter().all(|&k| k == 1));
    }
}
