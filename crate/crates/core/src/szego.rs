//! Determinant ratios of the extended Toeplitz matrices and their limits.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::caratheodory::{
    build_extension, extraction_radius, taylor_coefficients, taylor_coefficients_of,
};
use crate::entropy::{self, pair_entropy};
use crate::error::{Error, Result};
use crate::frame::Solution;
use crate::linalg::{self, c64, CMatrix};
use crate::params::{self, Parameter};
use crate::quadrature::{QuadOptions, Sample};
use crate::toeplitz::{negative_index, ToeplitzSpec};
use crate::zeros::DiskZeros;
use crate::{json, Complex64};

const EPS_CONDITION: f64 = 1e-12;
const CHECKPOINTS: [usize; 3] = [8, 16, 32];
/// Errors below this level count as converged when checking the trend.
pub const NOISE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SzegoOptions {
    pub i_max: usize,
    pub tol_conv: f64,
    pub quad: QuadOptions,
    /// Trapezoid nodes for the exponential-integral forms.
    pub trapezoid_nodes: usize,
}

impl Default for SzegoOptions {
    fn default() -> Self {
        SzegoOptions {
            i_max: 32,
            tol_conv: 1e-2,
            quad: QuadOptions::default(),
            trapezoid_nodes: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminantSequence {
    /// `Λ_i` for `i = 1, …, len`.
    #[serde(with = "json::complex_list")]
    pub dets: Vec<Complex64>,
    /// `|det t_{i,i} − Λ_{i−1}/Λ_i| / |Λ_{i−1}/Λ_i|`, `t_{i,i}` the last
    /// diagonal block of `S(i)⁻¹`.
    pub bridge_residuals: Vec<f64>,
    pub truncated: Option<String>,
}

impl DeterminantSequence {
    /// `Λ_i/Λ_{i−1}` with `Λ₀ = 1`.
    pub fn ratios(&self) -> Vec<Complex64> {
        let mut prev = c64(1.0, 0.0);
        self.dets
            .iter()
            .map(|&d| {
                let r = d / prev;
                prev = d;
                r
            })
            .collect()
    }
}

/// `Λ_i = det S(i)` for `i = 1, …, i_max`, each from a fresh factorization.
/// Stops at the first `S(i)` that is numerically singular.
pub fn determinant_sequence(ext: &ToeplitzSpec, i_max: usize) -> Result<DeterminantSequence> {
    if i_max > ext.n {
        return Err(Error::InvalidInput(format!(
            "need {i_max} blocks, extension has {}",
            ext.n
        )));
    }
    let p = ext.p;
    let mut dets = Vec::with_capacity(i_max);
    let mut bridge_residuals = Vec::with_capacity(i_max);
    let mut truncated = None;
    let mut prev = c64(1.0, 0.0);
    for i in 1..=i_max {
        let s = ext.truncated(i).toeplitz_matrix();
        let sv = linalg::singular_values(&s);
        let ratio = sv.last().copied().unwrap_or(0.0) / sv[0].max(f64::MIN_POSITIVE);
        let inv = if ratio > EPS_CONDITION {
            linalg::inverse_refined(&s)
        } else {
            None
        };
        let Some(inv) = inv else {
            let e = Error::ConditioningBreakdown {
                index: i,
                reason: format!("singular value ratio {ratio:.3e}"),
            };
            truncated = Some(e.to_string());
            break;
        };
        let det = linalg::det(&s);
        let tii = linalg::block(&inv, i - 1, i - 1, p);
        let expected = prev / det;
        bridge_residuals.push((linalg::det(&tii) - expected).norm() / expected.norm());
        dets.push(det);
        prev = det;
    }
    Ok(DeterminantSequence {
        dets,
        bridge_residuals,
        truncated,
    })
}

/// Taylor data of `ω̆⋆(λ) = −iψ(2i(1 − λ)/(1 + λ))` with `s̆₀ = 2 Re ω̆⋆(0)`.
pub fn parameter_series(param: &Parameter, m: usize) -> Result<ToeplitzSpec> {
    let p = param.p();
    let series = taylor_coefficients_of(
        |l| {
            let (pp, qq) = param.pair_at(params::star_point(l)?)?;
            // With the trivial frame −iφ = PQ⁻¹.
            let q_inv = linalg::inverse(&qq).ok_or(Error::DenominatorSingular { z: l })?;
            Ok(pp * q_inv)
        },
        m,
        0.5,
    )?;
    let mut blocks = series.coeffs;
    blocks[0] = linalg::hermitian_part(&blocks[0]) * c64(2.0, 0.0);
    ToeplitzSpec::new(blocks, CMatrix::zeros(p, p))
}

/// `Λ̆_i` for the parameter alone.
pub fn breve_sequence(param: &Parameter, i_max: usize) -> Result<DeterminantSequence> {
    determinant_sequence(&parameter_series(param, i_max)?, i_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    /// `2^p exp(−2E⋆(ψ, 0))`.
    pub classical: f64,
    /// `2^p exp(−2E⋆(φ, 0)) Π|λ_j|^{−2}`.
    pub nonclassical: f64,
    /// `2^p Π|λ_j|^{−2} exp((1/2π)∫ ln det Im φ(2tan(θ/2)) dθ)`.
    pub final_display: f64,
    /// `2^p exp(−2E⋆(ψ, 0)) |q̃(0)|^{−2}`.
    pub via_q0: f64,
    /// `exp((1/2π)∫ ln det 2Re ω⋆(e^{iθ}) dθ)`, only without zeros.
    pub classical_symbol: Option<f64>,
    pub blaschke_correction: f64,
    pub entropy_solution: f64,
    pub entropy_parameter: f64,
}

fn trapezoid_mean<F>(f: F, nodes: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<Sample>,
{
    let mut sum = 0.0;
    for k in 0..nodes {
        let theta = TAU * (k as f64 + 0.5) / nodes as f64;
        match f(theta)? {
            Sample::Value(v) => sum += v,
            Sample::Singular => {
                return Err(Error::NonIntegrable { theta, det: 0.0 });
            }
        }
    }
    Ok(sum / nodes as f64)
}

pub fn predict_limit(
    sol: &Solution,
    zeros: &DiskZeros,
    opts: &SzegoOptions,
) -> Result<Predictions> {
    let zero = c64(0.0, 0.0);
    let two_p = 2f64.powi(sol.p() as i32);
    let corr = zeros.blaschke_correction();
    let e_phi = entropy::entropy_of_solution(sol, zero, true, &opts.quad)?.value;
    let e_psi = pair_entropy(&sol.param, zero, true, &opts.quad)?.value;
    let classical = two_p * (-2.0 * e_psi).exp();
    let nonclassical = two_p * (-2.0 * e_phi).exp() * corr;
    let log_mean = trapezoid_mean(
        |t| {
            let x = params::star_boundary_point(t);
            match sol.boundary_imag(x) {
                Ok(h) => entropy::log_det_sample(&h, 0.0, t),
                Err(Error::DenominatorSingular { .. }) => Ok(Sample::Singular),
                Err(e) => Err(e),
            }
        },
        opts.trapezoid_nodes,
    )?;
    let final_display = two_p * corr * log_mean.exp();
    let q0 = entropy::q_tilde(sol, zero)?.norm();
    let via_q0 = classical / (q0 * q0);
    let classical_symbol = if zeros.total_count == 0 {
        let p_ln2 = sol.p() as f64 * std::f64::consts::LN_2;
        let m = trapezoid_mean(
            |t| {
                Ok(match entropy::solution_boundary_log_det(sol, t, true)? {
                    Sample::Value(v) => Sample::Value(v + p_ln2),
                    s => s,
                })
            },
            opts.trapezoid_nodes,
        )?;
        Some(m.exp())
    } else {
        None
    };
    Ok(Predictions {
        classical,
        nonclassical,
        final_display,
        via_q0,
        classical_symbol,
        blaschke_correction: corr,
        entropy_solution: e_phi,
        entropy_parameter: e_psi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub i: usize,
    pub ratio: f64,
    /// `|Im r|/|r|`.
    pub imag_residue: f64,
    pub predicted_nonclassical: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SzegoReport {
    pub kappa: usize,
    pub zeros: DiskZeros,
    pub ratios: Vec<RatioRow>,
    pub predicted_classical: f64,
    pub predicted_nonclassical: f64,
    pub predictions: Predictions,
    pub blaschke_correction: f64,
    pub relative_errors: Vec<f64>,
    pub bridge_max: f64,
    pub sign_pattern_ok: bool,
    pub series_error: f64,
    pub truncated: Option<String>,
    pub converged: bool,
}

/// Relative errors must not grow across the checkpoints that were reached.
pub fn trend_ok(errors: &[f64]) -> bool {
    let at: Vec<f64> = CHECKPOINTS
        .iter()
        .filter(|&&i| i <= errors.len())
        .map(|&i| errors[i - 1])
        .collect();
    at.windows(2).all(|w| w[1] <= w[0] || w[1] <= NOISE_FLOOR)
}

pub fn szego_experiment(
    spec: &ToeplitzSpec,
    sol: &Solution,
    opts: &SzegoOptions,
) -> Result<SzegoReport> {
    let zeros = entropy::q_tilde_zeros(sol)?;
    let series = taylor_coefficients(sol, opts.i_max.max(spec.n), extraction_radius(&zeros))?;
    szego_with(
        spec,
        sol,
        zeros,
        &series.coeffs,
        series.error_estimate,
        opts,
    )
}

/// As [`szego_experiment`] with precomputed zeros and Taylor coefficients.
pub fn szego_with(
    spec: &ToeplitzSpec,
    sol: &Solution,
    zeros: DiskZeros,
    coeffs: &[CMatrix],
    series_error: f64,
    opts: &SzegoOptions,
) -> Result<SzegoReport> {
    let series = crate::caratheodory::TaylorSeries {
        coeffs: coeffs.to_vec(),
        radius: 0.0,
        confirm_radius: 0.0,
        error_estimate: series_error,
    };
    let i_max = opts.i_max.max(spec.n);
    let ext = build_extension(spec, &series, i_max)?;
    let seq = determinant_sequence(&ext, i_max)?;
    let kappa = negative_index(&spec.toeplitz_matrix())?;
    let pred = predict_limit(sol, &zeros, opts)?;
    let target = pred.nonclassical;
    let ratios: Vec<RatioRow> = seq
        .ratios()
        .iter()
        .enumerate()
        .map(|(k, r)| RatioRow {
            i: k + 1,
            ratio: r.re,
            imag_residue: r.im.abs() / r.norm().max(f64::MIN_POSITIVE),
            predicted_nonclassical: target,
            rel_error: (r.re - target).abs() / target.abs(),
        })
        .collect();
    let relative_errors: Vec<f64> = ratios.iter().map(|r| r.rel_error).collect();
    let sign = if kappa % 2 == 0 { 1.0 } else { -1.0 };
    let sign_pattern_ok = seq.dets.iter().skip(spec.n - 1).all(|d| d.re * sign > 0.0);
    let bridge_max = seq.bridge_residuals.iter().copied().fold(0.0, f64::max);
    let reached = seq.dets.len() == i_max;
    let converged = reached
        && relative_errors.last().is_some_and(|&e| e <= opts.tol_conv)
        && trend_ok(&relative_errors);
    Ok(SzegoReport {
        kappa,
        blaschke_correction: zeros.blaschke_correction(),
        zeros,
        ratios,
        predicted_classical: pred.classical,
        predicted_nonclassical: target,
        predictions: pred,
        relative_errors,
        bridge_max,
        sign_pattern_ok,
        series_error,
        truncated: seq.truncated,
        converged,
    })
}
