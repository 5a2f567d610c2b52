//! Entropy functionals, the determinants `q̃`, `q̂` and their zeros, and the
//! entropy representation identities.

use std::f64::consts::{LN_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{eval_frame, Solution, SolutionMode};
use crate::linalg::{self, c64, CMatrix, ONE};
use crate::params::{self, w_matrix, Parameter};
use crate::quadrature::{integrate, QuadOptions, Sample};
use crate::toeplitz::{shifted_adjoint_determinant, StructuredTriple};
use crate::zeros::{blaschke_eval, disk_zeros, DiskZeros, EPS_BOUNDARY};
use crate::{json, Complex64};

/// Distance from the unit circle at which boundary values are sampled.
pub const RADIAL_STEP: f64 = 1e-7;
/// `det Re ω` below `−EPS_NEGATIVE·scale` means the data is defective.
pub const EPS_NEGATIVE: f64 = 1e-6;
/// Eigenvalues below this fraction of the reference scale have lost their
/// digits to cancellation; such samples count as singular.
const CANCELLATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrandKind {
    SolutionOmegaStar,
    SolutionOmega,
    ParameterPsi,
    ParameterPair,
    ContractionEHat,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    #[serde(with = "json::complex")]
    pub lambda_tilde: Complex64,
    pub nodes_used: usize,
    pub error_estimate: f64,
    pub kind: IntegrandKind,
}

/// `(1 − |λ̃|²)/|e^{iθ} − λ̃|²`.
pub fn poisson_kernel(theta: f64, lambda_tilde: Complex64) -> f64 {
    (1.0 - lambda_tilde.norm_sqr()) / (Complex64::from_polar(1.0, theta) - lambda_tilde).norm_sqr()
}

fn check_interior(lambda_tilde: Complex64) -> Result<()> {
    if lambda_tilde.norm() < 1.0 - EPS_BOUNDARY {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "λ̃ = {lambda_tilde} is not inside the disk"
        )))
    }
}

/// `ln det H` for the Hermitian part of `h`, `Singular` where `det H`
/// vanishes up to roundoff. `reference` is the size of the quantities `h`
/// was computed from when it is a difference of such quantities (`‖ω‖`
/// for `Re ω`), and `0` when `h` carries full relative accuracy.
pub fn log_det_sample(h: &CMatrix, reference: f64, theta: f64) -> Result<Sample> {
    let ev = linalg::hermitian_eigenvalues(h);
    let scale = ev
        .iter()
        .fold(reference, |a, e| a.max(e.abs()))
        .max(f64::MIN_POSITIVE);
    let min = ev.first().copied().unwrap_or(1.0);
    if min > 0.0 && min > CANCELLATION * reference {
        return Ok(Sample::Value(ev.iter().map(|e| e.ln()).sum()));
    }
    if min >= -EPS_NEGATIVE * scale {
        return Ok(Sample::Singular);
    }
    Err(Error::NonIntegrable {
        theta,
        det: ev.iter().product(),
    })
}

/// `−(1/4π)∫ P(θ, λ̃) b(θ) dθ` over `[0, 2π]`.
pub fn poisson_entropy<F>(
    boundary_log_det: F,
    lambda_tilde: Complex64,
    opts: &QuadOptions,
    kind: IntegrandKind,
) -> Result<EntropyValue>
where
    F: Fn(f64) -> Result<Sample>,
{
    check_interior(lambda_tilde)?;
    let r = integrate(
        |t| {
            Ok(match boundary_log_det(t)? {
                Sample::Value(v) => Sample::Value(poisson_kernel(t, lambda_tilde) * v),
                Sample::Singular => Sample::Singular,
            })
        },
        0.0,
        TAU,
        opts,
    )?;
    let w = 1.0 / (4.0 * PI);
    Ok(EntropyValue {
        value: -w * r.value,
        lambda_tilde,
        nodes_used: r.nodes_used,
        error_estimate: w * r.error_estimate,
        kind,
    })
}

/// `ln det Re ω₍⋆₎(e^{iθ})`. The rational boundary value is taken directly
/// at the real point behind `e^{iθ}`; where that fails the radial limit
/// (radius `1 − RADIAL_STEP`, one Richardson step) is used instead.
///
/// A radial sample near a boundary pole of `ω₍⋆₎` picks up a Poisson spike
/// of width about `√RADIAL_STEP`, and `Im φ` formed by subtraction loses its
/// digits there, so the direct value goes through [`Solution::boundary_imag`].
pub fn solution_boundary_log_det(sol: &Solution, theta: f64, star: bool) -> Result<Sample> {
    match sol.boundary_imag(boundary_point(theta, star)) {
        Ok(h) => return log_det_sample(&h, 0.0, theta),
        Err(
            Error::DenominatorSingular { .. }
            | Error::PoleProximity { .. }
            | Error::SingularPhat
            | Error::EvaluationFailure { .. },
        ) => {}
        Err(e) => return Err(e),
    }
    radial_boundary_log_det(sol, theta, star)
}

/// Radial limit of `ln det Re ω₍⋆₎(re^{iθ})` with one Richardson step.
pub fn radial_boundary_log_det(sol: &Solution, theta: f64, star: bool) -> Result<Sample> {
    let at = |r: f64| -> Result<Sample> {
        let lambda = Complex64::from_polar(r, theta);
        let w = if star {
            sol.eval_omega_star(lambda)
        } else {
            sol.eval_omega(lambda)
        };
        match w {
            Ok(w) => log_det_sample(&linalg::hermitian_part(&w), w.norm(), theta),
            Err(Error::SolutionPole { .. } | Error::FramePole { .. }) => Ok(Sample::Singular),
            Err(e) => Err(e),
        }
    };
    match (at(1.0 - RADIAL_STEP)?, at(1.0 - 2.0 * RADIAL_STEP)?) {
        (Sample::Value(a), Sample::Value(b)) => Ok(Sample::Value(2.0 * a - b)),
        _ => Ok(Sample::Singular),
    }
}

/// `E⋆(φ, λ̃)` (or `E(φ, λ̃)` when `star` is false) for the solution.
pub fn entropy_of_solution(
    sol: &Solution,
    lambda_tilde: Complex64,
    star: bool,
    opts: &QuadOptions,
) -> Result<EntropyValue> {
    let kind = if star {
        IntegrandKind::SolutionOmegaStar
    } else {
        IntegrandKind::SolutionOmega
    };
    poisson_entropy(
        |t| solution_boundary_log_det(sol, t, star),
        lambda_tilde,
        opts,
        kind,
    )
}

/// Boundary point of the half-plane: `2tan(θ/2)` for the star map,
/// `−2cot(θ/2)` otherwise.
fn boundary_point(theta: f64, star: bool) -> f64 {
    if star {
        params::star_boundary_point(theta)
    } else {
        -2.0 / (0.5 * theta).tan()
    }
}

fn parameter_sample(value: Result<(CMatrix, f64)>, theta: f64) -> Result<Sample> {
    match value {
        Ok((h, reference)) => log_det_sample(&h, reference, theta),
        Err(Error::PoleProximity { .. } | Error::SingularPhat) => Ok(Sample::Singular),
        Err(e) => Err(e),
    }
}

/// Entropy of the parameter pair, with boundary data `ln det ½(P^*Q + Q^*P)`.
pub fn pair_entropy(
    param: &Parameter,
    lambda_tilde: Complex64,
    star: bool,
    opts: &QuadOptions,
) -> Result<EntropyValue> {
    let kind = match param {
        Parameter::Herglotz(_) => IntegrandKind::ParameterPsi,
        Parameter::Contraction(_) => IntegrandKind::ParameterPair,
    };
    poisson_entropy(
        |t| {
            let h = param.pair_form_real(boundary_point(t, star));
            parameter_sample(h.map(|h| (h, 0.0)), t)
        },
        lambda_tilde,
        opts,
        kind,
    )
}

/// `Ê`: boundary data `ln det(I − φ^*φ)` for the contraction of the parameter.
pub fn contraction_entropy(
    param: &Parameter,
    lambda_tilde: Complex64,
    star: bool,
    opts: &QuadOptions,
) -> Result<EntropyValue> {
    poisson_entropy(
        |t| {
            let h = param.defect_real(boundary_point(t, star));
            parameter_sample(h.map(|h| (h, 0.0)), t)
        },
        lambda_tilde,
        opts,
        IntegrandKind::ContractionEHat,
    )
}

/// `E(ψ)` for a Herglotz parameter, `Ê` for a contraction.
pub fn entropy_of_parameter(
    param: &Parameter,
    lambda_tilde: Complex64,
    star: bool,
    opts: &QuadOptions,
) -> Result<EntropyValue> {
    match param {
        Parameter::Herglotz(_) => pair_entropy(param, lambda_tilde, star, opts),
        Parameter::Contraction(_) => contraction_entropy(param, lambda_tilde, star, opts),
    }
}

/// `λⁿ[c(z) d(z)]` at `z = z(λ)`, written as the polynomial
/// `[0 λⁿI] − (λ + 1)R(λ)S⁻¹ΠJ` with `R = [λ^{n−1}I, −λ^{n−2}I, …, (−1)^{n−1}I]`.
pub fn scaled_lower_row(triple: &StructuredTriple, lambda: Complex64) -> CMatrix {
    let (p, n) = (triple.p, triple.n);
    let mut row = CMatrix::zeros(p, 2 * p);
    let lam_n = lambda.powu(n as u32);
    for d in 0..p {
        row[(d, p + d)] = lam_n;
    }
    let factor = lambda + ONE;
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coef = factor * lambda.powu((n - 1 - k) as u32) * sign;
        row -= triple.s_inv_pi_j.rows(k * p, p) * coef;
    }
    row
}

/// Half-plane point used to evaluate the parameter at `λ`.
fn parameter_point(param: &Parameter, lambda: Complex64) -> Result<Complex64> {
    if param.is_constant() {
        return Ok(c64(0.0, 2.0));
    }
    params::cayley(lambda)
}

/// `q̃(λ) = λ^{pn} det(c(z)P(z) + d(z)Q(z))`, `z = z(λ)`.
pub fn q_tilde(sol: &Solution, lambda: Complex64) -> Result<Complex64> {
    let (pp, qq) = sol.param.pair_at(parameter_point(&sol.param, lambda)?)?;
    let row = scaled_lower_row(&sol.triple, lambda);
    Ok(linalg::det(&(row * linalg::vstack(&pp, &qq))))
}

/// `q̂(λ) = λ^{pn} det(ĉ(z) + d̂(z)φ(z))` with the contraction `φ` of the pair.
pub fn q_hat(sol: &Solution, lambda: Complex64) -> Result<Complex64> {
    let p = sol.p();
    let phi = sol
        .param
        .contraction_at(parameter_point(&sol.param, lambda)?)?;
    let row = scaled_lower_row(&sol.triple, lambda) * w_matrix(p);
    Ok(linalg::det(
        &(row * linalg::vstack(&linalg::identity(p), &phi)),
    ))
}

/// `q̃` straight from the frame; undefined at `λ = 0`.
pub fn q_tilde_frame_form(sol: &Solution, lambda: Complex64) -> Result<Complex64> {
    let z = params::cayley(lambda)?;
    let f = eval_frame(&sol.triple, z)?;
    let (pp, qq) = sol.param.pair_at(z)?;
    let m = (&f.c * &pp + &f.d * &qq) * lambda.powu(sol.n() as u32);
    Ok(linalg::det(&m))
}

/// `q̃(0) = (−1)^{pn} det(YJ[P(2i); Q(2i)])`.
pub fn q_tilde_at_zero(sol: &Solution) -> Result<Complex64> {
    let (pp, qq) = sol.param.pair_at(c64(0.0, 2.0))?;
    let d = linalg::det(&(&sol.y.y * linalg::vstack(&qq, &pp)));
    Ok(if (sol.p() * sol.n()).is_multiple_of(2) { d } else { -d })
}

/// `q(λ) = det(A^* − I/z)·det(cP + dQ)`, which equals `q̃(λ)/(i(λ + 1))^{pn}`.
pub fn q_resolvent_form(sol: &Solution, lambda: Complex64) -> Result<Complex64> {
    let z = params::cayley(lambda)?;
    let (dense, _) = shifted_adjoint_determinant(&sol.triple, lambda)?;
    let f = eval_frame(&sol.triple, z)?;
    let (pp, qq) = sol.param.pair_at(z)?;
    Ok(dense * linalg::det(&(&f.c * &pp + &f.d * &qq)))
}

pub fn q_tilde_zeros(sol: &Solution) -> Result<DiskZeros> {
    disk_zeros(|l| q_tilde(sol, l), 1.0 - EPS_BOUNDARY)
}

pub fn q_hat_zeros(sol: &Solution) -> Result<DiskZeros> {
    disk_zeros(|l| q_hat(sol, l), 1.0 - EPS_BOUNDARY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractiveCheck {
    /// `E(φ̂, −λ̃)`, the same number as `E⋆(φ, λ̃)`.
    pub lhs: f64,
    /// `Ê(φ, −λ̃) + (p ln 2)/2 + ln|q̂(−λ̃)| − ln|B̂(−λ̃)|`.
    pub rhs: f64,
    pub residual: f64,
    /// Distance between the two right-hand sides.
    pub forms_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    #[serde(with = "json::complex")]
    pub lambda_tilde: Complex64,
    /// `E⋆(φ, λ̃)`.
    pub lhs: f64,
    /// `E⋆(ψ, λ̃) + ln|q̃(−λ̃)| − ln|B̃(−λ̃)|`.
    pub rhs: f64,
    pub residual: f64,
    pub parameter_entropy: f64,
    pub contractive: Option<ContractiveCheck>,
    pub contractive_skipped: Option<String>,
}

/// Both forms of the entropy representation at `λ̃`. The contractive form
/// is evaluated at `−λ̃` so that it describes the same point of the
/// half-plane as the starred pair form.
pub fn entropy_identity_check(
    sol: &Solution,
    zeros: &DiskZeros,
    lambda_tilde: Complex64,
    opts: &QuadOptions,
) -> Result<IdentityCheck> {
    let mu = -lambda_tilde;
    let lhs = entropy_of_solution(sol, lambda_tilde, true, opts)?.value;
    let e_psi = pair_entropy(&sol.param, lambda_tilde, true, opts)?.value;
    let rhs = e_psi + q_tilde(sol, mu)?.norm().ln() - blaschke_eval(zeros, mu).norm().ln();

    let (contractive, contractive_skipped) = match Solution::new(
        sol.triple.clone(),
        sol.param.clone(),
        SolutionMode::Contractive,
    ) {
        Ok(hat) => {
            let hat_zeros = q_hat_zeros(&hat)?;
            let c_lhs = entropy_of_solution(&hat, mu, false, opts)?.value;
            let e_hat = contraction_entropy(&hat.param, mu, false, opts)?.value;
            let p = sol.p() as f64;
            let c_rhs = e_hat + 0.5 * p * LN_2 + q_hat(&hat, mu)?.norm().ln()
                - blaschke_eval(&hat_zeros, mu).norm().ln();
            let check = ContractiveCheck {
                lhs: c_lhs,
                rhs: c_rhs,
                residual: (c_lhs - c_rhs).abs(),
                forms_gap: (rhs - c_rhs).abs(),
            };
            (Some(check), None)
        }
        Err(e @ (Error::DegenerateParameter(_) | Error::SingularPhat)) => {
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    Ok(IdentityCheck {
        lambda_tilde,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        parameter_entropy: e_psi,
        contractive,
        contractive_skipped,
    })
}

/// `|ln|D(λ̃)| − (1/2π)∫P ln|D(e^{iθ})| dθ|` for `D = f/B`, `B` the
/// Blaschke product of `zeros`.
pub fn outer_poisson_residual<F>(
    f: F,
    zeros: &DiskZeros,
    lambda_tilde: Complex64,
    opts: &QuadOptions,
) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    check_interior(lambda_tilde)?;
    let r = integrate(
        |t| {
            let v = f(Complex64::from_polar(1.0, t))?.norm();
            Ok(if v > 0.0 {
                Sample::Value(poisson_kernel(t, lambda_tilde) * v.ln())
            } else {
                Sample::Singular
            })
        },
        0.0,
        TAU,
        opts,
    )?;
    let direct = f(lambda_tilde)?.norm().ln() - blaschke_eval(zeros, lambda_tilde).norm().ln();
    Ok((direct - r.value / TAU).abs())
}

/// Outer-function check for `D = q̃/B̃`.
pub fn outer_poisson_check(
    sol: &Solution,
    zeros: &DiskZeros,
    lambda_tilde: Complex64,
    opts: &QuadOptions,
) -> Result<f64> {
    outer_poisson_residual(|l| q_tilde(sol, l), zeros, lambda_tilde, opts)
}

/// `(θ, ln det Re ω⋆(e^{iθ}))` on a uniform grid; `NaN` where undefined.
pub fn entropy_trace(sol: &Solution, count: usize) -> Result<Vec<(f64, f64)>> {
    (0..count)
        .map(|k| {
            let theta = TAU * (k as f64 + 0.5) / count as f64;
            Ok(match solution_boundary_log_det(sol, theta, true)? {
                Sample::Value(v) => (theta, v),
                Sample::Singular => (theta, f64::NAN),
            })
        })
        .collect()
}

/// `ψ(z) = z + iI`; a non-constant parameter for examples and tests.
pub fn linear_herglotz(p: usize) -> Parameter {
    let mut h = params::HerglotzSpec::constant_i(p);
    h.b = linalg::identity(p);
    Parameter::Herglotz(h)
}
