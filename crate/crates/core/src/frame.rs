//! The frame `U(z)`, its rotation `Û = UW`, and the linear fractional
//! solutions built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, I, ONE};
use crate::params::{self, w_matrix, HerglotzSpec, Parameter};
use crate::toeplitz::{last_row_frame, StructuredTriple, YMatrix};
use crate::Complex64;

pub const EPS_DET: f64 = 1e-8;
pub const EPS_DENOMINATOR: f64 = 1e-12;

const TWO_I: Complex64 = Complex64::new(0.0, 2.0);
/// Points closer than this to `2i` are evaluated through a circle mean.
const POLE_BYPASS: f64 = 1e-6;
const MEAN_RADIUS: f64 = 1e-3;
const MEAN_NODES: usize = 8;

#[derive(Debug, Clone)]
pub struct FrameEvaluation {
    pub z: Complex64,
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    pub d: CMatrix,
    pub a_hat: CMatrix,
    pub b_hat: CMatrix,
    pub c_hat: CMatrix,
    pub d_hat: CMatrix,
}

impl FrameEvaluation {
    fn from_u(z: Complex64, u: &CMatrix, p: usize) -> Self {
        let uh = u * w_matrix(p);
        let blk = |m: &CMatrix, i, j| linalg::block(m, i, j, p);
        FrameEvaluation {
            z,
            a: blk(u, 0, 0),
            b: blk(u, 0, 1),
            c: blk(u, 1, 0),
            d: blk(u, 1, 1),
            a_hat: blk(&uh, 0, 0),
            b_hat: blk(&uh, 0, 1),
            c_hat: blk(&uh, 1, 0),
            d_hat: blk(&uh, 1, 1),
        }
    }

    pub fn u(&self) -> CMatrix {
        linalg::vstack(
            &linalg::hstack(&self.a, &self.b),
            &linalg::hstack(&self.c, &self.d),
        )
    }

    pub fn u_hat(&self) -> CMatrix {
        linalg::vstack(
            &linalg::hstack(&self.a_hat, &self.b_hat),
            &linalg::hstack(&self.c_hat, &self.d_hat),
        )
    }

    /// The bottom block row `[c d]`.
    pub fn lower_row(&self) -> CMatrix {
        linalg::hstack(&self.c, &self.d)
    }
}

/// `U(z) = I − izΠ^*(I − zA^*)⁻¹S⁻¹ΠJ`.
pub fn eval_frame(triple: &StructuredTriple, z: Complex64) -> Result<FrameEvaluation> {
    let p = triple.p;
    if z.norm() == 0.0 {
        return Ok(FrameEvaluation::from_u(z, &linalg::identity(2 * p), p));
    }
    // (I − zA^*) is upper triangular with diagonal 1 + iz/2.
    if (ONE + I * z * 0.5).norm() <= 1e-13 {
        return Err(Error::FramePole { z });
    }
    let m = triple.dim();
    let shifted = linalg::identity(m) - triple.a.adjoint() * z;
    let x = shifted
        .solve_upper_triangular(&triple.s_inv_pi_j)
        .ok_or(Error::FramePole { z })?;
    let u = linalg::identity(2 * p) - triple.pi.adjoint() * x * (I * z);
    Ok(FrameEvaluation::from_u(z, &u, p))
}

/// `‖U(z̄)^*JU(z) − J‖_F / max(1, ‖U(z̄)‖_F‖U(z)‖_F)`.
pub fn j_unitarity_residual(triple: &StructuredTriple, z: Complex64) -> Result<f64> {
    let u = eval_frame(triple, z)?.u();
    let uc = eval_frame(triple, z.conj())?.u();
    let scale = (uc.norm() * u.norm()).max(1.0);
    Ok((uc.adjoint() * &triple.j * &u - &triple.j).norm() / scale)
}

/// Outcome of the three nondegeneracy tests for a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    /// `det(YJ[P(2i); Q(2i)]) ≠ 0`.
    pub at_upper: bool,
    /// `det(c(−2i)P(2i)^* − d(−2i)Q(2i)^*) ≠ 0`.
    pub at_lower: bool,
    /// `det(YJW[I; φ(2i)]) ≠ 0` for the attached contraction `φ`.
    pub contractive: bool,
    pub upper_det: [f64; 2],
    pub lower_det: [f64; 2],
    pub threshold: f64,
}

pub fn degeneracy_conditions(
    triple: &StructuredTriple,
    y: &YMatrix,
    param: &Parameter,
) -> Result<Nondegeneracy> {
    let p = triple.p;
    let (pp, qq) = param.pair_at(TWO_I).map_err(|e| Error::EvaluationFailure {
        z: TWO_I,
        reason: e.to_string(),
    })?;
    let pq = linalg::vstack(&pp, &qq);
    let yj = &y.y * &triple.j;
    let upper = linalg::det(&(&yj * &pq));

    let lower_frame = eval_frame(triple, -TWO_I)?;
    let lower = linalg::det(&(&lower_frame.c * pp.adjoint() - &lower_frame.d * qq.adjoint()));

    let factor = linalg::spectral_norm(&y.y).max(linalg::spectral_norm(&lower_frame.lower_row()));
    let threshold = EPS_DET * (factor * linalg::spectral_norm(&pq)).powi(p as i32);
    let at_upper = upper.norm() > threshold;
    let at_lower = lower.norm() > threshold;
    if at_upper != at_lower {
        return Err(Error::InconsistentConditions {
            upper: at_upper,
            lower: at_lower,
        });
    }

    let contractive = match param.contraction_at(TWO_I) {
        Ok(phi) => {
            let wv = w_matrix(p) * linalg::vstack(&linalg::identity(p), &phi);
            let det = linalg::det(&(&yj * &wv));
            let scale = (linalg::spectral_norm(&y.y) * linalg::spectral_norm(&wv)).powi(p as i32);
            det.norm() > EPS_DET * scale
        }
        Err(Error::SingularPhat) => false,
        Err(e) => return Err(e),
    };
    Ok(Nondegeneracy {
        at_upper,
        at_lower,
        contractive,
        upper_det: [upper.re, upper.im],
        lower_det: [lower.re, lower.im],
        threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionMode {
    /// `φ = i(aP + bQ)(cP + dQ)⁻¹`.
    Pair,
    /// `φ̂ = i(â + b̂φ)(ĉ + d̂φ)⁻¹` with the contraction `φ` of the pair.
    Contractive,
}

/// A member of the solution family for fixed data and parameter.
#[derive(Debug, Clone)]
pub struct Solution {
    pub triple: StructuredTriple,
    pub y: YMatrix,
    pub param: Parameter,
    pub mode: SolutionMode,
    pub conditions: Nondegeneracy,
}

impl Solution {
    pub fn new(triple: StructuredTriple, param: Parameter, mode: SolutionMode) -> Result<Self> {
        param.validate()?;
        if param.p() != triple.p {
            return Err(Error::InvalidInput(format!(
                "parameter is {0}x{0}, data blocks are {1}x{1}",
                param.p(),
                triple.p
            )));
        }
        let y = last_row_frame(&triple)?;
        let conditions = degeneracy_conditions(&triple, &y, &param)?;
        let ok = match mode {
            SolutionMode::Pair => conditions.at_upper,
            SolutionMode::Contractive => conditions.contractive,
        };
        if !ok {
            return Err(Error::DegenerateParameter(format!(
                "determinant at 2i is {:.3e}, threshold {:.3e}",
                Complex64::new(conditions.upper_det[0], conditions.upper_det[1]).norm(),
                conditions.threshold
            )));
        }
        Ok(Solution {
            triple,
            y,
            param,
            mode,
            conditions,
        })
    }

    pub fn p(&self) -> usize {
        self.triple.p
    }

    pub fn n(&self) -> usize {
        self.triple.n
    }

    /// Numerator and denominator of the fractional map at `z`, with the
    /// scale used to judge the denominator.
    pub fn fraction(&self, z: Complex64) -> Result<(CMatrix, CMatrix, f64)> {
        let f = eval_frame(&self.triple, z)?;
        match self.mode {
            SolutionMode::Pair => {
                let (pp, qq) = self.param.pair_at(z)?;
                let num = &f.a * &pp + &f.b * &qq;
                let den = &f.c * &pp + &f.d * &qq;
                let scale = f.lower_row().norm() * linalg::vstack(&pp, &qq).norm();
                Ok((num, den, scale))
            }
            SolutionMode::Contractive => {
                let phi = self.param.contraction_at(z)?;
                let num = &f.a_hat + &f.b_hat * &phi;
                let den = &f.c_hat + &f.d_hat * &phi;
                let scale = linalg::hstack(&f.c_hat, &f.d_hat).norm() * (1.0 + phi.norm());
                Ok((num, den, scale))
            }
        }
    }

    /// The denominator `cP + dQ` (or `ĉ + d̂φ`) at `z`.
    pub fn denominator(&self, z: Complex64) -> Result<CMatrix> {
        Ok(self.fraction(z)?.1)
    }

    fn eval_direct(&self, z: Complex64) -> Result<CMatrix> {
        let (num, den, scale) = self.fraction(z)?;
        let sv = linalg::singular_values(&den);
        if sv.last().is_none_or(|&s| s <= EPS_DENOMINATOR * scale) {
            return Err(Error::DenominatorSingular { z });
        }
        let inv = linalg::inverse(&den).ok_or(Error::DenominatorSingular { z })?;
        Ok(num * inv * I)
    }

    /// `Im φ(x)` on the real line from the J-unitarity of `U(x)`:
    /// `D⁻*·½(P^*Q + Q^*P)·D⁻¹` with `D = cP + dQ`, or
    /// `½D̂⁻*(I − φ^*φ)D̂⁻¹` in the contractive form. No cancellation where
    /// `φ` is large.
    pub fn boundary_imag(&self, x: f64) -> Result<CMatrix> {
        let z = c64(x, 0.0);
        let (_, den, scale) = self.fraction(z)?;
        let sv = linalg::singular_values(&den);
        if sv.last().is_none_or(|&s| s <= EPS_DENOMINATOR * scale) {
            return Err(Error::DenominatorSingular { z });
        }
        let inv = linalg::inverse(&den).ok_or(Error::DenominatorSingular { z })?;
        let middle = match self.mode {
            SolutionMode::Pair => self.param.pair_form_real(x)?,
            SolutionMode::Contractive => self.param.defect_real(x)? * c64(0.5, 0.0),
        };
        Ok(inv.adjoint() * middle * inv)
    }

    /// `φ(z)`; in the lower half-plane `φ(z) := φ(z̄)^*`.
    pub fn eval(&self, z: Complex64) -> Result<CMatrix> {
        if z.im < 0.0 {
            return Ok(self.eval(z.conj())?.adjoint());
        }
        if (z - TWO_I).norm() < POLE_BYPASS {
            // φ is analytic at 2i although U is not; use the mean value.
            return circle_mean(z, MEAN_RADIUS, |w| self.eval_direct(w));
        }
        self.eval_direct(z)
    }

    /// `ω⋆(λ) = −iφ(2i(1 − λ)/(1 + λ))`.
    pub fn eval_omega_star(&self, lambda: Complex64) -> Result<CMatrix> {
        let z = params::star_point(lambda)?;
        match self.eval(z) {
            Ok(v) => Ok(v * (-I)),
            Err(Error::DenominatorSingular { .. }) => Err(Error::SolutionPole { lambda }),
            Err(e) => Err(e),
        }
    }

    /// `ω(λ) = −iφ(z(λ))`.
    pub fn eval_omega(&self, lambda: Complex64) -> Result<CMatrix> {
        let z = params::cayley(lambda)?;
        match self.eval(z) {
            Ok(v) => Ok(v * (-I)),
            Err(Error::DenominatorSingular { .. }) => Err(Error::SolutionPole { lambda }),
            Err(e) => Err(e),
        }
    }

    /// Residual of `(cP + dQ)⁻¹ = Q⁻¹[I 0]U(z̄)^*[I; −iφ(z)]`, which for
    /// `Q = iI` reads `−[I 0]U(z̄)^*[iI; φ(z)]`.
    pub fn inverse_denominator_residual(&self, z: Complex64) -> Result<f64> {
        if self.mode != SolutionMode::Pair {
            return Err(Error::InvalidInput("defined for the pair form".into()));
        }
        let p = self.p();
        let phi = self.eval_direct(z)?;
        let (_, qq) = self.param.pair_at(z)?;
        let den = self.denominator(z)?;
        let uc = eval_frame(&self.triple, z.conj())?.u();
        let top = uc.adjoint().rows(0, p).into_owned();
        let v = linalg::vstack(&linalg::identity(p), &(phi * (-I)));
        let q_inv = linalg::inverse(&qq).ok_or(Error::DenominatorSingular { z })?;
        let lhs = q_inv * top * v;
        let rhs = linalg::inverse(&den).ok_or(Error::DenominatorSingular { z })?;
        Ok(linalg::rel_diff(&lhs, &rhs))
    }
}

/// Mean of an analytic matrix function over a circle; equals the central value.
pub fn circle_mean<F>(center: Complex64, radius: f64, f: F) -> Result<CMatrix>
where
    F: Fn(Complex64) -> Result<CMatrix>,
{
    let mut acc: Option<CMatrix> = None;
    for k in 0..MEAN_NODES {
        let w = center
            + Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / MEAN_NODES as f64);
        let v = f(w)?;
        acc = Some(match acc {
            Some(a) => a + v,
            None => v,
        });
    }
    Ok(acc.expect("nodes") / c64(MEAN_NODES as f64, 0.0))
}

/// `G(z) = I − (iΦ₁^* − ψ(1/z̄)^*Φ₂^*)S⁻¹(A − zI)⁻¹Φ₂`.
pub fn g_function(triple: &StructuredTriple, psi: &HerglotzSpec, z: Complex64) -> Result<CMatrix> {
    if z.norm() == 0.0 {
        return Err(Error::InvalidInput("G needs z ≠ 0".into()));
    }
    if (z - c64(0.0, 0.5)).norm() <= 1e-13 {
        return Err(Error::PoleHit { z });
    }
    let p = triple.p;
    let psi_v = psi.eval(z.conj().inv())?;
    let m = triple.dim();
    let col = (&triple.a - linalg::identity(m) * z)
        .solve_lower_triangular(&triple.phi2)
        .ok_or(Error::PoleHit { z })?;
    let row = triple.phi1.adjoint() * I - psi_v.adjoint() * triple.phi2.adjoint();
    Ok(linalg::identity(p) - row * &triple.s_inv * col)
}

/// Residual of `c(z)ψ(z) + i d(z) = i G(1/z̄)^*`.
pub fn g_identity_residual(
    triple: &StructuredTriple,
    psi: &HerglotzSpec,
    z: Complex64,
) -> Result<f64> {
    let f = eval_frame(triple, z)?;
    let lhs = &f.c * psi.eval(z)? + &f.d * I;
    let rhs = g_function(triple, psi, z.conj().inv())?.adjoint() * I;
    Ok(linalg::rel_diff(&lhs, &rhs))
}

/// `A_ψ = A − Φ₂(iΦ₁^* − v^*Φ₂^*)S⁻¹` for a parameter value `v = ψ(1/z̄)`.
pub fn a_psi_matrix(triple: &StructuredTriple, psi_value: &CMatrix) -> CMatrix {
    let row = triple.phi1.adjoint() * I - psi_value.adjoint() * triple.phi2.adjoint();
    &triple.a - &triple.phi2 * row * &triple.s_inv
}

/// Relative residual of `A_ψS − SA_ψ^* = Φ₂(v^* − v)Φ₂^*`.
pub fn a_psi_residual(triple: &StructuredTriple, psi_value: &CMatrix) -> f64 {
    let ap = a_psi_matrix(triple, psi_value);
    let lhs = &ap * &triple.s - &triple.s * ap.adjoint();
    let rhs = &triple.phi2 * (psi_value.adjoint() - psi_value) * triple.phi2.adjoint();
    (lhs - &rhs).norm() / (triple.s.norm() * ap.norm()).max(1.0)
}
