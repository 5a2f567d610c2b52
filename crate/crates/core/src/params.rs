//! Parameter functions of the solution family and the Cayley maps.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, I, ONE};
use crate::{json, Complex64};

pub const EPS_POLE: f64 = 1e-9;
pub const EPS_CONTRACTION: f64 = 1e-8;
const EPS_PSD: f64 = 1e-10;

/// Rational Herglotz function `ψ(z) = Bz + C + iD + Σ M_k (t_k − z)⁻¹`
/// with `B, D, M_k ⪰ 0`, `C` Hermitian and real poles `t_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerglotzSpec {
    #[serde(rename = "B", with = "json::matrix")]
    pub b: CMatrix,
    #[serde(rename = "C", with = "json::matrix")]
    pub c: CMatrix,
    #[serde(with = "json::matrix")]
    pub imag_offset: CMatrix,
    #[serde(default)]
    pub poles: Vec<f64>,
    #[serde(default, with = "json::matrix_list")]
    pub residues: Vec<CMatrix>,
}

/// Constant strict contraction `φ ≡ phi0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionSpec {
    #[serde(with = "json::matrix")]
    pub phi0: CMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Herglotz(HerglotzSpec),
    Contraction(ContractionSpec),
}

impl HerglotzSpec {
    /// `ψ ≡ C + iD`.
    pub fn constant(c: CMatrix, d: CMatrix) -> Self {
        let p = c.nrows();
        HerglotzSpec {
            b: CMatrix::zeros(p, p),
            c,
            imag_offset: d,
            poles: Vec::new(),
            residues: Vec::new(),
        }
    }

    /// `ψ ≡ iI_p`.
    pub fn constant_i(p: usize) -> Self {
        Self::constant(CMatrix::zeros(p, p), linalg::identity(p))
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_constant(&self) -> bool {
        self.b.iter().all(|z| *z == linalg::ZERO) && self.poles.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if p == 0 {
            return Err(Error::InvalidInput("Herglotz parameter of size 0".into()));
        }
        for (name, m) in [
            ("B", &self.b),
            ("C", &self.c),
            ("imag_offset", &self.imag_offset),
        ] {
            if m.shape() != (p, p) {
                return Err(Error::InvalidInput(format!("{name} must be {p}x{p}")));
            }
            json::ensure_finite(m, name)?;
            if !linalg::is_hermitian(m, 1e-12) {
                return Err(Error::NonHermitianInput(name.into()));
            }
        }
        if self.poles.len() != self.residues.len() {
            return Err(Error::InvalidInput(
                "poles and residues differ in length".into(),
            ));
        }
        for (k, (&t, m)) in self.poles.iter().zip(&self.residues).enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidInput(format!("pole {k} is not finite")));
            }
            if self.poles[..k].iter().any(|&s| (s - t).abs() <= EPS_POLE) {
                return Err(Error::InvalidInput(format!(
                    "pole {k} repeats an earlier pole"
                )));
            }
            if m.shape() != (p, p) || !linalg::is_hermitian(m, 1e-12) {
                return Err(Error::NonHermitianInput(format!("residue {k}")));
            }
        }
        let psd = std::iter::once(("B", &self.b))
            .chain(std::iter::once(("imag_offset", &self.imag_offset)))
            .chain(self.residues.iter().map(|m| ("residue", m)));
        for (name, m) in psd {
            let ev = linalg::hermitian_eigenvalues(m);
            let scale = ev.iter().fold(0.0f64, |a, e| a.max(e.abs()));
            if ev.first().is_some_and(|&e| e < -EPS_PSD * scale.max(1.0)) {
                return Err(Error::InvalidInput(format!(
                    "{name} is not positive semidefinite"
                )));
            }
        }
        let negatives = pick_kernel_negative_squares(|z| self.eval(z), &pick_points(6, 0x5eed))?;
        if negatives > 0 {
            return Err(Error::InvalidInput(format!(
                "Pick kernel has {negatives} negative squares"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex64) -> Result<CMatrix> {
        let mut out = &self.b * z + &self.c + &self.imag_offset * I;
        for (&t, m) in self.poles.iter().zip(&self.residues) {
            let gap = c64(t, 0.0) - z;
            if gap.norm() <= EPS_POLE {
                return Err(Error::PoleProximity { z });
            }
            out += m * gap.inv();
        }
        Ok(out)
    }
}

impl ContractionSpec {
    pub fn p(&self) -> usize {
        self.phi0.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi0.is_square() || self.phi0.nrows() == 0 {
            return Err(Error::InvalidInput(
                "phi0 must be square and nonempty".into(),
            ));
        }
        json::ensure_finite(&self.phi0, "phi0")?;
        let norm = linalg::spectral_norm(&self.phi0);
        if norm > 1.0 - EPS_CONTRACTION {
            return Err(Error::NotContractive { norm });
        }
        Ok(())
    }
}

impl Parameter {
    pub fn p(&self) -> usize {
        match self {
            Parameter::Herglotz(h) => h.p(),
            Parameter::Contraction(c) => c.p(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Parameter::Herglotz(h) => h.validate(),
            Parameter::Contraction(c) => c.validate(),
        }
    }

    /// The pair `(P(z), Q(z))`: `(ψ(z), iI)` for a Herglotz parameter and
    /// `W[I; φ₀]` for a contraction.
    pub fn pair_at(&self, z: Complex64) -> Result<(CMatrix, CMatrix)> {
        match self {
            Parameter::Herglotz(h) => Ok((h.eval(z)?, linalg::scalar_matrix(h.p(), I))),
            Parameter::Contraction(c) => Ok(contraction_to_pair(&c.phi0)),
        }
    }

    /// The contraction attached to the pair at `z`.
    pub fn contraction_at(&self, z: Complex64) -> Result<CMatrix> {
        match self {
            Parameter::Herglotz(_) => {
                let (p, q) = self.pair_at(z)?;
                pair_to_contraction(&p, &q)
            }
            Parameter::Contraction(c) => Ok(c.phi0.clone()),
        }
    }

    /// `½(P^*Q + Q^*P)` at a real point; `Im ψ(x)` for a Herglotz parameter.
    pub fn pair_form_real(&self, x: f64) -> Result<CMatrix> {
        match self {
            Parameter::Herglotz(h) => Ok(linalg::imaginary_part(&h.eval(c64(x, 0.0))?)),
            Parameter::Contraction(c) => {
                let id = linalg::identity(c.p());
                Ok((id - c.phi0.adjoint() * &c.phi0) * c64(0.5, 0.0))
            }
        }
    }

    /// `I − φ^*φ` at a real point. For a Herglotz parameter this is
    /// `(ψ + iI)⁻*·4Im ψ·(ψ + iI)⁻¹`, which keeps its digits where `|φ| → 1`.
    pub fn defect_real(&self, x: f64) -> Result<CMatrix> {
        match self {
            Parameter::Herglotz(h) => {
                let psi = h.eval(c64(x, 0.0))?;
                let inv = linalg::inverse(&(&psi + linalg::scalar_matrix(h.p(), I)))
                    .ok_or(Error::SingularPhat)?;
                Ok(inv.adjoint() * linalg::imaginary_part(&psi) * c64(4.0, 0.0) * inv)
            }
            Parameter::Contraction(c) => Ok(linalg::identity(c.p()) - c.phi0.adjoint() * &c.phi0),
        }
    }

    /// Values are independent of `z`.
    pub fn is_constant(&self) -> bool {
        match self {
            Parameter::Herglotz(h) => h.is_constant(),
            Parameter::Contraction(_) => true,
        }
    }
}

/// `W = (1/√2) [[I, −I], [I, I]]`.
pub fn w_matrix(p: usize) -> CMatrix {
    let s = c64(FRAC_1_SQRT_2, 0.0);
    let id = linalg::identity(p) * s;
    linalg::vstack(&linalg::hstack(&id, &(-&id)), &linalg::hstack(&id, &id))
}

/// `(P̂, Q̂) = W⁻¹(P, Q)` and `φ = Q̂ P̂⁻¹ = (Q − P)(P + Q)⁻¹`.
pub fn pair_to_contraction(p: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let s = c64(FRAC_1_SQRT_2, 0.0);
    let p_hat = (p + q) * s;
    let q_hat = (q - p) * s;
    let scale = p.norm().max(q.norm()).max(f64::MIN_POSITIVE);
    let sv = linalg::singular_values(&p_hat);
    if sv.last().is_none_or(|&smin| smin <= 1e-12 * scale) {
        return Err(Error::SingularPhat);
    }
    let inv = linalg::inverse(&p_hat).ok_or(Error::SingularPhat)?;
    Ok(q_hat * inv)
}

/// `W[I; φ] = ((I − φ)/√2, (I + φ)/√2)`.
pub fn contraction_to_pair(phi: &CMatrix) -> (CMatrix, CMatrix) {
    let s = c64(FRAC_1_SQRT_2, 0.0);
    let id = linalg::identity(phi.nrows());
    ((&id - phi) * s, (&id + phi) * s)
}

/// Möbius maps between the unit disk and the upper half-plane with `υ = 2i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMaps {
    #[serde(with = "json::complex")]
    pub upsilon: Complex64,
}

impl Default for MoebiusMaps {
    fn default() -> Self {
        MoebiusMaps {
            upsilon: c64(0.0, 2.0),
        }
    }
}

impl MoebiusMaps {
    /// `z(λ) = (ῡλ − υ)/(λ − 1)`.
    pub fn cayley(&self, lambda: Complex64) -> Result<Complex64> {
        let den = lambda - ONE;
        if den.norm() <= 1e-14 {
            return Err(Error::BoundaryPole { lambda });
        }
        Ok((self.upsilon.conj() * lambda - self.upsilon) / den)
    }

    /// `λ(z) = (z − υ)/(z − ῡ)`.
    pub fn cayley_inverse(&self, z: Complex64) -> Result<Complex64> {
        let den = z - self.upsilon.conj();
        if den.norm() <= 1e-14 * (1.0 + z.norm()) {
            return Err(Error::InvalidInput(format!(
                "z = {z} is the image of infinity"
            )));
        }
        Ok((z - self.upsilon) / den)
    }

    /// `ξ(θ) = z(e^{iθ})`, real on the circle.
    pub fn boundary_xi(&self, theta: f64) -> Result<f64> {
        let e = Complex64::from_polar(1.0, theta);
        if (e - ONE).norm() <= 1e-12 {
            return Err(Error::BoundaryPole { lambda: e });
        }
        let xi = (self.upsilon.conj() * e - self.upsilon) / (e - ONE);
        if xi.im.abs() > 1e-12 * xi.re.abs().max(1.0) {
            return Err(Error::Internal(format!("boundary point {xi} is not real")));
        }
        Ok(xi.re)
    }
}

pub fn cayley(lambda: Complex64) -> Result<Complex64> {
    MoebiusMaps::default().cayley(lambda)
}

pub fn cayley_inverse(z: Complex64) -> Result<Complex64> {
    MoebiusMaps::default().cayley_inverse(z)
}

pub fn boundary_xi(theta: f64) -> Result<f64> {
    MoebiusMaps::default().boundary_xi(theta)
}

/// `z(−λ) = 2i(1 − λ)/(1 + λ)`, the point where `ω⋆(λ) = −iφ(z)`.
pub fn star_point(lambda: Complex64) -> Result<Complex64> {
    cayley(-lambda)
}

/// `ξ(θ + π) = 2 tan(θ/2)`, the real point behind `ω⋆(e^{iθ})`.
pub fn star_boundary_point(theta: f64) -> f64 {
    2.0 * (theta / 2.0).tan()
}

/// Sample points in the upper half-plane for Pick-kernel tests.
pub fn pick_points(count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| c64(rng.random_range(-3.0..3.0), rng.random_range(0.2..3.0)))
        .collect()
}

/// Negative squares of the Nevanlinna kernel `(f(z_i) − f(z_j)^*)/(z_i − z̄_j)`
/// on the given points; eigenvalues below `−1e-9‖K‖` count as negative.
pub fn pick_kernel_negative_squares<F>(f: F, points: &[Complex64]) -> Result<usize>
where
    F: Fn(Complex64) -> Result<CMatrix>,
{
    let values: Vec<CMatrix> = points.iter().map(|&z| f(z)).collect::<Result<_>>()?;
    let Some(p) = values.first().map(|v| v.nrows()) else {
        return Ok(0);
    };
    let m = points.len();
    let mut kernel = CMatrix::zeros(m * p, m * p);
    for i in 0..m {
        for j in 0..m {
            let den = points[i] - points[j].conj();
            let blk = (&values[i] - values[j].adjoint()) / den;
            linalg::set_block(&mut kernel, i, j, &blk);
        }
    }
    let ev = linalg::hermitian_eigenvalues(&kernel);
    let scale = ev.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    Ok(ev.iter().filter(|&&e| e < -1e-9 * scale).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar(z: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, z)
    }

    #[test]
    fn herglotz_examples() {
        let psi = HerglotzSpec::constant_i(2);
        assert_eq!(
            psi.eval(c64(3.0, -1.0)).unwrap(),
            linalg::scalar_matrix(2, I)
        );

        let lin = HerglotzSpec {
            b: scalar(ONE),
            ..HerglotzSpec::constant(scalar(c64(0.0, 0.0)), scalar(c64(0.0, 0.0)))
        };
        assert_abs_diff_eq!(lin.eval(c64(1.0, 1.0)).unwrap()[(0, 0)].im, 1.0);

        let pole = HerglotzSpec {
            poles: vec![1.0],
            residues: vec![scalar(ONE)],
            ..HerglotzSpec::constant(scalar(c64(0.0, 0.0)), scalar(c64(0.0, 0.0)))
        };
        let v = pole.eval(I).unwrap()[(0, 0)];
        assert!((v - c64(0.5, 0.5)).norm() < 1e-15);
        assert!(matches!(
            pole.eval(c64(1.0, 0.0)),
            Err(Error::PoleProximity { .. })
        ));
        pole.validate().unwrap();
    }

    #[test]
    fn negative_residue_rejected() {
        let bad = HerglotzSpec {
            poles: vec![0.5],
            residues: vec![scalar(c64(-1.0, 0.0))],
            ..HerglotzSpec::constant_i(1)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn contraction_examples() {
        let phi = pair_to_contraction(&linalg::scalar_matrix(2, I), &linalg::scalar_matrix(2, I))
            .unwrap();
        assert!(phi.norm() < 1e-15);
        let phi = pair_to_contraction(&linalg::identity(1), &CMatrix::zeros(1, 1)).unwrap();
        assert!((phi[(0, 0)] + ONE).norm() < 1e-15);
        assert!(matches!(
            pair_to_contraction(&linalg::identity(1), &(-linalg::identity(1))),
            Err(Error::SingularPhat)
        ));
    }

    #[test]
    fn w_maps_j_to_signature() {
        let p = 3;
        let w = w_matrix(p);
        let z = CMatrix::zeros(p, p);
        let id = linalg::identity(p);
        let j = linalg::vstack(&linalg::hstack(&z, &id), &linalg::hstack(&id, &z));
        let sig = linalg::vstack(&linalg::hstack(&id, &z), &linalg::hstack(&z, &(-&id)));
        assert!((w.adjoint() * j * &w - sig).norm() <= 1e-15);
    }

    #[test]
    fn cayley_examples() {
        assert!((cayley(c64(0.0, 0.0)).unwrap() - c64(0.0, 2.0)).norm() < 1e-15);
        assert!(cayley(c64(-1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(matches!(cayley(ONE), Err(Error::BoundaryPole { .. })));
        assert_abs_diff_eq!(
            boundary_xi(std::f64::consts::PI).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            boundary_xi(std::f64::consts::FRAC_PI_2).unwrap(),
            -2.0,
            epsilon = 1e-14
        );
        assert!(boundary_xi(0.0).is_err());
    }

    #[test]
    fn star_boundary_matches_shifted_xi() {
        for k in 1..50 {
            let theta = 0.1 + 0.05 * k as f64;
            let a = star_boundary_point(theta);
            let b = boundary_xi(theta + std::f64::consts::PI).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
