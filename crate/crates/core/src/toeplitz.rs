//! Hermitian block Toeplitz data and its structured triple.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, I, ONE};
use crate::{json, params, Complex64};

pub const EPS_INERTIA: f64 = 1e-10;
pub const EPS_RANK: f64 = 1e-12;
const EPS_HERMITIAN: f64 = 1e-10;

/// Blocks `s₀ … s_{n−1}` of `S(n) = {s_{j−i}}` (with `s_{−k} = s_k^*`) and the shift `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzSpec {
    pub p: usize,
    pub n: usize,
    #[serde(with = "json::matrix")]
    pub nu: CMatrix,
    #[serde(with = "json::matrix_list")]
    pub blocks: Vec<CMatrix>,
}

impl ToeplitzSpec {
    pub fn new(blocks: Vec<CMatrix>, nu: CMatrix) -> Result<Self> {
        let p = blocks.first().map_or(0, |b| b.nrows());
        let spec = ToeplitzSpec {
            p,
            n: blocks.len(),
            nu,
            blocks,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Scalar (`p = 1`) real data with `ν = 0`.
    pub fn scalar(values: &[f64]) -> Result<Self> {
        let blocks = values
            .iter()
            .map(|&v| CMatrix::from_element(1, 1, c64(v, 0.0)))
            .collect();
        Self::new(blocks, CMatrix::zeros(1, 1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(Error::InvalidInput("p and n must be positive".into()));
        }
        if self.blocks.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "expected {} blocks, got {}",
                self.n,
                self.blocks.len()
            )));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if b.shape() != (self.p, self.p) {
                return Err(Error::InvalidInput(format!(
                    "block {k} is not {0}x{0}",
                    self.p
                )));
            }
            json::ensure_finite(b, "block")?;
        }
        if self.nu.shape() != (self.p, self.p) {
            return Err(Error::InvalidInput(format!("nu is not {0}x{0}", self.p)));
        }
        json::ensure_finite(&self.nu, "nu")?;
        if !linalg::is_hermitian(&self.blocks[0], EPS_HERMITIAN) {
            return Err(Error::NonHermitianInput("s0".into()));
        }
        if !linalg::is_hermitian(&self.nu, EPS_HERMITIAN) {
            return Err(Error::NonHermitianInput("nu".into()));
        }
        Ok(())
    }

    /// `s_k` for any integer `k`, using `s_{−k} = s_k^*`.
    pub fn s(&self, k: isize) -> CMatrix {
        if k >= 0 {
            self.blocks[k as usize].clone()
        } else {
            self.blocks[(-k) as usize].adjoint()
        }
    }

    pub fn toeplitz_matrix(&self) -> CMatrix {
        let (p, n) = (self.p, self.n);
        let mut s = CMatrix::zeros(p * n, p * n);
        for i in 0..n {
            for j in 0..n {
                linalg::set_block(&mut s, i, j, &self.s(j as isize - i as isize));
            }
        }
        // s₀ is Hermitian only within tolerance; make S exactly Hermitian.
        linalg::hermitian_part(&s)
    }

    /// The leading `i` blocks.
    pub fn truncated(&self, i: usize) -> ToeplitzSpec {
        ToeplitzSpec {
            p: self.p,
            n: i,
            nu: self.nu.clone(),
            blocks: self.blocks[..i].to_vec(),
        }
    }
}

/// Solution of `AS − SA^* = iΠJΠ^*` for block Toeplitz `S`.
#[derive(Debug, Clone)]
pub struct StructuredTriple {
    pub spec: ToeplitzSpec,
    pub p: usize,
    pub n: usize,
    pub a: CMatrix,
    pub phi1: CMatrix,
    pub phi2: CMatrix,
    pub pi: CMatrix,
    pub j: CMatrix,
    pub s: CMatrix,
    pub s_inv: CMatrix,
    pub kappa: usize,
    pub theta_count: usize,
    /// `S⁻¹ΠJ`, reused by every frame evaluation.
    pub s_inv_pi_j: CMatrix,
}

/// `J = [[0, I], [I, 0]]`.
pub fn j_matrix(p: usize) -> CMatrix {
    let z = CMatrix::zeros(p, p);
    let id = linalg::identity(p);
    linalg::vstack(&linalg::hstack(&z, &id), &linalg::hstack(&id, &z))
}

pub fn build_structured_triple(spec: &ToeplitzSpec) -> Result<StructuredTriple> {
    spec.validate()?;
    let (p, n) = (spec.p, spec.n);
    let m = p * n;
    let id = linalg::identity(p);

    let mut a = CMatrix::zeros(m, m);
    for i in 0..n {
        linalg::set_block(&mut a, i, i, &(&id * c64(0.0, 0.5)));
        for j in 0..i {
            linalg::set_block(&mut a, i, j, &(&id * I));
        }
    }

    let mut phi1 = CMatrix::zeros(m, p);
    let mut phi2 = CMatrix::zeros(m, p);
    let mut acc = &spec.blocks[0] * c64(0.5, 0.0);
    let shift = &spec.nu * I;
    for k in 0..n {
        if k > 0 {
            acc += spec.s(-(k as isize));
        }
        phi1.view_mut((k * p, 0), (p, p))
            .copy_from(&(&acc + &shift));
        phi2.view_mut((k * p, 0), (p, p)).copy_from(&id);
    }
    let pi = linalg::hstack(&phi1, &phi2);
    let j = j_matrix(p);

    let s = spec.toeplitz_matrix();
    let sv = linalg::singular_values(&s);
    let ratio = sv.last().copied().unwrap_or(0.0) / sv[0].max(f64::MIN_POSITIVE);
    if ratio <= EPS_RANK {
        return Err(Error::SingularS { ratio });
    }
    let s_inv = linalg::inverse_refined(&s).ok_or(Error::SingularS { ratio })?;
    let kappa = negative_index(&s)?;

    // σ(A) = {i/2} from the triangular structure; σ(A) ∩ σ(A^*) = ∅.
    let diag: Vec<Complex64> = (0..m).map(|k| a[(k, k)]).collect();
    if diag.iter().any(|d| d.im <= 0.0) {
        return Err(Error::Internal(
            "A has spectrum outside the upper half-plane".into(),
        ));
    }
    let theta_count = 1;

    let s_inv_pi_j = &s_inv * &pi * &j;
    Ok(StructuredTriple {
        spec: spec.clone(),
        p,
        n,
        a,
        phi1,
        phi2,
        pi,
        j,
        s,
        s_inv,
        kappa,
        theta_count,
        s_inv_pi_j,
    })
}

impl StructuredTriple {
    pub fn dim(&self) -> usize {
        self.p * self.n
    }

    /// `‖AS − SA^* − iΠJΠ^*‖_F / ‖S‖_F`.
    pub fn displacement_residual(&self) -> f64 {
        let lhs = &self.a * &self.s - &self.s * self.a.adjoint();
        let rhs = &self.pi * &self.j * self.pi.adjoint() * I;
        (lhs - rhs).norm() / self.s.norm()
    }
}

/// Number of eigenvalues below `−εinertia‖H‖`; any eigenvalue within
/// `εinertia‖H‖` of zero is an error.
pub fn negative_index(h: &CMatrix) -> Result<usize> {
    if !h.is_square() || !linalg::is_hermitian(h, EPS_HERMITIAN) {
        return Err(Error::NonHermitianInput(
            "matrix passed to negative_index".into(),
        ));
    }
    let ev = linalg::hermitian_eigenvalues(h);
    let norm = ev.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let threshold = EPS_INERTIA * norm;
    if let Some(&e) = ev.iter().find(|e| e.abs() <= threshold) {
        return Err(Error::AmbiguousInertia {
            eigenvalue: e,
            threshold,
        });
    }
    Ok(ev.iter().filter(|&&e| e < -threshold).count())
}

/// `Y = [0 … 0 I]S⁻¹Π` with the last block row `t` of `S⁻¹` and the blocks
/// `q` of `YJΠ^*S⁻¹`.
#[derive(Debug, Clone)]
pub struct YMatrix {
    pub y: CMatrix,
    pub t: Vec<CMatrix>,
    pub q: Vec<CMatrix>,
    pub rank: usize,
}

pub fn last_row_frame(triple: &StructuredTriple) -> Result<YMatrix> {
    let (p, n) = (triple.p, triple.n);
    let last = triple.s_inv.rows((n - 1) * p, p).into_owned();
    let y = &last * &triple.pi;
    let rank = linalg::rank(&y, EPS_RANK);
    if rank < p {
        return Err(Error::RankDeficientY { rank, p });
    }
    let qrow = &y * &triple.j * triple.pi.adjoint() * &triple.s_inv;
    let t = (0..n)
        .map(|k| last.columns(k * p, p).into_owned())
        .collect();
    let q = (0..n)
        .map(|k| qrow.columns(k * p, p).into_owned())
        .collect();
    let frame = YMatrix { y, t, q, rank };
    let res = frame.difference_residual();
    if res > 1e-10 {
        return Err(Error::Internal(format!(
            "last-row difference relation residual {res:.3e}"
        )));
    }
    Ok(frame)
}

impl YMatrix {
    /// Relative residual of `t_k = q_k − q_{k+1}` with `q_{n+1} = 0`.
    pub fn difference_residual(&self) -> f64 {
        let n = self.t.len();
        let scale = self.q.iter().map(|q| q.norm()).fold(1.0, f64::max);
        (0..n)
            .map(|k| {
                let next = if k + 1 < n {
                    self.q[k + 1].clone()
                } else {
                    CMatrix::zeros(self.t[k].nrows(), self.t[k].ncols())
                };
                (&self.t[k] - (&self.q[k] - next)).norm() / scale
            })
            .fold(0.0, f64::max)
    }
}

/// `−z/(1 − (i/2)z)` times stacked powers of `(1 + (i/2)z)/(1 − (i/2)z)`.
pub fn resolvent_column_closed_form(p: usize, n: usize, z: Complex64) -> CMatrix {
    let half = c64(0.0, 0.5);
    let factor = -z / (ONE - half * z);
    let ratio = (ONE + half * z) / (ONE - half * z);
    let mut out = CMatrix::zeros(p * n, p);
    let mut power = factor;
    for k in 0..n {
        for d in 0..p {
            out[(k * p + d, d)] = power;
        }
        power *= ratio;
    }
    out
}

/// `(A − I/z)⁻¹Φ₂` by a triangular solve, with its relative distance from
/// the closed form.
pub fn resolvent_column_with_residual(
    triple: &StructuredTriple,
    z: Complex64,
) -> Result<(CMatrix, f64)> {
    if (z + c64(0.0, 2.0)).norm() <= 1e-12 * (1.0 + z.norm()) {
        return Err(Error::PoleHit { z });
    }
    if z.norm() == 0.0 {
        return Err(Error::InvalidInput("resolvent column needs z ≠ 0".into()));
    }
    let m = triple.dim();
    let shifted = &triple.a - linalg::identity(m) * z.inv();
    let dense = shifted
        .solve_lower_triangular(&triple.phi2)
        .ok_or(Error::PoleHit { z })?;
    let closed = resolvent_column_closed_form(triple.p, triple.n, z);
    let res = linalg::rel_diff(&dense, &closed);
    Ok((dense, res))
}

/// `(A − I/z)⁻¹Φ₂`, checked against the closed form.
pub fn resolvent_column(triple: &StructuredTriple, z: Complex64) -> Result<CMatrix> {
    let (dense, res) = resolvent_column_with_residual(triple, z)?;
    if res > 1e-8 {
        return Err(Error::Internal(format!(
            "resolvent closed form mismatch {res:.3e} at z = {z}"
        )));
    }
    Ok(dense)
}

/// `det(A^* − I/z(λ))` by dense evaluation and by `(λ/(i(λ+1)))^{pn}`.
pub fn shifted_adjoint_determinant(
    triple: &StructuredTriple,
    lambda: Complex64,
) -> Result<(Complex64, Complex64)> {
    let z = params::cayley(lambda)?;
    if z.norm() == 0.0 {
        return Err(Error::InvalidInput("λ = −1 maps to z = 0".into()));
    }
    let m = triple.dim();
    let dense = linalg::det(&(triple.a.adjoint() - linalg::identity(m) * z.inv()));
    let closed = (lambda / (I * (lambda + ONE))).powu(m as u32);
    Ok((dense, closed))
}
