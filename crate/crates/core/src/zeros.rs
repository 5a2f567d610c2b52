//! Zeros of analytic functions in the unit disk by the argument principle.
//!
//! The winding number of `f` along a contour is accumulated by adaptive
//! phase unwrapping. Cells of a polar quadtree (a central disk and annular
//! sectors) are split until each holds a single zero, which Newton's method
//! then polishes. Derivatives come from a small Cauchy integral, so only
//! evaluations of `f` are needed.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{json, Complex64};

pub const EPS_BOUNDARY: f64 = 1e-4;
const MAX_PHASE_STEP: f64 = 0.5;
const MAX_DEPTH: usize = 48;
const NEWTON_CELL: f64 = 0.2;
const CLUSTER_CELL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    #[serde(with = "json::complex")]
    pub lambda: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskZeros {
    pub zeros: Vec<Zero>,
    pub total_count: usize,
    pub distinct_count: usize,
    pub search_radius: f64,
}

impl DiskZeros {
    pub fn empty(search_radius: f64) -> Self {
        DiskZeros {
            zeros: Vec::new(),
            total_count: 0,
            distinct_count: 0,
            search_radius,
        }
    }

    /// `Π|λ_j|^{−2}` over zeros counted with multiplicity.
    pub fn blaschke_correction(&self) -> f64 {
        self.zeros
            .iter()
            .map(|z| z.lambda.norm().powi(-2 * z.multiplicity as i32))
            .product()
    }

    pub fn min_modulus(&self) -> Option<f64> {
        self.zeros.iter().map(|z| z.lambda.norm()).reduce(f64::min)
    }
}

/// `Π_j ((λ − λ_j)/(1 − λ̄_jλ))^{m_j}`.
pub fn blaschke_eval(zeros: &DiskZeros, lambda: Complex64) -> Complex64 {
    zeros.zeros.iter().fold(Complex64::new(1.0, 0.0), |acc, z| {
        let factor = (lambda - z.lambda) / (Complex64::new(1.0, 0.0) - z.lambda.conj() * lambda);
        acc * factor.powu(z.multiplicity as u32)
    })
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Disk { r: f64 },
    Sector { r0: f64, r1: f64, a0: f64, a1: f64 },
}

impl Cell {
    fn diameter(&self) -> f64 {
        match *self {
            Cell::Disk { r } => 2.0 * r,
            Cell::Sector { r0, r1, a0, a1 } => {
                ((r1 - r0).powi(2) + (r1 * (a1 - a0)).powi(2)).sqrt()
            }
        }
    }

    fn center(&self) -> Complex64 {
        match *self {
            Cell::Disk { .. } => Complex64::new(0.0, 0.0),
            Cell::Sector { r0, r1, a0, a1 } => {
                Complex64::from_polar(0.5 * (r0 + r1), 0.5 * (a0 + a1))
            }
        }
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        let r = z.norm();
        match *self {
            Cell::Disk { r: rr } => r <= rr + slack,
            Cell::Sector { r0, r1, a0, a1 } => {
                if r < r0 - slack || r > r1 + slack {
                    return false;
                }
                let mut a = z.arg();
                while a < a0 - PI {
                    a += TAU;
                }
                while a > a0 + PI {
                    a -= TAU;
                }
                let angular_slack = slack / r.max(slack);
                a >= a0 - angular_slack && a <= a1 + angular_slack
            }
        }
    }

    /// Counterclockwise boundary as a list of straight or circular pieces.
    fn boundary(&self) -> Vec<Piece> {
        match *self {
            Cell::Disk { r } => vec![Piece::Arc {
                r,
                a0: 0.0,
                a1: TAU,
            }],
            Cell::Sector { r0, r1, a0, a1 } => vec![
                Piece::Ray { a: a0, r0, r1 },
                Piece::Arc { r: r1, a0, a1 },
                Piece::Ray {
                    a: a1,
                    r0: r1,
                    r1: r0,
                },
                Piece::Arc {
                    r: r0,
                    a0: a1,
                    a1: a0,
                },
            ],
        }
    }

    fn split(&self, shift: f64) -> Vec<Cell> {
        match *self {
            Cell::Disk { r } => {
                let rm = r * (0.5 + shift);
                let base = shift * 1.3;
                let mut out = vec![Cell::Disk { r: rm }];
                for k in 0..4 {
                    let a0 = base + k as f64 * TAU / 4.0;
                    out.push(Cell::Sector {
                        r0: rm,
                        r1: r,
                        a0,
                        a1: a0 + TAU / 4.0,
                    });
                }
                out
            }
            Cell::Sector { r0, r1, a0, a1 } => {
                let rm = r0 + (r1 - r0) * (0.5 + shift);
                let am = a0 + (a1 - a0) * (0.5 - shift);
                vec![
                    Cell::Sector {
                        r0,
                        r1: rm,
                        a0,
                        a1: am,
                    },
                    Cell::Sector {
                        r0,
                        r1: rm,
                        a0: am,
                        a1,
                    },
                    Cell::Sector {
                        r0: rm,
                        r1,
                        a0,
                        a1: am,
                    },
                    Cell::Sector {
                        r0: rm,
                        r1,
                        a0: am,
                        a1,
                    },
                ]
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Arc { r: f64, a0: f64, a1: f64 },
    Ray { a: f64, r0: f64, r1: f64 },
}

impl Piece {
    fn at(&self, t: f64) -> Complex64 {
        match *self {
            Piece::Arc { r, a0, a1 } => Complex64::from_polar(r, a0 + (a1 - a0) * t),
            Piece::Ray { a, r0, r1 } => Complex64::from_polar(r0 + (r1 - r0) * t, a),
        }
    }

    fn initial_segments(&self) -> usize {
        match *self {
            Piece::Arc { r, a0, a1 } => {
                ((r * (a1 - a0).abs() / 0.05).ceil() as usize).clamp(8, 128)
            }
            Piece::Ray { .. } => 8,
        }
    }
}

struct Counter<'a, F> {
    f: &'a F,
    scale: f64,
}

impl<F: Fn(Complex64) -> Result<Complex64>> Counter<'_, F> {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        let v = (self.f)(z)?;
        if !(v.re.is_finite() && v.im.is_finite()) || v.norm() <= 1e-14 * self.scale {
            return Err(Error::ZeroOnContour { lambda: z });
        }
        Ok(v)
    }

    fn phase(
        &self,
        piece: &Piece,
        t0: f64,
        t1: f64,
        f0: Complex64,
        f1: Complex64,
        depth: usize,
    ) -> Result<f64> {
        let tm = 0.5 * (t0 + t1);
        let fm = self.value(piece.at(tm))?;
        let d0 = (fm / f0).arg();
        let d1 = (f1 / fm).arg();
        let whole = (f1 / f0).arg();
        if d0.abs() <= MAX_PHASE_STEP
            && d1.abs() <= MAX_PHASE_STEP
            && (d0 + d1 - whole).abs() < 1e-9
        {
            return Ok(whole);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::ZeroOnContour {
                lambda: piece.at(tm),
            });
        }
        Ok(self.phase(piece, t0, tm, f0, fm, depth + 1)?
            + self.phase(piece, tm, t1, fm, f1, depth + 1)?)
    }

    fn winding(&self, cell: &Cell) -> Result<usize> {
        let mut total = 0.0;
        for piece in cell.boundary() {
            let segs = piece.initial_segments();
            let mut prev = self.value(piece.at(0.0))?;
            for k in 0..segs {
                let t0 = k as f64 / segs as f64;
                let t1 = (k + 1) as f64 / segs as f64;
                let next = self.value(piece.at(t1))?;
                total += self.phase(&piece, t0, t1, prev, next, 0)?;
                prev = next;
            }
        }
        let turns = total / TAU;
        let rounded = turns.round();
        if (turns - rounded).abs() > 0.05 || rounded < 0.0 {
            return Err(Error::Internal(format!(
                "winding number {turns:.4} is not a nonnegative integer"
            )));
        }
        Ok(rounded as usize)
    }

    /// `f'(x)` from an 8-point circle of radius `h`.
    fn derivative(&self, x: Complex64, h: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..8 {
            let w = Complex64::from_polar(1.0, TAU * j as f64 / 8.0);
            acc += (self.f)(x + w * h)? / (w * h);
        }
        Ok(acc / 8.0)
    }

    fn newton(
        &self,
        start: Complex64,
        multiplicity: usize,
        limit: f64,
    ) -> Result<Option<Complex64>> {
        let mut x = start;
        for _ in 0..80 {
            let fx = (self.f)(x)?;
            if fx.norm() == 0.0 {
                return Ok(Some(x));
            }
            let h = (0.5 * (limit - x.norm())).clamp(1e-9, 1e-3);
            let dfx = self.derivative(x, h)?;
            if dfx.norm() == 0.0 {
                return Ok(None);
            }
            let step = fx / dfx * multiplicity as f64;
            x -= step;
            if !(x.re.is_finite() && x.im.is_finite()) || x.norm() >= limit {
                return Ok(None);
            }
            if step.norm() <= 1e-15 * x.norm().max(1e-3) {
                break;
            }
        }
        let fx = (self.f)(x)?;
        let tol = if multiplicity == 1 { 1e-12 } else { 1e-10 };
        Ok((fx.norm() <= tol * self.scale).then_some(x))
    }

    fn locate(&self, cell: Cell, count: usize, limit: f64, out: &mut Vec<Zero>) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let diam = cell.diameter();
        if count == 1 && diam < NEWTON_CELL {
            if let Some(x) = self.newton(cell.center(), 1, limit)? {
                if cell.contains(x, 1e-9) {
                    out.push(Zero {
                        lambda: x,
                        multiplicity: 1,
                    });
                    return Ok(());
                }
            }
        }
        if diam < CLUSTER_CELL {
            let x = self
                .newton(cell.center(), count, limit)?
                .unwrap_or(cell.center());
            out.push(Zero {
                lambda: x,
                multiplicity: count,
            });
            return Ok(());
        }
        let mut last_err = None;
        for shift in [0.0, -0.031, 0.043, -0.067, 0.071] {
            let children = cell.split(shift);
            let counts: Result<Vec<usize>> = children.iter().map(|c| self.winding(c)).collect();
            match counts {
                Ok(counts) if counts.iter().sum::<usize>() == count => {
                    for (child, c) in children.into_iter().zip(counts) {
                        self.locate(child, c, limit, out)?;
                    }
                    return Ok(());
                }
                Ok(counts) => {
                    last_err = Some(Error::CountMismatch {
                        winding: count,
                        located: counts.iter().sum(),
                    })
                }
                Err(e @ Error::ZeroOnContour { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last_err.unwrap_or(Error::CountMismatch {
            winding: count,
            located: 0,
        }))
    }
}

/// Zeros of `f` in the disk of radius `search_radius`, with multiplicities,
/// sorted by modulus and then argument.
pub fn disk_zeros<F>(f: F, search_radius: f64) -> Result<DiskZeros>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if !(search_radius > 0.0 && search_radius < 1.0) {
        return Err(Error::InvalidInput(format!(
            "search radius {search_radius} outside (0, 1)"
        )));
    }
    let probe: Vec<f64> = (0..64)
        .filter_map(|k| f(Complex64::from_polar(search_radius, TAU * k as f64 / 64.0)).ok())
        .map(|v| v.norm())
        .filter(|v| v.is_finite())
        .collect();
    let scale = probe
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(f(Complex64::new(0.0, 0.0)).map_or(0.0, |v| v.norm()));
    if scale == 0.0 {
        return Err(Error::Internal(
            "function vanishes on the search circle".into(),
        ));
    }
    let counter = Counter { f: &f, scale };

    let mut last_err = None;
    for attempt in 0..5 {
        let radius = search_radius * (1.0 - 2e-5 * attempt as f64);
        let outer = Cell::Disk { r: radius };
        let total = match counter.winding(&outer) {
            Ok(t) => t,
            Err(e @ Error::ZeroOnContour { .. }) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut found = Vec::new();
        counter.locate(outer, total, radius, &mut found)?;
        let located: usize = found.iter().map(|z| z.multiplicity).sum();
        if located != total {
            return Err(Error::CountMismatch {
                winding: total,
                located,
            });
        }
        found.sort_by(|a, b| {
            a.lambda
                .norm()
                .total_cmp(&b.lambda.norm())
                .then(a.lambda.arg().total_cmp(&b.lambda.arg()))
        });
        return Ok(DiskZeros {
            distinct_count: found.len(),
            total_count: total,
            zeros: found,
            search_radius: radius,
        });
    }
    Err(last_err.unwrap_or(Error::Internal("zero search failed".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_real_zero() {
        let z = disk_zeros(|l| Ok(l - c(0.5, 0.0)), 1.0 - EPS_BOUNDARY).unwrap();
        assert_eq!(z.total_count, 1);
        assert!((z.zeros[0].lambda - c(0.5, 0.0)).norm() < 1e-12);
        assert_eq!(z.zeros[0].multiplicity, 1);
    }

    #[test]
    fn double_zero_and_simple_zero() {
        let f = |l: Complex64| Ok((l - c(0.3, 0.0)).powu(2) * (l + c(0.0, 0.4)));
        let z = disk_zeros(f, 1.0 - EPS_BOUNDARY).unwrap();
        assert_eq!(z.total_count, 3);
        assert_eq!(z.distinct_count, 2);
        assert_eq!(z.zeros[0].multiplicity, 2);
        assert!((z.zeros[0].lambda - c(0.3, 0.0)).norm() < 1e-6);
        assert!((z.zeros[1].lambda - c(0.0, -0.4)).norm() < 1e-12);
    }

    #[test]
    fn zero_free_function() {
        let z = disk_zeros(|l| Ok(c(2.0, 0.0) + l), 1.0 - EPS_BOUNDARY).unwrap();
        assert_eq!(z.total_count, 0);
    }

    #[test]
    fn zeros_outside_are_ignored() {
        let f = |l: Complex64| Ok((l - c(1.5, 0.2)) * (l - c(-0.2, 0.7)) * (l - c(0.0, -3.0)));
        let z = disk_zeros(f, 1.0 - EPS_BOUNDARY).unwrap();
        assert_eq!(z.total_count, 1);
        assert!((z.zeros[0].lambda - c(-0.2, 0.7)).norm() < 1e-12);
    }

    #[test]
    fn blaschke_examples() {
        let z = DiskZeros {
            zeros: vec![Zero {
                lambda: c(0.5, 0.0),
                multiplicity: 1,
            }],
            total_count: 1,
            distinct_count: 1,
            search_radius: 0.9999,
        };
        assert!((blaschke_eval(&z, c(0.0, 0.0)) - c(-0.5, 0.0)).norm() < 1e-15);
        for k in 0..100 {
            let e = Complex64::from_polar(1.0, 0.0628 * k as f64);
            assert!((blaschke_eval(&z, e).norm() - 1.0).abs() < 1e-14);
        }
        assert_eq!(
            blaschke_eval(&DiskZeros::empty(0.9), c(0.3, 0.1)),
            c(1.0, 0.0)
        );
        assert!((z.blaschke_correction() - 4.0).abs() < 1e-14);
    }
}
