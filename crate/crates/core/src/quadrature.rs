//! Composite 16-point Gauss–Legendre quadrature with adaptive bisection.
//!
//! Each panel is integrated whole and as two halves; the difference is the
//! panel error. The worst panel is split until the summed error meets the
//! tolerance. Samples may be reported as singular (the integrand is not
//! defined there, e.g. a log of a vanishing determinant); panels containing
//! such samples are split down to `min_width` and then integrated from their
//! regular nodes only.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    Value(f64),
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_nodes: usize,
    pub initial_panels: usize,
    pub min_width: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-8,
            max_nodes: 1 << 18,
            initial_panels: 16,
            min_width: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub nodes_used: usize,
    /// Total width of panels closed out at `min_width` because of singular samples.
    pub singular_width: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre() -> &'static [(f64, f64); ORDER] {
    static RULE: OnceLock<[(f64, f64); ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut rule = [(0.0, 0.0); ORDER];
        for (k, slot) in rule.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule.sort_by(|a, b| a.0.total_cmp(&b.0));
        rule
    })
}

#[derive(Debug, Clone, Copy)]
struct PanelEval {
    /// Full rule value, or the regular-node value rescaled by weight if any node was singular.
    value: f64,
    singular: bool,
}

fn eval_panel<F: FnMut(f64) -> Result<Sample>>(f: &mut F, a: f64, b: f64) -> Result<PanelEval> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let (mut sum, mut wsum, mut wall) = (0.0, 0.0, 0.0);
    let mut singular = false;
    for &(x, w) in gauss_legendre() {
        wall += w;
        match f(mid + half * x)? {
            Sample::Value(v) if v.is_finite() => {
                sum += w * v;
                wsum += w;
            }
            _ => singular = true,
        }
    }
    let value = if wsum > 0.0 {
        half * sum * wall / wsum
    } else {
        0.0
    };
    Ok(PanelEval { value, singular })
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left: PanelEval,
    right: PanelEval,
    err: f64,
    closed: bool,
}

impl Panel {
    fn value(&self) -> f64 {
        self.left.value + self.right.value
    }
}

fn build_panel<F: FnMut(f64) -> Result<Sample>>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: PanelEval,
    min_width: f64,
) -> Result<Panel> {
    let m = 0.5 * (a + b);
    let left = eval_panel(f, a, m)?;
    let right = eval_panel(f, m, b)?;
    let singular = whole.singular || left.singular || right.singular;
    let (err, closed) = if singular {
        if b - a <= min_width {
            (0.0, true)
        } else {
            (f64::INFINITY, false)
        }
    } else {
        ((whole.value - left.value - right.value).abs(), false)
    };
    Ok(Panel {
        a,
        b,
        left,
        right,
        err,
        closed,
    })
}

#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<Sample>,
{
    let count = opts.initial_panels.max(1);
    let h = (b - a) / count as f64;
    let mut panels: Vec<Panel> = Vec::with_capacity(4 * count);
    let mut alive: Vec<bool> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut nodes = 0usize;
    for k in 0..count {
        let (pa, pb) = (
            a + h * k as f64,
            if k + 1 == count {
                b
            } else {
                a + h * (k + 1) as f64
            },
        );
        let whole = eval_panel(&mut f, pa, pb)?;
        let panel = build_panel(&mut f, pa, pb, whole, opts.min_width)?;
        nodes += 3 * ORDER;
        heap.push(Key(panel.err, panels.len()));
        panels.push(panel);
        alive.push(true);
    }

    loop {
        let total: f64 = sum_ordered(&panels, &alive, |p| p.value());
        let err: f64 = sum_ordered(&panels, &alive, |p| p.err);
        let target = opts.tol * total.abs().max(1.0);
        if err <= target {
            let singular_width =
                sum_ordered(&panels, &alive, |p| if p.closed { p.b - p.a } else { 0.0 });
            return Ok(QuadResult {
                value: total,
                error_estimate: err,
                nodes_used: nodes,
                singular_width,
            });
        }
        if nodes >= opts.max_nodes {
            return Err(Error::NoConvergence {
                estimate: err,
                nodes,
            });
        }
        let Some(Key(_, idx)) = heap.pop() else {
            return Err(Error::NoConvergence {
                estimate: err,
                nodes,
            });
        };
        let parent = panels[idx];
        alive[idx] = false;
        let m = 0.5 * (parent.a + parent.b);
        for (ca, cb, whole) in [(parent.a, m, parent.left), (m, parent.b, parent.right)] {
            let child = build_panel(&mut f, ca, cb, whole, opts.min_width)?;
            nodes += 2 * ORDER;
            heap.push(Key(child.err, panels.len()));
            panels.push(child);
            alive.push(true);
        }
    }
}

/// Sum over live panels in left-to-right order, so results do not depend on
/// the refinement history.
fn sum_ordered(panels: &[Panel], alive: &[bool], g: impl Fn(&Panel) -> f64) -> f64 {
    let mut live: Vec<&Panel> = panels
        .iter()
        .zip(alive)
        .filter(|(_, &a)| a)
        .map(|(p, _)| p)
        .collect();
    live.sort_by(|x, y| x.a.total_cmp(&y.a));
    live.into_iter().map(g).sum()
}
