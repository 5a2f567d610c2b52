//! Scenario files, seeded instance generation and experiment orchestration.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::caratheodory::{
    extraction_radius, taylor_coefficients, verify_with_series, TaylorSeries,
};
use crate::entropy::{self, entropy_identity_check, outer_poisson_check, q_tilde_zeros};
use crate::error::{Error, Result};
use crate::frame::{g_identity_residual, j_unitarity_residual, Solution, SolutionMode};
use crate::linalg::{self, c64, CMatrix};
use crate::params::{self, HerglotzSpec, Parameter};
use crate::quadrature::QuadOptions;
use crate::szego::{szego_with, trend_ok, SzegoOptions};
use crate::toeplitz::{
    build_structured_triple, negative_index, resolvent_column_with_residual,
    shifted_adjoint_determinant, ToeplitzSpec,
};
use crate::zeros::DiskZeros;
use crate::Complex64;

pub const SCHEMA_VERSION: u32 = 1;
pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));
pub const MAX_ATTEMPTS: usize = 200;
/// Generated instances keep the zeros of `q̃` in this annulus.
pub const ZERO_ANNULUS: (f64, f64) = (0.2, 0.99);
const J_PAIRS: usize = 100;
const DISK_POINTS: usize = 50;
const TRACE_POINTS: usize = 512;
const POINT_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    IdentitySuite,
    Interpolation,
    EntropyIdentity,
    OuterCheck,
    Szego,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::IdentitySuite,
        Experiment::Interpolation,
        Experiment::EntropyIdentity,
        Experiment::OuterCheck,
        Experiment::Szego,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instance {
    Explicit(ToeplitzSpec),
    Generator {
        kappa_target: usize,
        spectrum_margin: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub displacement: f64,
    pub j_unitarity: f64,
    pub closed_form: f64,
    pub interpolation: f64,
    pub entropy_identity: f64,
    pub contractive_identity: f64,
    pub outer: f64,
    pub bridge: f64,
    pub prediction_forms: f64,
    pub quadrature: f64,
    pub conv: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            displacement: 1e-12,
            j_unitarity: 1e-10,
            closed_form: 1e-9,
            interpolation: 1e-8,
            entropy_identity: 1e-5,
            contractive_identity: 2e-5,
            outer: 1e-6,
            bridge: 1e-9,
            prediction_forms: 1e-5,
            quadrature: 1e-8,
            conv: 1e-2,
        }
    }
}

fn default_i_max() -> usize {
    32
}

fn default_depth() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub p: usize,
    pub n: usize,
    pub instance: Instance,
    /// `None` means `ψ ≡ iI_p`.
    #[serde(default)]
    pub parameter: Option<Parameter>,
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_i_max")]
    pub i_max: usize,
    #[serde(default = "default_depth")]
    pub extension_depth: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Scenario {
    /// Generated instance with all experiments and `ψ ≡ i`.
    pub fn generated(seed: u64, p: usize, n: usize, kappa_target: usize) -> Self {
        Scenario {
            seed,
            p,
            n,
            instance: Instance::Generator {
                kappa_target,
                spectrum_margin: 1e-3,
            },
            parameter: None,
            experiments: Experiment::ALL.to_vec(),
            tolerances: Tolerances::default(),
            i_max: default_i_max(),
            extension_depth: default_depth(),
            output_dir: None,
        }
    }

    pub fn explicit(spec: ToeplitzSpec) -> Self {
        let (p, n) = (spec.p, spec.n);
        Scenario {
            instance: Instance::Explicit(spec),
            ..Scenario::generated(0, p, n, 0)
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiments.is_empty() {
            return Err(Error::InvalidInput("scenario lists no experiments".into()));
        }
        if self.p == 0 || self.n == 0 {
            return Err(Error::InvalidInput("p and n must be positive".into()));
        }
        match &self.instance {
            Instance::Generator {
                kappa_target,
                spectrum_margin,
            } => {
                if *kappa_target + 1 > self.n * self.p {
                    return Err(Error::InvalidInput(format!(
                        "kappa_target {kappa_target} exceeds np − 1"
                    )));
                }
                if !(*spectrum_margin > 0.0 && *spectrum_margin < 0.5) {
                    return Err(Error::InvalidInput(
                        "spectrum_margin must lie in (0, 0.5)".into(),
                    ));
                }
            }
            Instance::Explicit(spec) => {
                if spec.p != self.p || spec.n != self.n {
                    return Err(Error::InvalidInput(format!(
                        "instance is p = {}, n = {}",
                        spec.p, spec.n
                    )));
                }
                spec.validate()?;
            }
        }
        if let Some(param) = &self.parameter {
            if param.p() != self.p {
                return Err(Error::InvalidInput("parameter size differs from p".into()));
            }
        }
        if self.i_max < self.n {
            return Err(Error::InvalidInput("i_max must be at least n".into()));
        }
        Ok(())
    }

    fn quad(&self) -> QuadOptions {
        QuadOptions {
            tol: self.tolerances.quadrature,
            ..QuadOptions::default()
        }
    }

    fn series_len(&self) -> usize {
        (self.n + self.extension_depth).max(self.i_max)
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, p: usize) -> CMatrix {
    CMatrix::from_fn(p, p, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random data with negative index `kappa_target` and `ψ ≡ iI_p`.
///
/// The base is the Taylor data of `D₀/2 + Σ_j H_j(1 + w_jλ)/(2(1 − w_jλ))`,
/// which is positive definite; `s₀` is then shifted by `−μI` with `μ` midway
/// between the eigenvalues that straddle the target index. Draws fail when
/// that gap is narrower than the margin, when the upper nondegeneracy test
/// fails, or when a zero of `q̃` leaves the annulus `0.2 < |λ| < 0.99`.
pub fn generate_instance(
    seed: u64,
    p: usize,
    n: usize,
    kappa_target: usize,
    margin: f64,
) -> Result<(ToeplitzSpec, Parameter)> {
    if p == 0 || n == 0 || kappa_target + 1 > n * p {
        return Err(Error::InvalidInput(format!(
            "cannot reach kappa {kappa_target} with p = {p}, n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let param = Parameter::Herglotz(HerglotzSpec::constant_i(p));
    for _ in 0..MAX_ATTEMPTS {
        let terms = 2 + rng.random_range(0..3usize);
        let mut poles = Vec::with_capacity(terms);
        for _ in 0..terms {
            let r = rng.random_range(0.2..0.8);
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            let x = gaussian_matrix(&mut rng, p);
            poles.push((
                Complex64::from_polar(r, a),
                &x * x.adjoint() / c64(p as f64, 0.0),
            ));
        }
        let d0 = rng.random_range(0.2..1.0);
        let mut blocks: Vec<CMatrix> = (0..n)
            .map(|k| {
                poles.iter().fold(CMatrix::zeros(p, p), |acc, (w, h)| {
                    acc + h * w.powu(k as u32)
                })
            })
            .collect();
        blocks[0] += linalg::identity(p) * c64(d0, 0.0);
        blocks[0] = linalg::hermitian_part(&blocks[0]);
        let base = ToeplitzSpec::new(blocks.clone(), CMatrix::zeros(p, p))?;
        let ev = linalg::hermitian_eigenvalues(&base.toeplitz_matrix());
        let scale = ev.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        let mu = if kappa_target == 0 {
            if ev[0] <= margin * scale {
                continue;
            }
            0.0
        } else {
            let (lo, hi) = (ev[kappa_target - 1], ev[kappa_target]);
            if hi - lo < 2.0 * margin * scale {
                continue;
            }
            0.5 * (lo + hi)
        };
        blocks[0] -= linalg::identity(p) * c64(mu, 0.0);
        let spec = ToeplitzSpec::new(blocks, CMatrix::zeros(p, p))?;
        if !matches!(negative_index(&spec.toeplitz_matrix()), Ok(k) if k == kappa_target) {
            continue;
        }
        let Ok(triple) = build_structured_triple(&spec) else {
            continue;
        };
        let Ok(sol) = Solution::new(triple, param.clone(), SolutionMode::Pair) else {
            continue;
        };
        let Ok(zeros) = q_tilde_zeros(&sol) else {
            continue;
        };
        if zeros
            .zeros
            .iter()
            .all(|z| (ZERO_ANNULUS.0..ZERO_ANNULUS.1).contains(&z.lambda.norm()))
        {
            return Ok((spec, param));
        }
    }
    Err(Error::GenerationExhausted {
        attempts: MAX_ATTEMPTS,
    })
}

/// Random rational Herglotz parameter: `Bz + C + iD + M(t − z)⁻¹`.
pub fn random_herglotz(rng: &mut ChaCha8Rng, p: usize) -> HerglotzSpec {
    let scaled = |rng: &mut ChaCha8Rng, s: f64| {
        let x = gaussian_matrix(rng, p);
        &x * x.adjoint() * c64(s / p as f64, 0.0)
    };
    let b = scaled(rng, 0.3);
    let d = scaled(rng, 1.0) + linalg::identity(p) * c64(0.1, 0.0);
    let c = linalg::hermitian_part(&gaussian_matrix(rng, p)) * c64(0.5, 0.0);
    let m = scaled(rng, 0.5);
    let t = rng.random_range(-3.0..3.0);
    HerglotzSpec {
        b,
        c,
        imag_offset: d,
        poles: vec![t],
        residues: vec![m],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            passed: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: Experiment,
    pub passed: bool,
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub version: String,
    pub scenario: Scenario,
    pub tolerances: Tolerances,
    pub instance: Option<ToeplitzSpec>,
    pub parameter: Option<Parameter>,
    pub setup_error: Option<String>,
    pub experiments: Vec<ExperimentResult>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.passed
    }
}

#[derive(Serialize, Deserialize)]
struct TaylorCache {
    instance: ToeplitzSpec,
    parameter: Parameter,
    count: usize,
    series: TaylorSeries,
}

struct Context<'a> {
    scenario: &'a Scenario,
    spec: ToeplitzSpec,
    sol: Solution,
    out: PathBuf,
    zeros: Option<DiskZeros>,
    series: Option<TaylorSeries>,
    trace_written: bool,
    files: Vec<PathBuf>,
}

impl Context<'_> {
    fn zeros(&mut self) -> Result<DiskZeros> {
        if self.zeros.is_none() {
            self.zeros = Some(q_tilde_zeros(&self.sol)?);
        }
        Ok(self.zeros.clone().expect("set above"))
    }

    fn cache_path(&self) -> PathBuf {
        self.out.join("cache").join("taylor.json")
    }

    fn series(&mut self) -> Result<TaylorSeries> {
        if let Some(s) = &self.series {
            return Ok(s.clone());
        }
        let count = self.scenario.series_len();
        let path = self.cache_path();
        let cached = fs::read_to_string(&path)
            .ok()
            .and_then(|text| serde_json::from_str::<TaylorCache>(&text).ok())
            .filter(|c| {
                c.count == count && c.instance == self.spec && c.parameter == self.sol.param
            });
        let series = match cached {
            Some(c) => c.series,
            None => {
                let zeros = self.zeros()?;
                let series = taylor_coefficients(&self.sol, count, extraction_radius(&zeros))?;
                let cache = TaylorCache {
                    instance: self.spec.clone(),
                    parameter: self.sol.param.clone(),
                    count,
                    series,
                };
                fs::create_dir_all(path.parent().expect("cache dir"))?;
                fs::write(&path, serde_json::to_string(&cache)?)?;
                cache.series
            }
        };
        self.series = Some(series.clone());
        Ok(series)
    }

    fn write_csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<()> {
        let path = self.out.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn write_trace(&mut self) -> Result<()> {
        if self.trace_written {
            return Ok(());
        }
        #[derive(Serialize)]
        struct Row {
            theta: f64,
            log_det_re_omega_star: f64,
        }
        let rows: Vec<Row> = entropy::entropy_trace(&self.sol, TRACE_POINTS)?
            .into_iter()
            .map(|(theta, v)| Row {
                theta,
                log_det_re_omega_star: v,
            })
            .collect();
        self.write_csv("entropy_trace.csv", &rows)?;
        self.trace_written = true;
        Ok(())
    }
}

/// Points `λ` with `0.1 ≤ |λ| ≤ 0.95`.
fn disk_points(seed: u64, count: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ POINT_STREAM);
    (0..count)
        .map(|_| {
            Complex64::from_polar(
                rng.random_range(0.1..0.95),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect()
}

/// Points of the plane away from `±2i`.
fn plane_points(seed: u64, count: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ POINT_STREAM.rotate_left(17));
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z = c64(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        if (z - c64(0.0, 2.0)).norm() > 0.1 && (z + c64(0.0, 2.0)).norm() > 0.1 {
            out.push(z);
        }
    }
    out
}

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |a, v| Ok(a.max(v?)))
}

const LAMBDA_SET: [(f64, f64); 3] = [(0.0, 0.0), (0.3, 0.2), (-0.5, 0.0)];

fn identity_suite(ctx: &mut Context) -> Result<(Vec<Check>, serde_json::Value)> {
    let tol = ctx.scenario.tolerances;
    let seed = ctx.scenario.seed;
    let t = &ctx.sol.triple;
    let mut checks = vec![Check::at_most(
        "displacement",
        t.displacement_residual(),
        tol.displacement,
    )];
    let ju = max_of(
        plane_points(seed, J_PAIRS)
            .into_iter()
            .map(|z| j_unitarity_residual(t, z)),
    )?;
    checks.push(Check::at_most("j_unitarity", ju, tol.j_unitarity));
    let cond = ctx.sol.conditions;
    checks.push(Check::holds(
        "nondegeneracy_agreement",
        cond.at_upper == cond.at_lower,
    ));
    checks.push(Check::at_most(
        "last_row_difference",
        ctx.sol.y.difference_residual(),
        tol.closed_form,
    ));
    let points = disk_points(seed, DISK_POINTS);
    let resolvent = max_of(
        points
            .iter()
            .map(|&l| Ok(resolvent_column_with_residual(t, params::cayley(l)?)?.1)),
    )?;
    checks.push(Check::at_most(
        "resolvent_closed_form",
        resolvent,
        tol.closed_form,
    ));
    let shifted = max_of(points.iter().map(|&l| {
        let (dense, closed) = shifted_adjoint_determinant(t, l)?;
        Ok((dense - closed).norm() / closed.norm())
    }))?;
    checks.push(Check::at_most(
        "shifted_determinant",
        shifted,
        tol.closed_form,
    ));
    let inverse = max_of(
        points
            .iter()
            .map(|&l| ctx.sol.inverse_denominator_residual(params::cayley(l)?)),
    )?;
    checks.push(Check::at_most(
        "inverse_denominator",
        inverse,
        tol.closed_form,
    ));
    if let Parameter::Herglotz(psi) = &ctx.sol.param {
        let g = max_of(
            points
                .iter()
                .map(|&l| g_identity_residual(t, psi, params::cayley(l)?)),
        )?;
        checks.push(Check::at_most("g_identity", g, tol.closed_form));
    }
    #[derive(Serialize)]
    struct Row<'a> {
        check: &'a str,
        value: f64,
        tolerance: f64,
        passed: bool,
    }
    let rows: Vec<Row> = checks
        .iter()
        .map(|c| Row {
            check: &c.name,
            value: c.value,
            tolerance: c.tolerance,
            passed: c.passed,
        })
        .collect();
    let details = json!({ "kappa": t.kappa, "conditions": cond });
    ctx.write_csv("identity_suite.csv", &rows)?;
    Ok((checks, details))
}

fn interpolation(ctx: &mut Context) -> Result<(Vec<Check>, serde_json::Value)> {
    let tol = ctx.scenario.tolerances;
    let depth = ctx.scenario.extension_depth;
    let series = ctx.series()?;
    let report = verify_with_series(&ctx.spec, &series, depth)?;
    let kappa = ctx.sol.triple.kappa;
    let n = ctx.spec.n;
    let worst = report.match_residuals.iter().copied().fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("taylor_match", worst, tol.interpolation),
        Check::holds("kappa_invariant", report.kappas.iter().all(|&k| k == kappa)),
        Check::holds("extensions_reached", report.extended_n >= n + depth),
    ];
    #[derive(Serialize)]
    struct Row {
        k: usize,
        coefficient_norm: f64,
        match_residual: Option<f64>,
        kappa_of_extension: Option<usize>,
    }
    let rows: Vec<Row> = series
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| Row {
            k,
            coefficient_norm: c.norm(),
            match_residual: report.match_residuals.get(k).copied(),
            kappa_of_extension: (k + 1)
                .checked_sub(n)
                .and_then(|j| report.kappas.get(j))
                .copied(),
        })
        .collect();
    ctx.write_csv("interpolation.csv", &rows)?;
    Ok((
        checks,
        json!({ "extension": report, "series_radius": series.radius, "series_error": series.error_estimate }),
    ))
}

fn lambda_set() -> impl Iterator<Item = Complex64> {
    LAMBDA_SET.iter().map(|&(a, b)| c64(a, b))
}

fn entropy_identity(ctx: &mut Context) -> Result<(Vec<Check>, serde_json::Value)> {
    let tol = ctx.scenario.tolerances;
    let quad = ctx.scenario.quad();
    let zeros = ctx.zeros()?;
    let kappa = ctx.sol.triple.kappa;
    let mut checks = vec![Check {
        name: "zero_bound".into(),
        value: zeros.distinct_count as f64,
        tolerance: (kappa + 1) as f64,
        passed: zeros.distinct_count <= kappa + 1,
    }];
    let mut records = Vec::new();
    for lt in lambda_set() {
        let c = entropy_identity_check(&ctx.sol, &zeros, lt, &quad)?;
        let tag = format!("({}, {})", lt.re, lt.im);
        checks.push(Check::at_most(
            format!("pair_identity {tag}"),
            c.residual,
            tol.entropy_identity,
        ));
        if let Some(h) = &c.contractive {
            checks.push(Check::at_most(
                format!("contractive_identity {tag}"),
                h.residual,
                tol.contractive_identity,
            ));
            checks.push(Check::at_most(
                format!("forms_gap {tag}"),
                h.forms_gap,
                tol.contractive_identity,
            ));
        }
        records.push(c);
    }
    ctx.write_trace()?;
    Ok((checks, json!({ "zeros": zeros, "checks": records })))
}

fn outer_check(ctx: &mut Context) -> Result<(Vec<Check>, serde_json::Value)> {
    let tol = ctx.scenario.tolerances;
    let quad = ctx.scenario.quad();
    let zeros = ctx.zeros()?;
    let mut checks = Vec::new();
    for lt in lambda_set() {
        let r = outer_poisson_check(&ctx.sol, &zeros, lt, &quad)?;
        checks.push(Check::at_most(
            format!("outer_poisson ({}, {})", lt.re, lt.im),
            r,
            tol.outer,
        ));
    }
    ctx.write_trace()?;
    Ok((checks, json!({ "zeros": zeros })))
}

fn szego(ctx: &mut Context) -> Result<(Vec<Check>, serde_json::Value)> {
    let sc = ctx.scenario;
    let tol = sc.tolerances;
    let series = ctx.series()?;
    let zeros = ctx.zeros()?;
    let opts = SzegoOptions {
        i_max: sc.i_max,
        tol_conv: tol.conv,
        quad: sc.quad(),
        ..SzegoOptions::default()
    };
    let r = szego_with(
        &ctx.spec,
        &ctx.sol,
        zeros,
        &series.coeffs,
        series.error_estimate,
        &opts,
    )?;
    let p = &r.predictions;
    let rel = |a: f64| (a - p.nonclassical).abs() / p.nonclassical.abs();
    let mut checks = vec![
        Check::at_most(
            "final_rel_error",
            r.relative_errors.last().copied().unwrap_or(f64::INFINITY),
            tol.conv,
        ),
        Check::holds("dyadic_trend", trend_ok(&r.relative_errors)),
        Check::holds("sequence_complete", r.truncated.is_none()),
        Check::at_most("bridge", r.bridge_max, tol.bridge),
        Check::holds("sign_pattern", r.sign_pattern_ok),
        Check::at_most(
            "final_display_form",
            rel(p.final_display),
            tol.prediction_forms,
        ),
        Check::at_most("q0_form", rel(p.via_q0), tol.prediction_forms),
    ];
    if let Some(c) = p.classical_symbol {
        checks.push(Check::at_most(
            "classical_symbol_form",
            rel(c),
            tol.prediction_forms,
        ));
    }
    #[derive(Serialize)]
    struct Row {
        i: usize,
        ratio: f64,
        predicted_nonclassical: f64,
        rel_error: f64,
    }
    let rows: Vec<Row> = r
        .ratios
        .iter()
        .map(|x| Row {
            i: x.i,
            ratio: x.ratio,
            predicted_nonclassical: x.predicted_nonclassical,
            rel_error: x.rel_error,
        })
        .collect();
    ctx.write_csv("szego.csv", &rows)?;
    Ok((checks, serde_json::to_value(&r)?))
}

fn setup(scenario: &Scenario) -> Result<(ToeplitzSpec, Solution)> {
    scenario.validate()?;
    let (spec, default_param) = match &scenario.instance {
        Instance::Explicit(spec) => (
            spec.clone(),
            Parameter::Herglotz(HerglotzSpec::constant_i(scenario.p)),
        ),
        Instance::Generator {
            kappa_target,
            spectrum_margin,
        } => generate_instance(
            scenario.seed,
            scenario.p,
            scenario.n,
            *kappa_target,
            *spectrum_margin,
        )?,
    };
    let param = scenario.parameter.clone().unwrap_or(default_param);
    let triple = build_structured_triple(&spec)?;
    let sol = Solution::new(triple, param, SolutionMode::Pair)?;
    Ok((spec, sol))
}

/// Runs the requested experiments in dependency order and writes
/// `report.json` plus one CSV per experiment into `out` (or the scenario's
/// `output_dir`, or `./out`).
pub fn run_scenario(scenario: &Scenario, out: Option<&Path>) -> Result<Outcome> {
    let out = out
        .map(Path::to_path_buf)
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out)?;
    let mut experiments: Vec<Experiment> = scenario.experiments.clone();
    experiments.sort();
    experiments.dedup();

    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        version: VERSION.into(),
        scenario: scenario.clone(),
        tolerances: scenario.tolerances,
        instance: None,
        parameter: None,
        setup_error: None,
        experiments: Vec::new(),
        passed: false,
    };
    let mut files = Vec::new();
    match setup(scenario) {
        Err(e) => {
            report.setup_error = Some(e.to_string());
            report.experiments = experiments
                .iter()
                .map(|&experiment| ExperimentResult {
                    experiment,
                    passed: false,
                    error: Some("not run: setup failed".into()),
                    checks: Vec::new(),
                    details: serde_json::Value::Null,
                })
                .collect();
        }
        Ok((spec, sol)) => {
            report.instance = Some(spec.clone());
            report.parameter = Some(sol.param.clone());
            let mut ctx = Context {
                scenario,
                spec,
                sol,
                out: out.clone(),
                zeros: None,
                series: None,
                trace_written: false,
                files: Vec::new(),
            };
            for &experiment in &experiments {
                let result = match experiment {
                    Experiment::IdentitySuite => identity_suite(&mut ctx),
                    Experiment::Interpolation => interpolation(&mut ctx),
                    Experiment::EntropyIdentity => entropy_identity(&mut ctx),
                    Experiment::OuterCheck => outer_check(&mut ctx),
                    Experiment::Szego => szego(&mut ctx),
                };
                report.experiments.push(match result {
                    Ok((checks, details)) => ExperimentResult {
                        experiment,
                        passed: checks.iter().all(|c| c.passed),
                        error: None,
                        checks,
                        details,
                    },
                    Err(e) => ExperimentResult {
                        experiment,
                        passed: false,
                        error: Some(e.to_string()),
                        checks: Vec::new(),
                        details: serde_json::Value::Null,
                    },
                });
            }
            files = ctx.files;
            report.passed = report.experiments.iter().all(|e| e.passed);
        }
    }
    let path = out.join("report.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(&path, text)?;
    files.insert(0, path);
    Ok(Outcome { report, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        let a = generate_instance(1, 1, 3, 1, 1e-3).unwrap();
        let b = generate_instance(1, 1, 3, 1, 1e-3).unwrap();
        assert_eq!(a, b);
        assert_eq!(negative_index(&a.0.toeplitz_matrix()).unwrap(), 1);
    }

    #[test]
    fn generator_reaches_targets() {
        for (p, n, k) in [(1, 3, 0), (2, 3, 2), (3, 2, 1)] {
            let (spec, _) = generate_instance(7, p, n, k, 1e-3).unwrap();
            assert_eq!(negative_index(&spec.toeplitz_matrix()).unwrap(), k);
        }
        assert!(generate_instance(1, 1, 2, 2, 1e-3).is_err());
    }

    #[test]
    fn scenario_json_round_trip() {
        let s = Scenario::generated(3, 2, 3, 1);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<Scenario>(&text).unwrap(), s);
        let minimal = r#"{"seed": 1, "p": 1, "n": 2, "instance": {"explicit": {"p": 1, "n": 2, "nu": [[0]], "blocks": [[[2]], [[1]]]}}, "experiments": ["szego"]}"#;
        let m: Scenario = serde_json::from_str(minimal).unwrap();
        assert_eq!(m.i_max, 32);
        assert!(m.validate().is_ok());
    }
}
