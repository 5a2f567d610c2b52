mod common;

use std::fs;

use common::*;
use indef_entropy_core::entropy::{
    entropy_identity_check, linear_herglotz, outer_poisson_check, q_tilde_zeros,
};
use indef_entropy_core::linalg::{c64, CMatrix};
use indef_entropy_core::params::{pick_kernel_negative_squares, pick_points};
use indef_entropy_core::quadrature::QuadOptions;
use indef_entropy_core::scenario::{Experiment, Instance, Report, Scenario};
use indef_entropy_core::{
    generate_instance, run_scenario, verify_solution, ContractionSpec, Error, Parameter,
    SolutionMode, ToeplitzSpec,
};

#[test]
fn generated_scenario_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_scenario(&Scenario::generated(1, 1, 3, 1), Some(dir.path())).unwrap();
    assert!(outcome.passed(), "{:#?}", outcome.report.experiments);
    let mut names: Vec<String> = outcome
        .files
        .iter()
        .map(|f| f.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "entropy_trace.csv",
            "identity_suite.csv",
            "interpolation.csv",
            "report.json",
            "szego.csv"
        ]
    );
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(report, outcome.report);
    assert_eq!(report.experiments.len(), Experiment::ALL.len());
}

#[test]
fn setup_failure_is_reported() {
    let mut spec = ToeplitzSpec::scalar(&INDEFINITE).unwrap();
    spec.blocks[0][(0, 0)] = c64(1.0, 0.5);
    let scenario = Scenario {
        instance: Instance::Explicit(spec),
        ..Scenario::generated(0, 1, 3, 0)
    };
    let dir = tempfile::tempdir().unwrap();
    let outcome = run_scenario(&scenario, Some(dir.path())).unwrap();
    assert!(!outcome.passed());
    assert!(outcome.report.setup_error.is_some());
    assert!(outcome.report.experiments.iter().all(|e| !e.passed));
}

#[test]
fn scenario_rejects_unknown_fields() {
    let mut value = serde_json::to_value(Scenario::generated(1, 1, 3, 1)).unwrap();
    value["bogus"] = serde_json::json!(1);
    assert!(serde_json::from_value::<Scenario>(value).is_err());
}

#[test]
fn non_constant_parameter_identity() {
    let opts = QuadOptions::default();
    for values in [&DEFINITE[..], &INDEFINITE[..]] {
        let (spec, _) = flagship(values);
        let sol = solution_for(&spec, linear_herglotz(1));
        let zeros = q_tilde_zeros(&sol).unwrap();
        assert!(zeros.distinct_count <= sol.triple.kappa + 1);
        for lt in [c64(0.0, 0.0), c64(0.3, 0.2)] {
            let c = entropy_identity_check(&sol, &zeros, lt, &opts).unwrap();
            assert!(c.residual <= 1e-5, "{values:?} {lt}: {c:?}");
            assert!(outer_poisson_check(&sol, &zeros, lt, &opts).unwrap() <= 1e-6);
        }
        let report = verify_solution(&sol, &spec, 8).unwrap();
        assert!(report.passed, "{report:?}");
    }
}

#[test]
fn contraction_parameter_interpolates() {
    let (spec, _) = flagship(&INDEFINITE);
    let phi0 = CMatrix::from_element(1, 1, c64(0.3, -0.2));
    let sol = solution_for(&spec, Parameter::Contraction(ContractionSpec { phi0 }));
    let report = verify_solution(&sol, &spec, 8).unwrap();
    assert!(report.passed, "{report:?}");
    assert!(report.kappas.iter().all(|&k| k == 1));
}

#[test]
fn solution_kernel_has_kappa_negative_squares() {
    for values in [&DEFINITE[..], &INDEFINITE[..]] {
        let (spec, sol) = flagship(values);
        let kappa = negative_eigenvalues(&toeplitz(&spec));
        let points = pick_points(24, 9);
        assert_eq!(
            pick_kernel_negative_squares(|z| sol.eval(z), &points).unwrap(),
            kappa
        );
    }
}

#[test]
fn solutions_have_poles_opposite_the_zeros() {
    for seed in 0..6 {
        let (spec, param) = generate_instance(seed, 1 + (seed % 2) as usize, 4, 2, 1e-3).unwrap();
        let sol = solution_for(&spec, param);
        let zeros = q_tilde_zeros(&sol).unwrap();
        for z in &zeros.zeros {
            // ω⋆ has its poles at −λ_j.
            let near = -z.lambda + c64(1e-7, 0.0);
            match sol.eval_omega_star(near) {
                Ok(w) => assert!(w.norm() > 1e4, "seed {seed}: |ω⋆| = {}", w.norm()),
                Err(e) => assert!(matches!(e, Error::SolutionPole { .. }), "{e}"),
            }
            let far = -z.lambda * 0.5;
            if zeros.zeros.iter().all(|o| (o.lambda + far).norm() > 0.1) {
                assert!(sol.eval_omega_star(far).is_ok());
            }
        }
    }
}

#[test]
fn contractive_mode_matches_pair_mode() {
    let (_, sol) = flagship(&INDEFINITE);
    let hat = indef_entropy_core::Solution::new(
        sol.triple.clone(),
        sol.param.clone(),
        SolutionMode::Contractive,
    )
    .unwrap();
    for z in [c64(0.4, 1.0), c64(-1.3, 0.7), c64(2.0, 3.0)] {
        let a = sol.eval(z).unwrap();
        let b = hat.eval(z).unwrap();
        assert!((&a - &b).norm() <= 1e-10 * a.norm(), "{z}");
    }
}
