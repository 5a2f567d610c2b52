use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use indef_entropy_core::caratheodory::{build_extension, solution_series};
use indef_entropy_core::entropy::{entropy_of_solution, q_tilde_zeros};
use indef_entropy_core::linalg::c64;
use indef_entropy_core::quadrature::QuadOptions;
use indef_entropy_core::szego::determinant_sequence;
use indef_entropy_core::{
    build_structured_triple, eval_frame, generate_instance, HerglotzSpec, Parameter, Solution,
    SolutionMode, ToeplitzSpec,
};

fn flagship() -> Solution {
    let spec = ToeplitzSpec::scalar(&[1.0, 1.3, -0.3]).unwrap();
    Solution::new(
        build_structured_triple(&spec).unwrap(),
        Parameter::Herglotz(HerglotzSpec::constant_i(1)),
        SolutionMode::Pair,
    )
    .unwrap()
}

fn frame(c: &mut Criterion) {
    let (spec, _) = generate_instance(1, 2, 8, 3, 1e-3).unwrap();
    let triple = build_structured_triple(&spec).unwrap();
    c.bench_function("frame p=2 n=8", |b| {
        b.iter(|| eval_frame(black_box(&triple), black_box(c64(0.7, 0.4))).unwrap())
    });
}

fn entropy(c: &mut Criterion) {
    let sol = flagship();
    let opts = QuadOptions::default();
    c.bench_function("entropy star", |b| {
        b.iter(|| entropy_of_solution(&sol, black_box(c64(0.2, 0.1)), true, &opts).unwrap())
    });
}

fn zeros(c: &mut Criterion) {
    let sol = flagship();
    c.bench_function("q-tilde zeros", |b| {
        b.iter(|| q_tilde_zeros(black_box(&sol)).unwrap())
    });
}

fn determinants(c: &mut Criterion) {
    let sol = flagship();
    let spec = ToeplitzSpec::scalar(&[1.0, 1.3, -0.3]).unwrap();
    let series = solution_series(&sol, 32).unwrap();
    let ext = build_extension(&spec, &series, 32).unwrap();
    c.bench_function("determinant sequence i=32", |b| {
        b.iter(|| determinant_sequence(black_box(&ext), 32).unwrap())
    });
}

criterion_group!(benches, frame, entropy, zeros, determinants);
criterion_main!(benches);
