use std::hint::black_box;

use cavqed_core::fit::{FitOptions, Weighting};
use cavqed_core::qed::{GAMMA_D2_MHZ, HYPERFINE_LINES_MHZ};
use cavqed_core::spectrum::linspace;
use cavqed_core::{
    averaged_spectrum, fit_spectrum, oracle_reflectivity, spectrum, Atom, AtomScenario, CavityParams, EmitterSet,
    FitData, FitParam, FitProblem, ModeGeometry, MonteCarlo, ParamKind, SystemSpec, Transition,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn hyperfine_lines(c0: [f64; 3]) -> Vec<Transition> {
    HYPERFINE_LINES_MHZ
        .iter()
        .zip(c0)
        .map(|(&d, c)| Transition::with_cooperativity(d, GAMMA_D2_MHZ, c).unwrap())
        .collect()
}

fn closed_form(c: &mut Criterion) {
    let cavity = CavityParams::default();
    let grid = linspace(-1000.0, 600.0, 1601);
    let atoms = EmitterSet::new(vec![Atom::new(0.0, hyperfine_lines([9.0, 46.0, 128.0])); 2]);
    c.bench_function("closed_form_1601_points", |b| {
        b.iter(|| spectrum(black_box(&grid), &cavity, &atoms).unwrap())
    });
}

fn motion_average(c: &mut Criterion) {
    let cavity = CavityParams::default();
    let grid = linspace(-1000.0, 600.0, 161);
    let atom = AtomScenario::new(hyperfine_lines([9.0, 46.0, 128.0]), 0.0, 190.0, 33.0).unwrap();
    let geom = ModeGeometry::default();
    let mut group = c.benchmark_group("motion_average_161_points");
    group.sample_size(20);
    for samples in [100, 1000] {
        let mc = MonteCarlo::new(samples, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(samples), &mc, |b, mc| {
            b.iter(|| averaged_spectrum(&grid, &cavity, std::slice::from_ref(&atom), &geom, mc).unwrap())
        });
    }
    group.finish();
}

fn master_equation(c: &mut Criterion) {
    let cavity = CavityParams::default();
    let mut group = c.benchmark_group("master_equation_point");
    group.sample_size(10);
    for cutoff in [2, 3] {
        let one = EmitterSet::single(Atom::new(
            0.0,
            vec![Transition::with_cooperativity(0.0, GAMMA_D2_MHZ, 71.0).unwrap()],
        ));
        let spec = SystemSpec::new(cavity, one, cutoff, 0.02);
        group.bench_with_input(BenchmarkId::from_parameter(cutoff), &spec, |b, spec| {
            b.iter(|| oracle_reflectivity(spec, black_box(50.0)).unwrap())
        });
    }
    group.finish();
}

fn fit(c: &mut Criterion) {
    let cavity = CavityParams::default();
    let grid = linspace(-900.0, 500.0, 141);
    let atom = AtomScenario::new(hyperfine_lines([9.0, 46.0, 128.0]), 0.0, 190.0, 33.0).unwrap();
    let geom = ModeGeometry::default();
    let mc = MonteCarlo::new(200, 3).unwrap();
    let (data, _) = averaged_spectrum(&grid, &cavity, std::slice::from_ref(&atom), &geom, &mc).unwrap();
    let problem = FitProblem {
        data: FitData::new(grid, data.values().to_vec(), None).unwrap(),
        cavity,
        atoms: vec![atom],
        geometry: geom,
        monte_carlo: mc,
        params: (0..3)
            .map(|i| {
                FitParam::new(
                    ParamKind::LineC0 { atom: 0, line: i },
                    [8.0, 40.0, 110.0][i],
                    0.0,
                    1000.0,
                )
            })
            .collect(),
        weighting: Weighting::Uniform,
        options: FitOptions::default(),
    };
    let start = problem.initial();
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    group.bench_function("three_line_strengths", |b| {
        b.iter(|| fit_spectrum(&problem, &start).unwrap())
    });
    group.finish();
}

criterion_group!(benches, closed_form, motion_average, master_equation, fit);
criterion_main!(benches);
