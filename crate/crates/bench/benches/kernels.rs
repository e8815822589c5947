use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nsch_bench::spinodal_fixture;
use nsch_core::ch_solver::ChSolver;
use nsch_core::coupled::{Forcing, Stepper};
use nsch_core::grid::{Projector, ScalarField};

const SIZES: [usize; 2] = [32, 64];

fn projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("projection");
    for n in SIZES {
        let (cfg, state) = spinodal_fixture(n).unwrap();
        let g = cfg.grid.build().unwrap();
        let proj = Projector::new(&g);
        let mut rhs = state.phi.clone();
        rhs.subtract_mean();
        group.bench_with_input(BenchmarkId::new("poisson", n), &rhs, |b, rhs| {
            b.iter(|| proj.poisson(black_box(rhs)).unwrap())
        });
    }
    group.finish();
}

fn ch_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("cahn_hilliard_step");
    for n in SIZES {
        let (cfg, state) = spinodal_fixture(n).unwrap();
        let g = cfg.grid.build().unwrap();
        let solver = ChSolver::new(&g, &cfg.params, cfg.step_config().ch).unwrap();
        let phi: &ScalarField = &state.phi;
        group.bench_with_input(BenchmarkId::from_parameter(n), phi, |b, phi| {
            b.iter(|| solver.step(black_box(phi), None, None).unwrap())
        });
    }
    group.finish();
}

fn coupled_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("coupled_step");
    group.sample_size(20);
    for n in SIZES {
        let (cfg, state) = spinodal_fixture(n).unwrap();
        let g = cfg.grid.build().unwrap();
        let stepper = Stepper::new(&g, &cfg.params, cfg.step_config()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &state, |b, s| {
            b.iter(|| stepper.step_with(black_box(s), Forcing::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, projection, ch_step, coupled_step);
criterion_main!(benches);
