use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hartree::evolution::{HartreeSystem, PicardConfig, RhsMethod};
use hartree::field::{make_state, StateSpec, TorusLattice};
use hartree::{CorrelationMethod, PotentialModel, SpectralState};

fn setup(cutoff: usize) -> (HartreeSystem, SpectralState) {
    let lattice = TorusLattice::new(cutoff as f64, cutoff).unwrap();
    let potential = PotentialModel::gaussian(1.0, 1.0).unwrap();
    let system = HartreeSystem::new(&potential, lattice, true).unwrap();
    let spec = StateSpec::PerturbedCondensate {
        k0: [0, 0, 0],
        theta: 0.0,
        eps: 0.1,
        s: 6.0,
        seed: 1,
        eps_density_exponent: 0.0,
    };
    let state = make_state(&spec, lattice, 10.0).unwrap();
    (system, state)
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for cutoff in [2, 4, 8] {
        let (system, state) = setup(cutoff);
        group.bench_with_input(BenchmarkId::new("fft", cutoff), &cutoff, |b, _| {
            b.iter(|| system.rhs(black_box(&state), RhsMethod::Fft))
        });
        if cutoff <= 2 {
            group.bench_with_input(BenchmarkId::new("direct", cutoff), &cutoff, |b, _| {
                b.iter(|| system.rhs(black_box(&state), RhsMethod::Direct))
            });
        }
    }
    group.finish();
}

fn autocorrelation(c: &mut Criterion) {
    let mut group = c.benchmark_group("autocorrelation");
    for cutoff in [2, 4, 8] {
        let (_, state) = setup(cutoff);
        group.bench_with_input(BenchmarkId::from_parameter(cutoff), &cutoff, |b, _| {
            b.iter(|| black_box(&state).autocorrelation(CorrelationMethod::Fft))
        });
    }
    group.finish();
}

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for cutoff in [2, 4, 8] {
        let (system, state) = setup(cutoff);
        group.bench_with_input(BenchmarkId::new("split", cutoff), &cutoff, |b, _| {
            b.iter(|| system.step_split(black_box(&state), 1e-3).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("rk4", cutoff), &cutoff, |b, _| {
            b.iter(|| system.step_rk4(black_box(&state), 1e-3).unwrap())
        });
    }
    let (system, state) = setup(2);
    let t = 0.1 * hartree::evolution::lifespan_guard(&state, system.b()).guard;
    group.bench_function("picard/2", |b| {
        b.iter(|| {
            system
                .picard_solve(black_box(&state), t, &PicardConfig::default())
                .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, rhs, autocorrelation, steps);
criterion_main!(benches);
