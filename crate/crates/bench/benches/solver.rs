use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qssep_core::{Cycle, Property, Solver, Verifier};

fn loop_expectation(c: &mut Criterion) {
    let mut g = c.benchmark_group("loop_expectation");
    for p in [5usize, 7, 9] {
        let sigma = Cycle::regular(p);
        g.bench_with_input(BenchmarkId::new("regular_cold", p), &sigma, |b, s| {
            b.iter(|| Solver::new().poly(black_box(s)).unwrap())
        });
    }
    g.bench_function("all_cycles_p6", |b| {
        b.iter(|| {
            let s = Solver::new();
            for sigma in Cycle::all(6) {
                black_box(s.poly(&sigma).unwrap());
            }
        })
    });
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("verifier");
    g.sample_size(10);
    g.bench_function("locality_sweep_p5", |b| {
        let props = [Property::Moves, Property::Continuity, Property::Compat, Property::Propag];
        b.iter(|| {
            let s = Solver::new();
            black_box(Verifier::new(&s).sweep(1, 5, &props))
        })
    });
    g.finish();
}

criterion_group!(benches, loop_expectation, sweep);
criterion_main!(benches);
