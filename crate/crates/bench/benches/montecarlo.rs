use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qssep_core::montecarlo::{step, trajectory_rng};
use qssep_core::{GState, QssepConfig};

fn steps(c: &mut Criterion) {
    let mut g = c.benchmark_group("montecarlo");
    for l in [10usize, 40] {
        let cfg = QssepConfig { l, ..QssepConfig::default() };
        g.bench_function(format!("step_L{l}"), |b| {
            let mut rng = trajectory_rng(cfg.seed, 0);
            let mut state = GState::initial(&cfg);
            let mut s = 0;
            b.iter(|| {
                s += 1;
                step(black_box(&mut state), &cfg, &mut rng, s).unwrap();
            })
        });
    }
    g.finish();
}

criterion_group!(benches, steps);
criterion_main!(benches);
