use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use lri_control::analysis::sweep_beta_dot0_with;
use lri_control::parallel::Execution;
use lri_control::pulse::synthesize_with;
use lri_control::schedule::{antedated_pair, beta_dot0_from_units};

const MODES: [(&str, Execution); 2] = [
    ("serial", Execution::Serial),
    ("parallel", Execution::Parallel),
];

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_beta_dot0");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 200), &mode, |b, &mode| {
            b.iter(|| sweep_beta_dot0_with(1.0, black_box(0.5), 0.1, 8.0, 200, mode).unwrap())
        });
    }
    group.finish();
}

fn synthesis(c: &mut Criterion) {
    let pair = antedated_pair(1.0, 0.5, beta_dot0_from_units(5.232, 1.0)).unwrap();
    let mut group = c.benchmark_group("synthesize");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 100_000), &mode, |b, &mode| {
            b.iter(|| synthesize_with(black_box(&pair), 100_000, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, synthesis);
criterion_main!(benches);
