//! Sequential against parallel execution of the cycle enumeration engine.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use orbitcount_core::counting::{chebotarev_distribution, count_windows, Window};
use orbitcount_core::graph_shift::enumerate_prime_cycles_with;
use orbitcount_core::model::builtin_model;
use orbitcount_core::Execution;

const STRATEGIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn enumeration(c: &mut Criterion) {
    let m = builtin_model("bench3").unwrap();
    let mut group = c.benchmark_group("enumerate_prime_cycles");
    for n in [10, 12] {
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| enumerate_prime_cycles_with(&m.graph, black_box(n), exec).len())
            });
        }
    }
    group.finish();
}

fn window_counts(c: &mut Criterion) {
    let m = builtin_model("bench3").unwrap();
    let windows: Vec<Window> =
        (12..=20).map(|t| Window { lo: t as f64 - 1.0, hi: t as f64, class: Some(vec![-3, 0]) }).collect();
    let mut group = c.benchmark_group("count_windows_T20");
    group.sample_size(20);
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| count_windows(&m.graph, &m.weights, black_box(&windows), &m.removed, exec))
        });
    }
    group.finish();
}

fn quotient_frequencies(c: &mut Criterion) {
    let m = builtin_model("bench3").unwrap();
    let q = m.quotient("z2xz3").unwrap();
    let mut group = c.benchmark_group("chebotarev_n13");
    group.sample_size(20);
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| chebotarev_distribution(&m.graph, &m.weights, &m.removed, &q, black_box(13), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, enumeration, window_counts, quotient_frequencies);
criterion_main!(benches);
