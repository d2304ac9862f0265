use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rsalab_bench::strategies;

fn by_strategy(c: &mut Criterion) {
    let mut group = c.benchmark_group("modexp");
    // Private exponent of the 131 * 137 key: linear strategies do ~6k steps.
    for (label, e) in [("e=253", 253u64), ("e=11787", 11787)] {
        for algo in strategies() {
            group.bench_with_input(BenchmarkId::new(algo.to_string(), label), &e, |b, &e| {
                b.iter(|| algo.apply(black_box(1500), black_box(e), 17947).unwrap())
            });
        }
    }
    group.finish();
}

fn windows(c: &mut Criterion) {
    let mut group = c.benchmark_group("window");
    let (g, e, m) = (987_654_321u64, u64::MAX - 12345, (1u64 << 61) - 1);
    for k in 1..=8 {
        group.bench_with_input(BenchmarkId::new("kary", k), &k, |b, &k| {
            b.iter(|| rsalab_core::modmath::modexp_kary(black_box(g), e, m, k).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sliding", k), &k, |b, &k| {
            b.iter(|| rsalab_core::modmath::modexp_sliding(black_box(g), e, m, k).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, by_strategy, windows);
criterion_main!(benches);
