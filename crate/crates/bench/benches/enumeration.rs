use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use depthlab_core::complexity::{enumerate_outputs, Census};
use depthlab_core::reference::reference_roster;

fn enumeration(c: &mut Criterion) {
    let um = reference_roster();
    let mut group = c.benchmark_group("enumerate_outputs");
    for cap in [10usize, 12, 14] {
        group.bench_with_input(BenchmarkId::from_parameter(cap), &cap, |b, &cap| {
            b.iter(|| enumerate_outputs(&um, cap, 100_000))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("census");
    group.sample_size(10);
    for cap in [12usize, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(cap), &cap, |b, &cap| {
            b.iter(|| Census::build(&um, cap, 100_000))
        });
    }
    group.finish();
}

criterion_group!(benches, enumeration);
criterion_main!(benches);
