use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use depthlab_core::construction::{construction_census, run, run_with_census};
use depthlab_core::reference::{reference_config, seeded_configs};
use depthlab_core::verify::verify_run;

fn construction(c: &mut Criterion) {
    let config = reference_config();
    let census = Arc::new(construction_census(&config));
    let mut group = c.benchmark_group("run_reference");
    group.sample_size(20);
    for stages in [100u64, 500] {
        group.bench_with_input(BenchmarkId::from_parameter(stages), &stages, |b, &stages| {
            b.iter(|| run_with_census(&config, census.clone(), stages))
        });
    }
    group.finish();

    let (_, acting) = seeded_configs()
        .into_iter()
        .find(|(n, _)| *n == "acting-set")
        .expect("seeded");
    let out = run(&acting, 500);
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("acting-set_500", |b| {
        b.iter(|| verify_run(&acting, &out.trace, &out.requests).expect("matching config"))
    });
    group.finish();
}

criterion_group!(benches, construction);
criterion_main!(benches);
