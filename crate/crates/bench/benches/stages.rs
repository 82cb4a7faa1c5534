use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use saga_bench::{powerlaw_fixture, SEED};
use saga_core::graph::random_edge_types;
use saga_core::models::{build_model, ModelName};
use saga_core::{Fusion, Profiler};

fn models(c: &mut Criterion) {
    let (g, x) = powerlaw_fixture(5_000, 32);
    let g = random_edge_types(&g, 4, SEED).unwrap();
    let mut group = c.benchmark_group("model_forward");
    group.sample_size(10);
    for name in ModelName::ALL {
        let card = build_model(name, 32, 32, 32, 2, g.num_etypes(), SEED).unwrap();
        group.bench_function(BenchmarkId::new(name.name(), card.spec.fusion), |b| {
            b.iter(|| card.run(&g, &x, &mut Profiler::new()).unwrap())
        });
        if card.spec.fusion == Fusion::On {
            let off = card.clone().with_fusion(Fusion::Off).unwrap();
            group.bench_function(BenchmarkId::new(name.name(), Fusion::Off), |b| {
                b.iter(|| off.run(&g, &x, &mut Profiler::new()).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, models);
criterion_main!(benches);
