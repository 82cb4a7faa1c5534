use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use saga_bench::powerlaw_fixture;
use saga_core::cells::{lstm_fold_steps, LstmParams};
use saga_core::data::random_features;
use saga_core::tensor::{gemm, index_select_rows, segment_reduce, spmm, Reduce};

fn sparse(c: &mut Criterion) {
    let mut group = c.benchmark_group("gather_sum");
    for n in [10_000usize, 50_000] {
        let (g, x) = powerlaw_fixture(n, 32);
        let adj = g.unit_adjacency_in().clone();
        let srcs: Vec<u32> = g.edges().iter().map(|e| e.src).collect();
        group.bench_with_input(BenchmarkId::new("spmm", n), &n, |b, _| {
            b.iter(|| spmm(black_box(&adj), black_box(&x)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("select_reduce", n), &n, |b, _| {
            b.iter(|| {
                let m = index_select_rows(black_box(&x), &srcs).unwrap();
                segment_reduce(&m, &g, Reduce::Sum).unwrap()
            })
        });
    }
    group.finish();
}

fn dense(c: &mut Criterion) {
    let a = random_features(4096, 32, 1);
    let w = random_features(32, 32, 2);
    c.bench_function("gemm_4096x32x32", |b| {
        b.iter(|| gemm(black_box(&a), black_box(&w)).unwrap())
    });
}

fn cells(c: &mut Criterion) {
    let p = LstmParams::zeros(32, 32);
    let steps: Vec<_> = (0..8).map(|t| random_features(512, 32, t)).collect();
    c.bench_function("lstm_512rows_8steps", |b| {
        b.iter(|| lstm_fold_steps(black_box(&steps), &p).unwrap())
    });
}

criterion_group!(benches, sparse, dense, cells);
criterion_main!(benches);
