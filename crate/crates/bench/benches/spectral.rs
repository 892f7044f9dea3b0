use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use framelab::{canonical_parseval, frame_bounds, verify_projection_model};
use framelab_bench::random_frame;

fn bounds(c: &mut Criterion) {
    let mut g = c.benchmark_group("frame_bounds");
    for dim in [16, 64, 128] {
        let x = random_frame(1, dim, 2 * dim);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &x, |b, x| b.iter(|| frame_bounds(black_box(x))));
    }
    g.finish();
}

fn parseval_and_projection(c: &mut Criterion) {
    let x = random_frame(2, 32, 64);
    c.bench_function("canonical_parseval/32x64", |b| b.iter(|| canonical_parseval(black_box(&x))));
    c.bench_function("projection_model/32x64", |b| b.iter(|| verify_projection_model(black_box(&x))));
}

criterion_group!(benches, bounds, parseval_and_projection);
criterion_main!(benches);
