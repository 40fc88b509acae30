use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use multinorm::matrix_laws::row_special_decompose;
use multinorm::optim::{op_norm_pq, op_norm_quick};
use multinorm::{evaluate, Index, MultiNormSpec, OptimConfig};
use multinorm_bench::{operator, space, tuple};
use std::hint::black_box;

fn row_special(c: &mut Criterion) {
    let mut g = c.benchmark_group("row_special_decompose");
    for n in [4, 16, 64] {
        let a = operator(n, n, 2.0, 2.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| row_special_decompose(black_box(a))));
    }
    g.finish();
}

fn op_norm(c: &mut Criterion) {
    let cfg = OptimConfig::default();
    let mut g = c.benchmark_group("op_norm");
    g.sample_size(10);
    for (p, q) in [(1.0, 3.0), (3.0, 1.5), (4.0, 4.0)] {
        let a = operator(4, 4, p, q);
        let id = format!("{p}->{q}");
        g.bench_with_input(BenchmarkId::new("certified", &id), &a, |b, a| b.iter(|| op_norm_pq(black_box(a), &cfg)));
        g.bench_with_input(BenchmarkId::new("quick", &id), &a, |b, a| b.iter(|| op_norm_quick(black_box(a), &cfg)));
    }
    g.finish();
}

fn evaluation(c: &mut Criterion) {
    let cfg = OptimConfig::default();
    let q = |v: f64| Index::new(v).unwrap();
    let specs = [
        MultiNormSpec::Min,
        MultiNormSpec::Lattice,
        MultiNormSpec::StandardQ { q: q(3.0) },
        MultiNormSpec::Max,
        MultiNormSpec::WeakSumming { p: q(2.0) },
    ];
    let mut g = c.benchmark_group("evaluate");
    g.sample_size(10);
    let t = tuple(&space(3.0, 4), 4);
    for spec in &specs {
        g.bench_with_input(BenchmarkId::from_parameter(spec.name()), spec, |b, s| {
            b.iter(|| evaluate(black_box(s), &t, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, row_special, op_norm, evaluation);
criterion_main!(benches);
