//! Each workload runs on the global rayon pool and inside a one-thread pool.
//! Build with `--no-default-features` to measure the rayon-free fallback.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gentensor::canon::FamilyKind;
use gentensor::structlab::{audit_associativity, audit_three_way, enumerate_ops_audit};
use gentensor::{saturate, Carrier, SaturationOptions};

fn pools() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    vec![("parallel", None), ("one-thread", Some(single))]
}

fn run<R>(pool: &Option<rayon::ThreadPool>, f: impl Fn() -> R + Send + Sync) -> R
where
    R: Send,
{
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn saturation(c: &mut Criterion) {
    let z5 = Arc::new(Carrier::modring(5).unwrap());
    let rules = Arc::new(FamilyKind::Midpoint.rule_system(z5.clone(), z5).unwrap());
    let opts = SaturationOptions::without_stability();
    let mut g = c.benchmark_group("saturate_midpoint_z5_l3");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                run(&pool, || {
                    saturate(black_box(rules.clone()), 3, &opts).unwrap()
                })
            })
        });
    }
    g.finish();
}

fn audits(c: &mut Criterion) {
    let c3 = Carrier::plain_sized(3).unwrap();
    let mut g = c.benchmark_group("audits_n3");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("count", name), |b| {
            b.iter(|| run(&pool, || enumerate_ops_audit(black_box(&c3)).unwrap()))
        });
        g.bench_function(BenchmarkId::new("three_way", name), |b| {
            b.iter(|| run(&pool, || audit_three_way(black_box(&c3)).unwrap()))
        });
        g.bench_function(BenchmarkId::new("associativity", name), |b| {
            b.iter(|| run(&pool, || audit_associativity(black_box(&c3)).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, saturation, audits);
criterion_main!(benches);
