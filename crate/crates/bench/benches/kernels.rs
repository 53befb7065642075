use criterion::{criterion_group, criterion_main, Criterion};
use gradamp_bench::{bessel_sweep, cn_steps, demo_target, fit, holder};
use std::hint::black_box;

fn benches(c: &mut Criterion) {
    c.bench_function("bessel_sweep", |b| b.iter(|| black_box(bessel_sweep().unwrap())));
    let target = demo_target().unwrap();
    let mut g = c.benchmark_group("fit");
    g.sample_size(10);
    for n in [64, 128] {
        g.bench_function(format!("two_ball_{n}"), |b| b.iter(|| black_box(fit(&target, n).unwrap())));
    }
    g.finish();
    let mut g = c.benchmark_group("crank_nicolson");
    g.sample_size(10);
    for n in [65, 129] {
        g.bench_function(format!("ten_steps_{n}"), |b| b.iter(|| black_box(cn_steps(n).unwrap())));
    }
    g.finish();
    let k = fit(&target, 64).unwrap();
    let mut g = c.benchmark_group("holder");
    g.sample_size(10);
    g.bench_function("disk_h0.02", |b| b.iter(|| black_box(holder(&k, 0.02).unwrap())));
    g.finish();
}

criterion_group!(kernels, benches);
criterion_main!(kernels);
