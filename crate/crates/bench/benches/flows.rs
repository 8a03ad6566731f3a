use criterion::{black_box, criterion_group, criterion_main, Criterion};
use tongues_core::{
    canonical_series, monodromy, period_map, rotation_number, IntegratorConfig, Params, Which,
};

fn period_maps(c: &mut Criterion) {
    let cfg = IntegratorConfig::default();
    let mut group = c.benchmark_group("period_map");
    for s in [1.0, 10.0] {
        let p = Params::new(1.0, 0.7, s).unwrap();
        group.bench_function(format!("s={s}"), |b| {
            b.iter(|| period_map(black_box(&p), black_box(0.3), &cfg).unwrap())
        });
    }
    group.finish();
}

fn rotation_numbers(c: &mut Criterion) {
    let cfg = IntegratorConfig::default();
    let mut group = c.benchmark_group("rotation_number");
    group.sample_size(10);
    let locked = Params::new(1.0, 0.0, 2.5).unwrap();
    let free = Params::new(1.0, 3.0, 0.0).unwrap();
    group.bench_function("locked", |b| {
        b.iter(|| rotation_number(black_box(&locked), &cfg, 4096).unwrap())
    });
    group.bench_function("irrational", |b| {
        b.iter(|| rotation_number(black_box(&free), &cfg, 4096).unwrap())
    });
    group.finish();
}

fn monodromies(c: &mut Criterion) {
    let cfg = IntegratorConfig::with_tolerance(1e-12);
    let mut group = c.benchmark_group("monodromy");
    for s in [0.0, 5.0, 10.0] {
        let p = Params::new(1.0, 1.0, s).unwrap();
        group.bench_function(format!("s={s}"), |b| {
            b.iter(|| monodromy(black_box(&p), &cfg).unwrap())
        });
    }
    group.finish();
}

fn series(c: &mut Criterion) {
    let p = Params::new(1.0, 0.0, 2.678_116_801_906_561_3).unwrap();
    c.bench_function("canonical_series/order30", |b| {
        b.iter(|| canonical_series(black_box(&p), Which::One, 30).unwrap())
    });
}

criterion_group!(benches, period_maps, rotation_numbers, monodromies, series);
criterion_main!(benches);
