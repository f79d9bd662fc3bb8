use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rdsir_bench::table_fixture;
use rdsir_core::spectral::{dispersion_scan, turing_thresholds, BetaScan, DiffusionParams};
use rdsir_core::{presets, turing_hopf_detect};

fn spectral(c: &mut Criterion) {
    let (p, e2) = table_fixture();
    let diff = DiffusionParams::new(4.6028, 0.01, 5.0).unwrap();
    c.bench_function("turing_thresholds", |b| {
        b.iter(|| turing_thresholds(black_box(&p), black_box(&diff), &e2).unwrap())
    });
    c.bench_function("dispersion_scan_k64", |b| {
        b.iter(|| dispersion_scan(black_box(&p), black_box(&diff), &e2, 64))
    });
    let th = presets::turing_hopf_params(0.0073).unwrap();
    let th_diff = DiffusionParams::new(0.07, 0.01, 5.0).unwrap();
    c.bench_function("turing_hopf_detect_4_3", |b| {
        b.iter(|| turing_hopf_detect(black_box(&th), &th_diff, 4, 3, BetaScan::default()).unwrap())
    });
}

criterion_group!(benches, spectral);
criterion_main!(benches);
