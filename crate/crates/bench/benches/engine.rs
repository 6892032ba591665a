use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mvcorr::correlations::{assemble_exact, assemble_numeric, cyclic_w32_model, w32_exact_model};
use mvcorr::engine::{apply, induced_sigma, truncate_cyclic, zeta1, ModelKind};
use mvcorr::words::{hgh, ping_pong_injectivity_check};

fn exact(c: &mut Criterion) {
    let su = induced_sigma(&hgh());
    let z = zeta1(0);
    c.bench_function("apply+inner σ(hgh)⊗σ(hgh) on ζ1", |b| {
        b.iter(|| apply(Some(&su), Some(&su), black_box(&z)).unwrap().inner(&z).unwrap())
    });
    let model = w32_exact_model().unwrap();
    c.bench_function("assemble exact W32 table", |b| b.iter(|| assemble_exact(black_box(&model)).unwrap()));
    c.bench_function("ping-pong L=6 E=3", |b| b.iter(|| ping_pong_injectivity_check(6, 3, 1_000_000).unwrap()));
}

fn truncation(c: &mut Criterion) {
    c.bench_function("truncate induced M=16", |b| b.iter(|| truncate_cyclic(black_box(16), ModelKind::Induced).unwrap()));
    let model = cyclic_w32_model(16).unwrap();
    c.bench_function("assemble numeric W32 M=16", |b| b.iter(|| assemble_numeric(black_box(&model)).unwrap()));
}

criterion_group!(benches, exact, truncation);
criterion_main!(benches);
