use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use critsys::coupling::CouplingParams;
use critsys::exponents::{certify_interpolation, Exponents};
use critsys::par;
use critsys::radial::{BumpSampler, RadialGrid};
use critsys::regime::{sweep_seq, SweepParam};

fn regime_sweep(c: &mut Criterion) {
    let e = Exponents::single(3, 1.0).unwrap();
    let base = CouplingParams::new(1.0, 1.0, 1.0, 2.0, 2.0).unwrap();
    let mut group = c.benchmark_group("regime_sweep");
    for n in [64usize, 512] {
        let ks: Vec<f64> = (0..n).map(|i| 0.01 + 3.0 * i as f64 / n as f64).collect();
        group.bench_with_input(BenchmarkId::new("seq", n), &ks, |b, ks| {
            b.iter(|| sweep_seq(&e, &base, SweepParam::Kappa, black_box(ks)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("par", n), &ks, |b, ks| {
            b.iter(|| critsys::regime::sweep(&e, &base, SweepParam::Kappa, black_box(ks)))
        });
    }
    group.finish();
}

fn interpolation_batch(c: &mut Criterion) {
    let grid = Arc::new(RadialGrid::with_defaults(3).unwrap());
    let mut sampler = BumpSampler::new(1);
    let profiles: Vec<_> = (0..64).map(|_| sampler.sample(&grid)).collect();
    let certify = |_: usize, u: &critsys::radial::RadialProfile| {
        certify_interpolation(u, 0.0, 1.0, 2.0).unwrap()
    };
    let mut group = c.benchmark_group("interpolation_batch");
    group.bench_function("seq", |b| {
        b.iter(|| par::map_indexed_seq(black_box(&profiles), certify))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("par", |b| {
        b.iter(|| par::map_indexed_par(black_box(&profiles), certify))
    });
    group.finish();
}

criterion_group!(benches, regime_sweep, interpolation_batch);
criterion_main!(benches);
