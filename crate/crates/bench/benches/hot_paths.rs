use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use randwave::evolve::{evolve_full, EvolveOptions, GuardMode};
use randwave::random::{randomize, CoefficientLaw, SeedSpec};
use randwave::spectral::{Component, SpectralEngine};
use randwave_bench::bench_spectrum;

fn transforms(c: &mut Criterion) {
    let sp = bench_spectrum(8, 2.0);
    let mut group = c.benchmark_group("transform");
    group.bench_function("synthesize_n8_dealias", |b| {
        let mut engine = SpectralEngine::for_cubic(8);
        b.iter(|| {
            let field = engine.synthesize(black_box(&sp), Component::Position).unwrap();
            black_box(field.values()[0])
        })
    });
    group.bench_function("round_trip_n8_dealias", |b| {
        let mut engine = SpectralEngine::for_cubic(8);
        b.iter(|| {
            let field = engine.synthesize(black_box(&sp), Component::Position).unwrap();
            let rec = engine.analyze(&field, 8).unwrap();
            black_box(rec.a)
        })
    });
    group.finish();
}

fn stepping(c: &mut Criterion) {
    let sp = bench_spectrum(8, 2.0);
    let opts = EvolveOptions {
        dt: 1e-3,
        t_end: 0.1,
        record_every: 100,
        snapshots: false,
        guard: GuardMode::Off,
        nonlinearity: true,
    };
    c.bench_function("evolve_full_100_steps_n8", |b| {
        b.iter_batched(
            || sp.clone(),
            |data| black_box(evolve_full(&data, &opts).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

fn randomization(c: &mut Criterion) {
    let sp = bench_spectrum(8, 2.0);
    let law = CoefficientLaw::gaussian();
    c.bench_function("randomize_n8", |b| {
        let mut k = 0u64;
        b.iter(|| {
            k += 1;
            black_box(randomize(&sp, &law, SeedSpec::new(3, k)).unwrap())
        })
    });
}

criterion_group!(benches, transforms, stepping, randomization);
criterion_main!(benches);
