use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use supersym_core::colorflavor::{cft_rhs, CftConfig, CftSource};
use supersym_core::duality::verify_trace_duality;
use supersym_core::ensembles::sample;
use supersym_core::testing::{random_element, random_supermatrix, Grade};
use supersym_core::{Beta, Complex64, EnsembleClass, EnsembleSpec, VectorBundle};

fn grassmann_product(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_element::<Complex64, _>(&mut rng, 6, Grade::Any, 40, 3);
    let b = random_element::<Complex64, _>(&mut rng, 6, Grade::Any, 40, 3);
    c.bench_function("grassmann product 12 generators", |bench| bench.iter(|| black_box(&a * &b)));
}

fn superdeterminant(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = random_supermatrix::<Complex64, _>(&mut rng, 2, 2, 2, 4);
    c.bench_function("sdet 2/2", |bench| bench.iter(|| black_box(m.sdet().unwrap())));
}

fn trace_duality(c: &mut Criterion) {
    let bundle = VectorBundle::random(Beta::Unitary, 3, vec![1, 1, -1, -1], 3, true).unwrap();
    c.bench_function("trace duality beta=2 N=3 k=2", |bench| {
        bench.iter(|| black_box(verify_trace_duality::<Complex64>(&bundle, 4, 1e-9).unwrap()))
    });
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampling");
    group.sample_size(10);
    for class in [EnsembleClass::Gue, EnsembleClass::Cue] {
        let spec = EnsembleSpec::new(class, 50, 4, 20);
        group.bench_function(format!("{class:?} N=50 x20"), |bench| bench.iter(|| black_box(sample(&spec).unwrap())));
    }
    group.finish();
}

fn color_flavor(c: &mut Criterion) {
    let cfg = CftConfig::default();
    c.bench_function("color-flavor rhs order 4", |bench| {
        bench.iter_batched(|| CftSource::seeded(5), |src| black_box(cft_rhs(&cfg, src).unwrap()), BatchSize::SmallInput)
    });
}

criterion_group!(kernels, grassmann_product, superdeterminant, trace_duality, sampling, color_flavor);
criterion_main!(kernels);
