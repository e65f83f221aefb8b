use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussot::nalgebra::DMatrix;
use gaussot::oracle::hungarian;
use gaussot::random::{random_psd, random_spd};
use gaussot::{shared_correlation_frame, sqrt_psd, v_closed_form, FrameConfig};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIMS: [usize; 3] = [2, 8, 32];

fn kernels(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = FrameConfig::default();

    let mut group = c.benchmark_group("sqrt_psd");
    for d in DIMS {
        let a = random_spd(d, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(d), &a, |b, a| b.iter(|| sqrt_psd(black_box(a))));
    }
    group.finish();

    let mut group = c.benchmark_group("v_closed_form");
    for d in DIMS {
        let (a, b) = (random_spd(d, &mut rng), random_spd(d, &mut rng));
        group.bench_function(BenchmarkId::from_parameter(d), |bench| {
            bench.iter(|| v_closed_form(black_box(&a), black_box(&b)).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("frame");
    for d in DIMS {
        let (a, b) = (random_spd(d, &mut rng), random_spd(d, &mut rng));
        group.bench_function(BenchmarkId::new("nonsingular", d), |bench| {
            bench.iter(|| shared_correlation_frame(black_box(&a), black_box(&b), &cfg).unwrap())
        });
        let (a, b) = (random_psd(d, d / 2, &mut rng), random_psd(d, d / 2, &mut rng));
        group.bench_function(BenchmarkId::new("doubly_singular", d), |bench| {
            bench.iter(|| shared_correlation_frame(black_box(&a), black_box(&b), &cfg))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("hungarian");
    for n in [16, 64, 256] {
        let cost = DMatrix::from_fn(n, n, |_, _| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cost, |b, cost| b.iter(|| hungarian(black_box(cost))));
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
