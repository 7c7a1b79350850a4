//! Benchmarks of the hot paths: Gaussian stream throughput, scan statistics,
//! thresholds, chi-squared sampling and a small rejection-rate estimate.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use hbr_core::chi2::{sample_weighted_noncentral_chi2, DeviationSpec};
use hbr_core::mc::{estimate_rejection_rate, Hypothesis, McConfig, Preset, TestKind, WindowChoice};
use hbr_core::model::generate_h1;
use hbr_core::rng::RngStream;
use hbr_core::scan::{statistic_adaptive, statistic_known, threshold_adaptive, threshold_known};

fn bench_rng(c: &mut Criterion) {
    c.bench_function("gaussian_stream_1k", |b| {
        let mut substream = 0u64;
        b.iter_batched(
            || {
                substream += 1;
                RngStream::new(1, substream).sampler()
            },
            |mut s| {
                let mut acc = 0.0;
                for _ in 0..1000 {
                    acc += s.standard_normal();
                }
                black_box(acc)
            },
            BatchSize::SmallInput,
        )
    });
}

fn bench_statistics(c: &mut Criterion) {
    let params = Preset::Medium.params(0.2, 0.5, 1.0, 0.05).unwrap();
    let obs = generate_h1(&params, 11, RngStream::new(3, 0)).unwrap();
    let grid = params.grid();
    c.bench_function("statistic_known_medium", |b| {
        b.iter(|| statistic_known(black_box(&obs.values), &grid, 0.2, 0.5, 1.0).unwrap())
    });
    c.bench_function("statistic_adaptive_medium", |b| {
        b.iter(|| statistic_adaptive(black_box(&obs.values), &grid, 0.5, 1.0).unwrap())
    });
    c.bench_function("thresholds", |b| {
        b.iter(|| {
            let a = threshold_known(0.05, black_box(108.0), 0.05, 0.2, 0.5, 1.0).unwrap();
            let b_ = threshold_adaptive(0.05, black_box(108.0), 0.05, 0.5).unwrap();
            black_box(a + b_)
        })
    });
}

fn bench_chi2_sampling(c: &mut Criterion) {
    let spec = DeviationSpec::from_parts(&[1.0, 2.0], &[3, 1], &[0.0, 4.0]).unwrap();
    c.bench_function("weighted_noncentral_chi2_draw", |b| {
        let mut r = 0u64;
        b.iter(|| {
            r += 1;
            black_box(sample_weighted_noncentral_chi2(&spec, RngStream::new(7, r)))
        })
    });
}

fn bench_mc(c: &mut Criterion) {
    let cfg = McConfig {
        replications: 100,
        seed: 5,
        which_test: TestKind::Known,
        params: Preset::Small.params(0.2, 0.5, 1.0, 0.05).unwrap(),
        hypothesis: Hypothesis::Alt(WindowChoice::UniformRandom),
    };
    let mut group = c.benchmark_group("mc");
    group.sample_size(10);
    group.bench_function("rejection_rate_small_100reps", |b| {
        b.iter(|| estimate_rejection_rate(black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_rng, bench_statistics, bench_chi2_sampling, bench_mc);
criterion_main!(benches);
