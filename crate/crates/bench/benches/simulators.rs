use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frogtree_bench::config;
use frogtree_core::rng::trial_seed;
use frogtree_core::{
    run_coupled_fm, run_coupled_rfm, run_fm, run_rfm, run_rfm_loop_erased, CheckMode, EarlyRemovalPolicy,
};
use std::hint::black_box;

fn simulators(c: &mut Criterion) {
    let mut g = c.benchmark_group("trial");
    for p in [0.3, 0.4] {
        let cfg = config(2, p, 10);
        let mut i = 0;
        g.bench_with_input(BenchmarkId::new("fm", p), &cfg, |b, cfg| {
            b.iter(|| {
                i += 1;
                black_box(run_fm(cfg, trial_seed(1, i)).unwrap())
            })
        });
        g.bench_with_input(BenchmarkId::new("rfm_stacks", p), &cfg, |b, cfg| {
            b.iter(|| {
                i += 1;
                black_box(run_rfm(cfg, &EarlyRemovalPolicy::None, trial_seed(1, i)).unwrap())
            })
        });
        g.bench_with_input(BenchmarkId::new("rfm_loop_erased", p), &cfg, |b, cfg| {
            b.iter(|| {
                i += 1;
                black_box(run_rfm_loop_erased(cfg, trial_seed(1, i)).unwrap())
            })
        });
    }
    g.finish();
}

fn couplings(c: &mut Criterion) {
    let mut g = c.benchmark_group("coupled_trial");
    let fm = config(2, 0.3, 10);
    let rfm = config(2, 0.4, 12);
    for mode in [CheckMode::Off, CheckMode::Incremental, CheckMode::Full] {
        let mut i = 0;
        g.bench_with_input(BenchmarkId::new("fm_kd", mode), &mode, |b, &mode| {
            b.iter(|| {
                i += 1;
                black_box(run_coupled_fm(&fm, 2, mode, trial_seed(2, i)).unwrap())
            })
        });
        g.bench_with_input(BenchmarkId::new("rfm_plus1", mode), &mode, |b, &mode| {
            b.iter(|| {
                i += 1;
                black_box(run_coupled_rfm(&rfm, mode, trial_seed(3, i)).unwrap())
            })
        });
    }
    g.finish();
}

criterion_group!(benches, simulators, couplings);
criterion_main!(benches);
