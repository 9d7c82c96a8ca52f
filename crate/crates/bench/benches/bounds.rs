use criterion::{criterion_group, criterion_main, Criterion};
use frogtree_core::bounds::pa_table;
use frogtree_core::{compute_moment_sequences, critical_rho, sample_rde_bound, MomentBase};
use std::hint::black_box;

fn bounds(c: &mut Criterion) {
    c.bench_function("critical_rho_T51", |b| {
        b.iter(|| critical_rho(black_box(51), 1e-5).unwrap())
    });
    c.bench_function("pa_table_T200", |b| b.iter(|| pa_table(black_box(200), 0.72).unwrap()));
    c.bench_function("moments_T2000", |b| {
        b.iter(|| compute_moment_sequences(black_box(0.72), 2000, MomentBase::Bernoulli).unwrap())
    });
    let mut i = 0u64;
    c.bench_function("rde_bound_t6", |b| {
        b.iter(|| {
            i += 1;
            sample_rde_bound(6, 0.72, i).unwrap()
        })
    });
}

criterion_group!(benches, bounds);
criterion_main!(benches);
