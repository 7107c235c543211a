//! Data-parallel kernels on the default rayon pool against a one-thread pool.
//! Building without the `parallel` feature removes rayon from the library
//! entirely; a one-thread pool is the closest in-process stand-in.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use embezzle_core::certify::{certify_levels, hotel_morphisms};
use embezzle_core::probes::random_battery;
use embezzle_core::protocols::{build_hotel_catalyst, vdh_embezzle_fidelity};
use embezzle_core::universal::{build_composite_catalyst, check_simultaneous_containment, RationalSchmidtFamily};
use embezzle_core::{par, verify_isometry, Party, Role, SiteId, StructuredIsometry, TargetState};
use num_rational::Ratio;
use rayon::ThreadPoolBuilder;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("rayon", ThreadPoolBuilder::new().build().unwrap()),
        ("single", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
    ]
}

fn certification(c: &mut Criterion) {
    let g = TargetState::from_rationals(&[Ratio::new(1, 3), Ratio::new(2, 3), Ratio::new(2, 3)]).unwrap();
    let f = build_hotel_catalyst(&g, 5).unwrap();
    let (pa, pb) = hotel_morphisms(0, 3).unwrap();
    let mut group = c.benchmark_group("certify_levels");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| pool.install(|| certify_levels("bench", &f, &pa, &pb, &g, 5, 1e-12).unwrap()))
        });
    }
    group.finish();
}

fn composite(c: &mut Criterion) {
    let r = |n, d| Ratio::new(n, d);
    let fam = RationalSchmidtFamily::from_rationals(&[
        vec![r(3, 5), r(4, 5)],
        vec![r(5, 13), r(12, 13)],
        vec![r(1, 3), r(2, 3), r(2, 3)],
    ])
    .unwrap();
    let cat = build_composite_catalyst(&fam, 2, 1 << 20).unwrap();
    let mut group = c.benchmark_group("simultaneous_containment");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| pool.install(|| check_simultaneous_containment(&cat, 2, 1e-12).unwrap()))
        });
    }
    group.finish();
}

fn vdh_sweep(c: &mut Criterion) {
    let bell = TargetState::bell();
    let mut group = c.benchmark_group("vdh_sweep");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| {
                pool.install(|| par::map_range(11, |p| vdh_embezzle_fidelity(4 << p, &bell).unwrap()))
            })
        });
    }
    group.finish();
}

fn isometry_battery(c: &mut Criterion) {
    let sites: Vec<SiteId> = (0..6).map(|i| SiteId::ancilla(Party::A, 0, i, 3)).collect();
    let probes = random_battery(&sites, 20, 1).unwrap();
    let v = StructuredIsometry::pull_out(Party::A, Role::Ancilla(0), SiteId::output(Party::A, 0, 3).key()).unwrap();
    let mut group = c.benchmark_group("verify_isometry");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| pool.install(|| verify_isometry(&v, &probes).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, certification, composite, vdh_sweep, isometry_battery);
criterion_main!(benches);
