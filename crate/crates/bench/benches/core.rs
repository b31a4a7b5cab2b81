use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use harnack_bench::{cigar_frame, dense_jet};
use harnack_core::checks::{run_check, RunConfig};
use harnack_core::{catalog_get, JetSpace};

fn jet_mul(c: &mut Criterion) {
    let mut group = c.benchmark_group("jet_mul");
    for order in [4, 6, 8] {
        let space = JetSpace::with_roles(2, true, false, order).unwrap();
        let a = dense_jet(&space);
        let b = a.scale(0.5);
        group.bench_with_input(BenchmarkId::from_parameter(order), &order, |bench, _| {
            bench.iter(|| black_box(&a) * black_box(&b))
        });
    }
    group.finish();
}

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("curvature_pack");
    for order in [4, 6] {
        let (spec, frame) = cigar_frame(order).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(order), &order, |bench, _| {
            bench.iter(|| spec.curvature_at(black_box(&frame)).unwrap())
        });
    }
    group.finish();
}

fn one_check(c: &mut Criterion) {
    let spec = catalog_get("cigar_flow").unwrap();
    let config = RunConfig { n_points: 8, ..RunConfig::default() };
    c.bench_function("CHK-EQ1/cigar_flow/8pts", |bench| {
        bench.iter(|| run_check("CHK-EQ1", &spec, &config).unwrap())
    });
}

criterion_group!(benches, jet_mul, curvature, one_check);
criterion_main!(benches);
