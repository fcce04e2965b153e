use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use paxp_bench::{large_workload, small_workload};
use paxp_core::smt::{emit_add_encoding, emit_mult_encoding};
use paxp_core::{compute_approx_paxp, order_features, Counter, FeatureSet, Oracle, Threshold};

fn precision(c: &mut Criterion) {
    let (tree, instances) = large_workload(7, 4);
    let v = &instances[0];
    let fixed = FeatureSet::new(v.path(&tree).tested());
    c.bench_function("precision/large/path", |b| {
        b.iter(|| Counter::new(&tree, v).precision(black_box(&fixed)))
    });
    let counter = Counter::new(&tree, v);
    c.bench_function("precision/large/reused-counter", |b| {
        b.iter(|| counter.precision(black_box(&fixed)))
    });
}

fn explainers(c: &mut Criterion) {
    let delta: Threshold = "0.95".parse().unwrap();
    let (tree, instances) = large_workload(7, 4);
    let mut group = c.benchmark_group("explain/large");
    for (n, v) in instances.iter().enumerate() {
        let ground = FeatureSet::new(v.path(&tree).tested());
        group.bench_with_input(BenchmarkId::new("approx", n), v, |b, v| {
            b.iter(|| {
                let order = order_features(&tree, v, &ground);
                compute_approx_paxp(&tree, v, &delta, &order).unwrap()
            })
        });
    }
    group.sample_size(10);
    let oracle = Oracle::builtin();
    for (n, v) in instances.iter().enumerate() {
        group.bench_with_input(BenchmarkId::new("min-builtin", n), v, |b, v| {
            b.iter(|| oracle.compute_min_paxp(&tree, v, &delta).unwrap())
        });
    }
    group.finish();

    let (tree, instances) = small_workload(3);
    c.bench_function("explain/small/min-builtin-all-points", |b| {
        b.iter(|| {
            for v in &instances {
                black_box(oracle.compute_min_paxp(&tree, v, &delta).unwrap());
            }
        })
    });
}

fn encodings(c: &mut Criterion) {
    let delta: Threshold = "0.95".parse().unwrap();
    let (tree, instances) = large_workload(7, 1);
    let v = &instances[0];
    let mult = emit_mult_encoding(&tree, v, &delta, 4);
    let add = emit_add_encoding(&tree, v, &delta, 4);
    println!(
        "encoding size on {} paths x {} features: mult {} bytes, add {} bytes",
        tree.paths().len(),
        tree.space().len(),
        mult.len(),
        add.len()
    );
    let mut group = c.benchmark_group("emit/large");
    group.bench_function("mult", |b| {
        b.iter(|| emit_mult_encoding(&tree, v, &delta, 4))
    });
    group.bench_function("add", |b| b.iter(|| emit_add_encoding(&tree, v, &delta, 4)));
    group.finish();
}

criterion_group!(benches, precision, explainers, encodings);
criterion_main!(benches);
