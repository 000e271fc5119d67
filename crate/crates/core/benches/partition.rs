use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use fpppart::graph_io::gen_random;
use fpppart::metrics::accumulate;
use fpppart::par;
use fpppart::{Method, MetricsAccumulator, Partitioner, PartitionerConfig};
use std::hint::black_box;

fn assign(c: &mut Criterion) {
    let edges = gen_random(50_000, 500_000, 1).unwrap();
    let mut group = c.benchmark_group("assign");
    group.throughput(Throughput::Elements(edges.len() as u64));
    group.sample_size(20);
    for method in Method::ALL {
        let p = Partitioner::new(PartitionerConfig::new(method, 57).with_seed(3)).unwrap();
        group.bench_with_input(BenchmarkId::new("parallel", method), &edges, |b, e| {
            b.iter(|| black_box(p.partition(e)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", method), &edges, |b, e| {
            b.iter(|| black_box(p.partition_sequential(e)))
        });
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let edges = gen_random(50_000, 500_000, 2).unwrap();
    let p = Partitioner::new(PartitionerConfig::new(Method::Fpp, 57)).unwrap();
    let assigned = p.partition(&edges);
    let mut group = c.benchmark_group("metrics");
    group.throughput(Throughput::Elements(assigned.len() as u64));
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(accumulate(&assigned, 57).unwrap()))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            black_box(par::sequential::fold_chunks(
                &assigned,
                || MetricsAccumulator::new(57),
                |acc, a| acc.add(a).unwrap(),
                MetricsAccumulator::merge,
            ))
        })
    });
    group.finish();
}

fn plane_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("plane");
    for q in [16u64, 64, 127] {
        group.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, &q| {
            b.iter(|| black_box(fpppart::ProjPlane::build(q).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, assign, metrics, plane_build);
criterion_main!(benches);
