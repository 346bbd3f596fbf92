use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use heavytail::crossing::BlockRegime;
use heavytail::{
    BlockScheme, CrossingEstimator, CrossingProblem, IncrementModel, LdEstimator, LdProblem, Replicate, StreamKey,
    SubStream,
};

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("draws");
    let queue = IncrementModel::queue(2.5, 0.5).unwrap();
    let product = IncrementModel::lambda_laplace(4.0).unwrap();
    let mut s = StreamKey::new(1, 0, SubStream::Auxiliary).stream();
    g.bench_function("queue", |b| b.iter(|| black_box(queue.sample(&mut s))));
    g.bench_function("lambda_laplace", |b| b.iter(|| black_box(product.sample(&mut s))));
    g.bench_function("queue_conditional_tail", |b| {
        b.iter(|| black_box(queue.sample_conditional_tail(1000.0, &mut s).unwrap()))
    });
    let tw = product.make_twisted(1000.0, 0.02).unwrap();
    g.bench_function("twisted_truncated", |b| b.iter(|| black_box(tw.sample(&mut s))));
    g.finish();
}

fn setup(c: &mut Criterion) {
    let mut g = c.benchmark_group("setup");
    g.sample_size(20);
    let product = IncrementModel::lambda_laplace(4.0).unwrap();
    g.bench_function("twisted_table", |b| b.iter(|| black_box(product.make_twisted(1000.0, 0.02).unwrap())));
    let queue = IncrementModel::queue(2.5, 0.5).unwrap();
    g.bench_function("g_beta_integrated", |b| b.iter(|| black_box(queue.g_beta_integrated(5000.0, 2.25).unwrap())));
    g.finish();
}

fn replications(c: &mut Criterion) {
    let mut g = c.benchmark_group("replication");
    g.sample_size(20);
    let ld = LdEstimator::new(LdProblem::new(IncrementModel::lambda_laplace(4.0).unwrap(), 100, 100.0).unwrap()).unwrap();
    let mut i = 0;
    g.bench_function("large_deviation_n100", |b| {
        b.iter(|| {
            i += 1;
            black_box(ld.replicate(1, i).unwrap())
        })
    });
    let m = IncrementModel::queue(2.5, 0.5).unwrap();
    let p = CrossingProblem::new(m.clone(), CrossingProblem::queue_drift(&m).unwrap(), 100.0, BlockScheme::default())
        .unwrap();
    let est = CrossingEstimator::new(p, BlockRegime::FiniteVariance).unwrap();
    // Per-block tables are built on first use; keep that out of the timing.
    for k in 1..=16 {
        est.twisted(k).unwrap();
        est.q(k);
    }
    let mut j = 0;
    g.bench_function("crossing_queue_b100", |b| {
        b.iter_batched(
            || {
                j += 1;
                j
            },
            |j| black_box(est.replicate(1, j).unwrap()),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, sampling, setup, replications);
criterion_main!(benches);
