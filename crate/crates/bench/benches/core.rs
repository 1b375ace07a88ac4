use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use entdim_core::entropy::{join_dist_exact, join_dist_sample, Partition, SampleConfig};
use entdim_core::schedule::{paper_schedule, toy_schedule, InsertionPlan, Tau};
use entdim_core::tower::{build, ColumnId, StageLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn schedule(c: &mut Criterion) {
    let tau = Tau::new(1, 2).unwrap();
    c.bench_function("paper_schedule tau=1/2 depth 6", |b| {
        b.iter(|| paper_schedule(black_box(tau), InsertionPlan::Default, 6).unwrap())
    });
}

fn resolve(c: &mut Criterion) {
    let s = paper_schedule(Tau::new(1, 2).unwrap(), InsertionPlan::Default, 4).unwrap();
    let l = build(&s, 4).unwrap();
    let top = l.towers.len() - 1;
    let t = &l.towers[top];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<(ColumnId, u64)> = (0..256)
        .map(|_| (ColumnId::random(t.col_log2, &mut rng), rng.random_range(0..t.height)))
        .collect();
    c.bench_function("resolve W4 -> W0 (256 points)", |b| {
        b.iter(|| {
            for (col, level) in &points {
                black_box(l.resolve(top, col, *level, 0).unwrap());
            }
        })
    });
}

fn join_dist(c: &mut Criterion) {
    let s = toy_schedule(&[2, 3, 2], &[1, 2, 1], &[(2, 1, Some(2))], None).unwrap();
    let l = build(&s, 3).unwrap();
    let idx = l.index_of(StageLabel::Base(3)).unwrap();
    let part = Partition::symbol();
    let positions: Vec<u64> = (0..8).collect();
    c.bench_function("join_dist_exact toy W3 n=8", |b| {
        b.iter(|| join_dist_exact(&l, idx, &part, black_box(&positions), u64::MAX).unwrap())
    });
    c.bench_function("join_dist_sample toy W3 n=8 10^4", |b| {
        b.iter(|| join_dist_sample(&l, idx, &part, black_box(&positions), SampleConfig::new(10_000, 1)).unwrap())
    });
}

criterion_group!(benches, schedule, resolve, join_dist);
criterion_main!(benches);
