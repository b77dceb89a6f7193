use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mpers2::lnti::lnti_table;
use mpers2::mbi::decompose;
use mpers2::rank::rank_table;
use mpers2::Field;
use mpers2_bench::{scrambled_line, scrambled_square};

fn bench_lnti(c: &mut Criterion) {
    let mut group = c.benchmark_group("lnti_table_line");
    for len in [8, 16, 32, 64] {
        let m = scrambled_line(len, 2, 0);
        group.bench_with_input(BenchmarkId::from_parameter(len), &m, |b, m| {
            b.iter(|| lnti_table(m, m, None).unwrap())
        });
    }
    group.finish();
    let mut group = c.benchmark_group("lnti_table_square");
    group.sample_size(10);
    for side in [3, 4, 5] {
        let m = scrambled_square(side, Field::GF2, 3, 1);
        group.bench_with_input(BenchmarkId::from_parameter(side), &m, |b, m| {
            b.iter(|| lnti_table(m, m, None).unwrap())
        });
    }
    group.finish();
}

fn bench_decompose(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompose");
    group.sample_size(20);
    for field in [Field::GF2, Field::Prime(3), Field::Rational] {
        let m = Arc::new(scrambled_square(4, field, 4, 2));
        group.bench_with_input(BenchmarkId::from_parameter(field), &m, |b, m| {
            b.iter(|| decompose(m).unwrap())
        });
    }
    group.finish();
}

fn bench_rank(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank_table");
    for side in [4, 6, 8] {
        let m = scrambled_square(side, Field::GF2, 4, 3);
        group.bench_with_input(BenchmarkId::from_parameter(side), &m, |b, m| {
            b.iter(|| rank_table(m, None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_lnti, bench_decompose, bench_rank);
criterion_main!(benches);
