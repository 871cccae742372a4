//! Parallel-versus-sequential throughput for the two oracle hot loops.
//!
//! The parallel paths are bit-identical to the sequential ones (counter-based
//! replicate seeding, exact block sums), so this bench is purely about speed.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spa_core::oracle::{exact_enumeration, exact_enumeration_seq, mc_pvalue, mc_pvalue_seq};
use spa_core::rng::SplitMix64;
use spa_core::Sample;

fn random_sample(n: usize, seed: u64) -> Sample {
    let mut rng = SplitMix64::new(seed);
    Sample::new((0..n).map(|_| rng.next_normal() + 0.1).collect()).unwrap()
}

fn bench_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_enumeration");
    for &n in &[18usize, 22] {
        let s = random_sample(n, 7);
        group.bench_with_input(BenchmarkId::new("seq", n), &s, |b, s| {
            b.iter(|| exact_enumeration_seq(s).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("par", n), &s, |b, s| {
            b.iter(|| exact_enumeration(s).unwrap())
        });
    }
    group.finish();
}

fn bench_mc(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_pvalue");
    let s = random_sample(200, 11);
    for &b_reps in &[10_000u64, 100_000] {
        group.bench_with_input(BenchmarkId::new("seq", b_reps), &b_reps, |b, &reps| {
            b.iter(|| mc_pvalue_seq(&s, reps, 3).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("par", b_reps), &b_reps, |b, &reps| {
            b.iter(|| mc_pvalue(&s, reps, 3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_exact, bench_mc);
criterion_main!(benches);
