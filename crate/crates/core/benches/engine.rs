use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use llp::demo::{prefix_problem, PrefixInstance};
use llp::engine::{solve, SolveOptions};
use llp::market::{clearing_problem, AuctionInstance, PriceStep};
use llp::shortest_path::{shortest_a_problem, shortest_b_problem, WeightedDigraph};
use llp::slice::{build_slice, SliceOptions};
use llp::stable_matching::{smp_problem, SmpInstance};
use llp::ExecutionMode;

fn modes() -> Vec<(String, SolveOptions)> {
    let mut out = vec![("sequential".to_string(), SolveOptions::sequential())];
    for t in [2, 4, 8] {
        out.push((format!("parallel-{t}"), SolveOptions::parallel(t)));
    }
    out
}

fn random_smp(n: usize, seed: u64) -> SmpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut list = || {
        let mut row: Vec<usize> = (0..n).collect();
        row.shuffle(&mut rng);
        row
    };
    let mpref = (0..n).map(|_| list()).collect();
    let wpref = (0..n).map(|_| list()).collect();
    SmpInstance::new(mpref, wpref).unwrap()
}

fn random_graph(n: usize, seed: u64) -> WeightedDigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, f64)> = (1..n)
        .map(|v| (rng.gen_range(0..v), v, rng.gen_range(1..=20) as f64))
        .collect();
    for _ in 0..4 * n {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push((u, v, rng.gen_range(1..=20) as f64));
        }
    }
    WeightedDigraph::new(n, edges).unwrap()
}

fn stable_matching(c: &mut Criterion) {
    let mut group = c.benchmark_group("smp");
    group.sample_size(20);
    for n in [200, 1000] {
        let p = smp_problem(&random_smp(n, 1)).unwrap();
        for (name, opts) in modes() {
            group.bench_with_input(BenchmarkId::new(name, n), &p, |b, p| {
                b.iter(|| solve(p, opts).unwrap())
            });
        }
    }
    group.finish();
}

fn shortest_paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("path");
    group.sample_size(20);
    let g = random_graph(2000, 2);
    let a = shortest_a_problem(&g, vec![]).unwrap();
    let b = shortest_b_problem(&g, vec![]).unwrap();
    for (name, opts) in modes() {
        group.bench_function(BenchmarkId::new(format!("a/{name}"), 2000), |bench| {
            bench.iter(|| solve(&a, opts).unwrap())
        });
        group.bench_function(BenchmarkId::new(format!("b/{name}"), 2000), |bench| {
            bench.iter(|| solve(&b, opts).unwrap())
        });
    }
    group.finish();
}

fn prefix_sums(c: &mut Criterion) {
    let mut group = c.benchmark_group("prefix");
    let p = prefix_problem(PrefixInstance::new(vec![1.0; 256]).unwrap()).unwrap();
    for (name, opts) in modes() {
        group.bench_function(BenchmarkId::new(name, 256), |b| {
            b.iter(|| solve(&p, opts).unwrap())
        });
    }
    group.finish();
}

fn clearing(c: &mut Criterion) {
    let mut group = c.benchmark_group("clearing");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 40;
    let v = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(0..=30)).collect())
        .collect();
    let inst = AuctionInstance::new(v).unwrap();
    for step in [PriceStep::Unit, PriceStep::Accelerated] {
        let p = clearing_problem(&inst, vec![], step).unwrap();
        for (name, opts) in modes() {
            group.bench_function(BenchmarkId::new(format!("{step:?}/{name}"), n), |b| {
                b.iter(|| solve(&p, opts).unwrap())
            });
        }
    }
    group.finish();
}

fn slices(c: &mut Criterion) {
    let mut group = c.benchmark_group("slice");
    group.sample_size(10);
    let p = smp_problem(&random_smp(30, 4)).unwrap();
    for (name, mode) in [
        ("sequential", ExecutionMode::Sequential),
        ("parallel-8", ExecutionMode::Parallel { threads: 8 }),
    ] {
        let opts = SliceOptions {
            mode,
            ..SliceOptions::default()
        };
        group.bench_function(BenchmarkId::new(name, 30), |b| {
            b.iter(|| build_slice(&p, opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    stable_matching,
    shortest_paths,
    prefix_sums,
    clearing,
    slices
);
criterion_main!(benches);
