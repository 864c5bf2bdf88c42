//! Parallel vs sequential execution of the two data-parallel hot paths:
//! multi-seed estimator sweeps and the O(n²) distance-correlation loops.
//! Speedups scale with core count; on one core the paths should tie.

use criterion::{criterion_group, criterion_main, Criterion};
use fairlens::metrics::dcor2;
use fairlens::mine::MineConfig;
use fairlens::sweep::{map_cells, map_cells_sequential};
use fairlens::{estimate_mi, generate, SyntheticSpec};

fn sweep_dataset() -> fairlens::RepresentationSet {
    generate(&SyntheticSpec::Percentage {
        n: 512,
        fractions: vec![0.5, 0.5],
        dependence: 0.8,
        coupling: 2.0,
        noise_dim: 2,
        seed: 1,
    })
    .unwrap()
    .data
}

fn tiny_mine_config(seed: u64) -> MineConfig {
    MineConfig {
        batch_size: 64,
        map_dim: 4,
        stats_hidden: vec![16],
        max_iters: 150,
        convergence_window: 40,
        seed,
        ..MineConfig::default()
    }
}

fn bench_seed_sweep(c: &mut Criterion) {
    let data = sweep_dataset();
    let seeds: Vec<u64> = (0..4).collect();
    let run = |seed: &u64| estimate_mi(&data, &tiny_mine_config(*seed)).unwrap().mi;

    let mut group = c.benchmark_group("seed_sweep_4x");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| map_cells(&seeds, run)));
    group.bench_function("sequential", |b| {
        b.iter(|| map_cells_sequential(&seeds, run))
    });
    group.finish();
}

fn bench_dcor(c: &mut Criterion) {
    // dcor2 itself parallelizes its row loops when the feature is on, so the
    // comparison here is one large call vs the same call forced sequential
    // through a single-thread pool.
    let data = sweep_dataset();
    let x = data.representations().clone();
    let y = data.one_hot_attributes();

    let mut group = c.benchmark_group("dcor2_n512");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| dcor2(&x, &y).unwrap()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    group.bench_function("single_thread", |b| {
        b.iter(|| pool.install(|| dcor2(&x, &y).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_seed_sweep, bench_dcor);
criterion_main!(benches);
