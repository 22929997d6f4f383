use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use wasn_deploy::flownet::power_coefficients;
use wasn_deploy::optimize::rl_algorithm;
use wasn_deploy::partition::power_diagram;
use wasn_deploy::routing::bellman_ford_routing;
use wasn_deploy::{OptimizerConfig, PhysicalParams};
use wasn_deploy_bench::{scattered, uniform_grid};

fn partition(c: &mut Criterion) {
    let params = PhysicalParams::default();
    let mut group = c.benchmark_group("power_diagram");
    for n in [50, 100, 200] {
        let grid = uniform_grid(n);
        let dep = scattered(40, 4, 1);
        let g = power_coefficients(&dep, &bellman_ford_routing(&dep, &params), &params).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| power_diagram(black_box(&dep), g.as_slice(), 0.25, params.kappa, &grid))
        });
    }
    group.finish();
}

fn routing(c: &mut Criterion) {
    let params = PhysicalParams::default();
    let mut group = c.benchmark_group("bellman_ford");
    for n in [10, 40, 160] {
        let dep = scattered(n, 4, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| bellman_ford_routing(black_box(&dep), &params))
        });
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let grid = uniform_grid(100);
    let config = OptimizerConfig::default();
    let mut group = c.benchmark_group("rl");
    group.sample_size(10);
    group.bench_function("n40_m4_grid100", |b| b.iter(|| rl_algorithm(&grid, black_box(&config), None).unwrap()));
    group.finish();
}

criterion_group!(benches, partition, routing, full_run);
criterion_main!(benches);
