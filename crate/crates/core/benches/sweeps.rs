use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rangeroots::harness::experiments::{roots_miss_rate, uses_pruning, DeskClass, MissRateParams, UsesPruningParams};
use rangeroots::par::Execution;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut out = vec![("sequential", Execution::Sequential)];
    if cfg!(feature = "parallel") {
        out.push(("parallel", Execution::Parallel));
    }
    out
}

fn miss_rate(c: &mut Criterion) {
    let p = MissRateParams { ns: vec![4, 5], ms: vec![4, 5], per_cell: 10, ..Default::default() };
    let mut g = c.benchmark_group("roots-miss-rate");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| b.iter(|| roots_miss_rate(&p, exec)));
    }
    g.finish();
}

fn pruning(c: &mut Criterion) {
    let p = UsesPruningParams { class: DeskClass::A, instances: 20, max_depth: 8, ..Default::default() };
    let mut g = c.benchmark_group("uses-pruning");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| b.iter(|| uses_pruning(&p, exec)));
    }
    g.finish();
}

criterion_group!(sweeps, miss_rate, pruning);
criterion_main!(sweeps);
