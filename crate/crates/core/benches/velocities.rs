use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cylvort::dynamics::{self_induced_velocities_with, step_with, Execution, Integrator};
use cylvort::scenario::{build_scenario, ScenarioKind, ScenarioSpec};

fn cloud(n: usize) -> cylvort::VorticityEnsemble {
    build_scenario(&ScenarioSpec {
        kind: ScenarioKind::RandomCloud,
        blob_count: n,
        delta: 0.1,
        seed: 1,
        ..ScenarioSpec::default()
    })
    .unwrap()
}

fn velocities(c: &mut Criterion) {
    let mut group = c.benchmark_group("self_induced_velocities");
    for n in [100, 500, 2000] {
        let ens = cloud(n);
        for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, n), &ens, |b, ens| {
                b.iter(|| self_induced_velocities_with(ens, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn rk4_step(c: &mut Criterion) {
    let ens = cloud(500);
    let mut group = c.benchmark_group("rk4_step_500");
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| b.iter(|| step_with(&ens, 0.01, Integrator::Rk4, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, velocities, rk4_step);
criterion_main!(benches);
