use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lgpac::constructions::get;
use lgpac::dsl::GridDecl;
use lgpac::simulator::{simulate, Execution, SolverConfig, TimeGrid};

fn execution_modes(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    for (name, t_end, step) in [("gamma", 96.0, 0.25), ("zeta1", 17.0, 0.25), ("zeta1", 17.0, 1.0 / 64.0)] {
        let mut doc = get(name).unwrap().document;
        let grid = doc.grid.as_mut().unwrap();
        *grid = GridDecl::step(grid.lower, grid.upper.unwrap(), step);
        let bound = doc.bound().unwrap();
        let points = bound.system().grid().unwrap().len();
        let name = format!("{name}/{points}pts");
        let tg = TimeGrid::uniform(t_end, 9).unwrap();
        for (label, mode) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let cfg = SolverConfig::default().with_execution(mode);
            group.bench_with_input(BenchmarkId::new(label, &name), &cfg, |b, cfg| {
                b.iter(|| simulate(&bound, &tg, cfg).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, execution_modes);
criterion_main!(benches);
