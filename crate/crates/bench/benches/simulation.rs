use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plantsim_core::bench::{run_simulation, scenario, RunOptions};
use plantsim_core::heuristics::Heuristic;

fn one_hour(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_1h");
    group.sample_size(20);
    for (name, agvs) in [("mayer", 1), ("3-machines-loop", 3), ("grid-6", 4)] {
        let config = scenario(name)
            .unwrap()
            .config_with_agvs(agvs)
            .unwrap()
            .with_source_clock(60.0);
        let options = RunOptions {
            scenario: name.into(),
            horizon: 3600.0,
            ..RunOptions::default()
        };
        for h in Heuristic::ALL {
            group.bench_with_input(BenchmarkId::new(name, h.name()), &h, |b, &h| {
                b.iter(|| run_simulation(&mut { h }, &config, &options).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, one_hour);
criterion_main!(benches);
