use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plantsim_core::heuristics::linear_sum_assignment;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(0.0..100.0)).collect())
        .collect()
}

fn lsa(c: &mut Criterion) {
    let mut group = c.benchmark_group("linear_sum_assignment");
    for (rows, cols) in [(2, 4), (4, 4), (4, 8), (8, 8)] {
        let m = random_matrix(rows, cols, 7);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{rows}x{cols}")),
            &m,
            |b, m| b.iter(|| linear_sum_assignment(m).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, lsa);
criterion_main!(benches);
