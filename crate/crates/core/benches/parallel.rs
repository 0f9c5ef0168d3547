use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ganq_core::env::{build_env, EnvKind, EnvSpec};
use ganq_core::par::{par_map, seq_map};
use ganq_core::rng::stream_rng;
use ganq_core::solvers::{monte_carlo_returns, table_policy, PolicyTable};
use ganq_core::tabular::{run_tabular, TabularAgentConfig, TabularKind};

fn seed_sweep(c: &mut Criterion) {
    let seeds: Vec<u64> = (0..8).collect();
    let spec = EnvSpec::preset(EnvKind::Gridworld);
    let train = |&seed: &u64| {
        let cfg = TabularAgentConfig { seed, episodes: 100, ..TabularAgentConfig::default() };
        run_tabular(spec, &cfg, TabularKind::Dq).unwrap().log.mean_reward()
    };
    let mut g = c.benchmark_group("seed_sweep");
    g.sample_size(10);
    g.bench_function("par_map", |b| b.iter(|| par_map(&seeds, train)));
    g.bench_function("seq_map", |b| b.iter(|| seq_map(&seeds, train)));
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let spec = EnvSpec::preset(EnvKind::Gridworld);
    let uniform = PolicyTable::uniform(16, 4);
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    for chunks in [4usize, 16] {
        let seeds: Vec<u64> = (0..chunks as u64).collect();
        let rollouts = |&seed: &u64| {
            let mut env = build_env(spec, seed).unwrap();
            let mut rng = stream_rng(seed, 9);
            let xs = monte_carlo_returns(&mut env, 0, 1, 64, table_policy(&uniform, &mut rng)).unwrap();
            xs.iter().sum::<f64>()
        };
        g.bench_with_input(BenchmarkId::new("par_map", chunks), &seeds, |b, s| b.iter(|| par_map(s, rollouts)));
        g.bench_with_input(BenchmarkId::new("seq_map", chunks), &seeds, |b, s| b.iter(|| seq_map(s, rollouts)));
    }
    g.finish();
}

criterion_group!(benches, seed_sweep, monte_carlo);
criterion_main!(benches);
