use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jumpsim::batch::{run_batch_sequential, sample_solve_times};
use jumpsim::difficulty::DaaAlgorithm;
use jumpsim::{DaaConfig, Difficulty, HashRate, MinerSpec, SimConfig, Strategy};

fn configs(alg: DaaAlgorithm, seeds: u64, num_blocks: u64) -> Vec<SimConfig> {
    let genesis = Difficulty::new(4.0).unwrap();
    let worker = HashRate::for_block_time(genesis, 600.0).unwrap();
    (0..seeds)
        .map(|seed| SimConfig {
            daa: DaaConfig::new(alg, 600.0),
            miners: vec![
                MinerSpec::always_on("honest", worker),
                MinerSpec::new(
                    "attacker",
                    worker,
                    Strategy::ThresholdJumper {
                        attack_in: 0.95,
                        attack_out: 1.45,
                        base_difficulty: genesis,
                    },
                ),
            ],
            num_blocks,
            seed,
            genesis_difficulty: genesis,
        })
        .collect()
}

fn batch_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_batch");
    group.sample_size(10);
    for alg in [DaaAlgorithm::Bch144, DaaAlgorithm::BtgWeighted] {
        let cfgs = configs(alg, 8, 5_000);
        group.bench_with_input(BenchmarkId::new("sequential", alg.name()), &cfgs, |b, cfgs| {
            b.iter(|| run_batch_sequential(cfgs))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", alg.name()), &cfgs, |b, cfgs| {
            b.iter(|| jumpsim::batch::run_batch_parallel(cfgs))
        });
    }
    group.finish();
}

fn solve_time_draws(c: &mut Criterion) {
    let d = Difficulty::new(4.0).unwrap();
    let hr = HashRate::for_block_time(d, 600.0).unwrap();
    c.bench_function("sample_solve_times/100k", |b| {
        b.iter(|| sample_solve_times(hr, d, 1, 100_000))
    });
}

criterion_group!(benches, batch_runs, solve_time_draws);
criterion_main!(benches);
