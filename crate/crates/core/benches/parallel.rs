use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use quantevo_core::calibration::{calibrate, TpeConfig};
use quantevo_core::eval::BacktestEvaluator;
use quantevo_core::forecaster::ForecasterConfig;
use quantevo_core::impact::{charge, ImpactParams, Trade, TradeLog};
use quantevo_core::market_data::{split, synthesize, SplitSpec, SynthSpec};
use quantevo_core::simulator::SimConfig;
use quantevo_core::strategy::{default_param_space, StrategyParams};
use quantevo_core::{par, Jobs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Jobs); 2] = [("sequential", Jobs::SEQUENTIAL), ("parallel", Jobs::ALL)];

fn trade_log(n: usize) -> TradeLog {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trades = (0..n)
        .map(|i| Trade {
            t: i as f64 * 60.0,
            notional: rng.random_range(-50_000.0..50_000.0),
        })
        .collect();
    TradeLog::new(trades).unwrap()
}

fn bench_impact(c: &mut Criterion) {
    let mut group = c.benchmark_group("impact_charge");
    for n in [500, 2_000] {
        let log = trade_log(n);
        for (name, jobs) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &log, |b, log| {
                b.iter(|| charge(black_box(log), &ImpactParams::default(), jobs))
            });
        }
    }
    group.finish();
}

fn evaluator() -> BacktestEvaluator {
    let series = synthesize(&SynthSpec {
        n_minutes: 6 * 1440,
        signal_coef: 2.5e-4,
        ..Default::default()
    })
    .unwrap();
    let spec = SplitSpec::by_fractions(&series, 0.5, 1.0 / 3.0).unwrap();
    let splits = split(&series, &spec).unwrap();
    BacktestEvaluator::prepare(
        &splits,
        &ForecasterConfig::default(),
        SimConfig::default(),
        ImpactParams::default(),
        StrategyParams::default().to_genome(),
    )
    .unwrap()
}

fn bench_batch_eval(c: &mut Criterion) {
    let ev = evaluator();
    let space = default_param_space();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let genomes: Vec<_> = (0..8).map(|_| space.sample_random(&mut rng)).collect();
    let mut group = c.benchmark_group("batch_evaluation");
    group.sample_size(10);
    for (name, jobs) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                par::map(&genomes, jobs, |g| {
                    ev.evaluate(g, quantevo_core::market_data::SplitLabel::Validation)
                        .map(|r| r.fitness)
                        .ok()
                })
            })
        });
    }
    group.finish();
}

fn bench_calibration_random_phase(c: &mut Criterion) {
    let ev = evaluator();
    let space = default_param_space();
    let cfg = TpeConfig {
        n_random: 8,
        n_guided: 0,
        ..Default::default()
    };
    let mut group = c.benchmark_group("calibration_random_phase");
    group.sample_size(10);
    for (name, jobs) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                calibrate(
                    &space,
                    |g| {
                        ev.evaluate(g, quantevo_core::market_data::SplitLabel::Validation)
                            .map(|r| r.fitness)
                            .map_err(|e| e.to_string())
                    },
                    &cfg,
                    jobs,
                )
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_impact,
    bench_batch_eval,
    bench_calibration_random_phase
);
criterion_main!(benches);
