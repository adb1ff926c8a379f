//! Parallel vs sequential throughput on the batch-evaluation layers: the
//! drift-term grid sweep, the desired-regressor norm sweep, the randomized
//! Gram-bound draws, and a multi-controller run batch.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use nalgebra::DVector;
use riseadapt::config::ScenarioConfig;
use riseadapt::model::{ControllerKind, Scenario};
use riseadapt::regressor::eval_yd;
use riseadapt::sim::{self, drift_term};
use riseadapt::sweep;

fn scenario() -> Scenario {
    Scenario::builtin("S2_twostate").unwrap()
}

fn bench_drift_grid(c: &mut Criterion) {
    let sc = scenario();
    let theta_hat = DVector::zeros(5);
    let mut group = c.benchmark_group("drift_grid_sup");
    for samples in [2_000usize, 10_000] {
        group.bench_with_input(BenchmarkId::new("seq", samples), &samples, |b, &s| {
            b.iter(|| {
                black_box(sweep::grid_sup_seq(0.0, 40.0, s, |t| {
                    drift_term(&sc, t, &theta_hat).norm()
                }))
            })
        });
        group.bench_with_input(BenchmarkId::new("par", samples), &samples, |b, &s| {
            b.iter(|| {
                black_box(sweep::grid_sup_par(0.0, 40.0, s, |t| {
                    drift_term(&sc, t, &theta_hat).norm()
                }))
            })
        });
    }
    group.finish();
}

fn bench_regressor_norm_grid(c: &mut Criterion) {
    let sc = scenario();
    let mut group = c.benchmark_group("regressor_norm_sup");
    let samples = 40_000usize;
    group.bench_function("seq", |b| {
        b.iter(|| {
            black_box(sweep::grid_sup_seq(0.0, 40.0, samples, |t| {
                eval_yd(&sc.model, &sc.reference, t).unwrap().spectral_norm()
            }))
        })
    });
    group.bench_function("par", |b| {
        b.iter(|| {
            black_box(sweep::grid_sup_par(0.0, 40.0, samples, |t| {
                eval_yd(&sc.model, &sc.reference, t).unwrap().spectral_norm()
            }))
        })
    });
    group.finish();
}

fn bench_gram_draws(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram_randomized");
    let draws = 1_000usize;
    group.bench_function("seq", |b| {
        b.iter(|| {
            black_box(sweep::indexed_all_seq(draws, |i| {
                riseadapt::analysis::gram_inverse_randomized(i as u64, 1)
            }))
        })
    });
    group.bench_function("par", |b| {
        b.iter(|| {
            black_box(sweep::indexed_all_par(draws, |i| {
                riseadapt::analysis::gram_inverse_randomized(i as u64, 1)
            }))
        })
    });
    group.finish();
}

fn bench_run_batch(c: &mut Criterion) {
    let mut scenarios = Vec::new();
    for kind in ["rise", "sigma_mod", "robust", "gradient"] {
        let mut cfg = ScenarioConfig::builtin("S1_scalar");
        cfg.controller = Some(kind.parse::<ControllerKind>().unwrap());
        cfg.apply_override("t_end", "2").unwrap();
        scenarios.push(cfg.build().unwrap());
    }
    let mut group = c.benchmark_group("run_batch");
    group.sample_size(10);
    group.bench_function("seq", |b| {
        b.iter(|| {
            for sc in &scenarios {
                black_box(sim::run(sc).unwrap());
            }
        })
    });
    group.bench_function("par", |b| {
        b.iter(|| black_box(sim::run_many(&scenarios)))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_drift_grid,
    bench_regressor_norm_grid,
    bench_gram_draws,
    bench_run_batch
);
criterion_main!(benches);
