use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use poisson_shrink::risk::{dominance_check_theorem2, gamma_grid, mc_risk, risk_delta_c_closed};
use poisson_shrink::*;
use poisson_shrink_bench::{counts, means};

fn shrinkers(c: &mut Criterion) {
    let mut g = c.benchmark_group("shrinkers");
    for p in [9usize, 100, 10_000] {
        let y = counts(p, 1);
        let alpha = vec![1.5; p];
        g.bench_with_input(BenchmarkId::new("delta_c", p), &y, |b, y| {
            b.iter(|| delta_c(black_box(y), 3.0))
        });
        g.bench_with_input(BenchmarkId::new("empirical_bayes", p), &y, |b, y| {
            b.iter(|| empirical_bayes(black_box(y), &alpha, 0.0))
        });
        g.bench_with_input(BenchmarkId::new("mean_shrink_b0", p), &y, |b, y| {
            b.iter(|| mean_shrink_b0(black_box(y), 1.75))
        });
    }
    for p in [10usize, 100] {
        let y = counts(p, 2);
        let a = build_sum_penalty_matrix(p, 1.0).unwrap();
        g.bench_with_input(BenchmarkId::new("quad_dominator", p), &y, |b, y| {
            b.iter(|| quad_dominator(black_box(y), &a, &QuadOptions::default()))
        });
    }
    let y = counts(9, 3);
    g.bench_function("delta_c_exact/9", |b| {
        b.iter(|| delta_c(black_box(&y), exact(3, 1)))
    });
    g.finish();
}

fn series(c: &mut Criterion) {
    let cfg = SeriesConfig::default();
    let mut g = c.benchmark_group("series");
    for gamma in [1.0, 100.0, 1e4] {
        g.bench_with_input(
            BenchmarkId::new("risk_delta_c_closed", gamma),
            &gamma,
            |b, &gamma| b.iter(|| risk_delta_c_closed(9, 3.0, black_box(gamma), &cfg)),
        );
    }
    let grid = gamma_grid(1e-3, 1e3, 24, true).unwrap();
    g.sample_size(10);
    g.bench_function("dominance_check_theorem2", |b| {
        b.iter(|| dominance_check_theorem2(phi_delta_c(9, 3.0), 9, 3.0, 100_000, &grid, &cfg))
    });
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    let theta = means(9);
    let est = |y: &CountVector| delta_c(y, 3.0);
    g.bench_function("mc_risk/1e5", |b| {
        b.iter(|| mc_risk(&est, &LossSpec::lc(3.0), &theta, 100_000, 7))
    });
    let prior = SumProportionsPrior::symmetric(
        SumLaw::Gamma {
            alpha0: 3.0,
            beta0: 0.5,
        },
        4,
        2.0,
    )
    .unwrap();
    g.bench_function("sample_joint/1e5", |b| {
        b.iter(|| sample_joint(&prior, 7, 100_000))
    });
    g.finish();
}

criterion_group!(benches, shrinkers, series, monte_carlo);
criterion_main!(benches);
