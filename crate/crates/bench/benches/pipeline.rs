use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use peanut::evaluate::{run_benchmark, BenchSpec, Learner, ModelConfig};
use peanut::impute::{impute, ImputationStrategy};
use peanut::simulate::{generate, SimulationSpec, FEATURE_COLUMN, TARGET_COLUMN};
use peanut::tdist::{t_quantile, t_sf2};
use peanut::{fit_forest, fit_ols, ForestHyper};

fn design(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let truth = generate(&SimulationSpec { n_days: n, seed: 1, ..Default::default() }).unwrap();
    let x = truth.full.dense_rows(&[TARGET_COLUMN]).unwrap();
    let y = truth.full.column(FEATURE_COLUMN).unwrap().dense().unwrap();
    (x, y)
}

fn bench_tdist(c: &mut Criterion) {
    c.bench_function("t_sf2 df=107", |b| b.iter(|| t_sf2(black_box(3.369), 107)));
    c.bench_function("t_quantile df=107", |b| b.iter(|| t_quantile(black_box(0.975), 107)));
}

fn bench_ols(c: &mut Criterion) {
    let (x, y) = design(1253);
    c.bench_function("fit_ols n=1253 k=1", |b| b.iter(|| fit_ols(black_box(&x), black_box(&y))));
}

fn bench_forest(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_forest");
    group.sample_size(10);
    for n in [250, 1253] {
        let (x, y) = design(n);
        let hyper = ForestHyper { n_trees: 20, seed: 3, ..Default::default() };
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| fit_forest(&x, &y, &hyper)));
    }
    group.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let truth = generate(&SimulationSpec::default()).unwrap();
    let hyper = ForestHyper { n_trees: 20, ..Default::default() };
    let model_based =
        ImputationStrategy::ModelBased { hyper: hyper.clone(), features: vec![FEATURE_COLUMN.into()], seed: 7 };
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    group.bench_function("impute model_based", |b| b.iter(|| impute(&truth.masked, TARGET_COLUMN, &model_based)));
    group.bench_function("impute monte_carlo", |b| {
        b.iter(|| impute(&truth.masked, TARGET_COLUMN, &ImputationStrategy::MonteCarlo { draws: 100, seed: 7 }))
    });
    let spec = BenchSpec {
        response: FEATURE_COLUMN.into(),
        regressors: vec![TARGET_COLUMN.into()],
        impute_column: TARGET_COLUMN.into(),
        folds: 5,
        seed: 7,
    };
    let configs = vec![
        ModelConfig { id: 3, strategy: ImputationStrategy::GlobalMean, learner: Learner::Forest(hyper.clone()) },
        ModelConfig { id: 5, strategy: model_based, learner: Learner::Forest(hyper) },
    ];
    group.bench_function("run_benchmark models 3 and 5", |b| b.iter(|| run_benchmark(&truth.masked, &configs, &spec)));
    group.finish();
}

criterion_group!(benches, bench_tdist, bench_ols, bench_forest, bench_pipeline);
criterion_main!(benches);
