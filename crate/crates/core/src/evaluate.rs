//! Cross-validated metrics and the five-way benchmark runner.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{fit_forest, ForestHyper};
use crate::frame::{complete_rows, ObservationFrame};
use crate::impute::{impute, ImputationStrategy};
use crate::ols::{fit_ols, render_ols_table, OlsFit};
use crate::rng::{self, domain};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub mse: f64,
    /// `None` when the evaluation targets have zero variance.
    pub r2: Option<f64>,
}

pub fn metrics(y_true: &[f64], y_pred: &[f64]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch(format!("{} targets vs {} predictions", y_true.len(), y_pred.len())));
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = y_true.len() as f64;
    let (mut abs, mut sq) = (0.0, 0.0);
    for (t, p) in y_true.iter().zip(y_pred) {
        let e = t - p;
        abs += e.abs();
        sq += e * e;
    }
    let mean = y_true.iter().sum::<f64>() / n;
    let tss: f64 = y_true.iter().map(|t| (t - mean).powi(2)).sum();
    Ok(Metrics { mae: abs / n, mse: sq / n, r2: (tss > 0.0).then(|| 1.0 - sq / tss) })
}

/// Shuffles `0..n` and cuts it into `k` folds whose sizes differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::BadK { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::stream(seed, domain::FOLDS, 0), &mut idx);
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Learner {
    Ols,
    Forest(ForestHyper),
}

impl Learner {
    pub fn name(&self) -> &'static str {
        match self {
            Learner::Ols => "ols",
            Learner::Forest(_) => "forest",
        }
    }

    fn fit_predict(&self, x_train: &[Vec<f64>], y_train: &[f64], x_test: &[Vec<f64>], seed: u64) -> Result<Vec<f64>> {
        match self {
            Learner::Ols => {
                let fit = fit_ols(x_train, y_train)?;
                Ok(x_test.iter().map(|row| fit.fitted(row)).collect())
            }
            Learner::Forest(hyper) => {
                let hyper = ForestHyper { seed, ..hyper.clone() };
                fit_forest(x_train, y_train, &hyper)?.predict(x_test)
            }
        }
    }
}

/// Averages per-fold metrics of `learner` predicting `y` from `x`.
///
/// Fold `f` seeds its learner from `(seed, f)`, so folds may run in any order.
pub fn cross_validate(
    frame: &ObservationFrame,
    y: &str,
    x: &[&str],
    learner: &Learner,
    k: usize,
    seed: u64,
) -> Result<Metrics> {
    let targets = frame.column(y)?.dense().ok_or_else(|| Error::MissingValuesPresent(y.to_string()))?;
    let rows = frame.dense_rows(x)?;
    let folds = kfold_split(rows.len(), k, seed)?;
    let per_fold = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let mut in_test = vec![false; rows.len()];
            for &i in test {
                in_test[i] = true;
            }
            let train: Vec<usize> = (0..rows.len()).filter(|&i| !in_test[i]).collect();
            let x_train: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
            let y_train: Vec<f64> = train.iter().map(|&i| targets[i]).collect();
            let x_test: Vec<Vec<f64>> = test.iter().map(|&i| rows[i].clone()).collect();
            let y_test: Vec<f64> = test.iter().map(|&i| targets[i]).collect();
            let fold_seed = rng::derive_seed(seed, domain::FOLD_MODEL, f as u64);
            let pred = learner.fit_predict(&x_train, &y_train, &x_test, fold_seed)?;
            metrics(&y_test, &pred)
        })
        .collect::<Result<Vec<_>>>()?;
    let k = per_fold.len() as f64;
    let r2 = per_fold.iter().map(|m| m.r2).collect::<Option<Vec<f64>>>();
    Ok(Metrics {
        mae: per_fold.iter().map(|m| m.mae).sum::<f64>() / k,
        mse: per_fold.iter().map(|m| m.mse).sum::<f64>() / k,
        r2: r2.map(|v| v.iter().sum::<f64>() / k),
    })
}

/// One row of the benchmark: dataset construction plus evaluation learner.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub id: u8,
    pub strategy: ImputationStrategy,
    pub learner: Learner,
}

impl ModelConfig {
    /// Model ids are tied to strategies: 1 passthrough ... 5 model-based.
    pub fn validate(&self) -> Result<()> {
        let expected = match self.strategy {
            ImputationStrategy::Passthrough => 1,
            ImputationStrategy::DropMissing => 2,
            ImputationStrategy::GlobalMean => 3,
            ImputationStrategy::MonteCarlo { .. } => 4,
            ImputationStrategy::ModelBased { .. } => 5,
        };
        if self.id == expected {
            Ok(())
        } else {
            Err(Error::InvalidStrategy(format!(
                "model {} must use the strategy of model {}, not {}",
                self.id,
                self.id,
                self.strategy.name()
            )))
        }
    }
}

/// Column roles for a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    /// Dependent variable of the OLS tables and CV learners.
    pub response: String,
    pub regressors: Vec<String>,
    /// Column whose gaps the strategies fill.
    pub impute_column: String,
    pub folds: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome<T> {
    Value(T),
    Na { na: String },
}

impl<T> Outcome<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::Value(v),
            Err(e) => Outcome::Na { na: e.to_string() },
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Outcome::Value(v) => Some(v),
            Outcome::Na { .. } => None,
        }
    }

    pub fn is_na(&self) -> bool {
        matches!(self, Outcome::Na { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub rows: usize,
    /// Missing cells in the imputed column after the strategy ran.
    pub missing: usize,
    pub synthetic: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsSection {
    pub names: Vec<String>,
    pub fit: OlsFit,
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub id: u8,
    pub strategy: String,
    pub learner: String,
    pub dataset: Outcome<DatasetFingerprint>,
    pub ols: Outcome<OlsSection>,
    pub cv: Outcome<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub spec: BenchSpec,
    pub input_rows: usize,
    pub input_missing: usize,
    pub models: Vec<ModelEntry>,
    pub caveats: Vec<String>,
}

pub const CAVEATS: [&str; 2] = [
    "imputation runs once on the full frame before cross-validation, so imputed cells can carry information from evaluation folds",
    "model-based imputation of a regressor from features that include the response creates an endogeneity loop",
];

fn ols_section(frame: &ObservationFrame, spec: &BenchSpec, id: u8) -> Result<OlsSection> {
    let mut cols: Vec<&str> = vec![spec.response.as_str()];
    cols.extend(spec.regressors.iter().map(String::as_str));
    let complete = complete_rows(frame, &cols)?;
    let y = complete.column(&spec.response)?.dense().expect("complete rows");
    let regressors: Vec<&str> = spec.regressors.iter().map(String::as_str).collect();
    let x = complete.dense_rows(&regressors)?;
    let fit = fit_ols(&x, &y)?;
    let mut names = vec!["const".to_string()];
    names.extend(spec.regressors.iter().cloned());
    let labels: Vec<&str> = names.iter().map(String::as_str).collect();
    let table = render_ols_table(&fit, &labels, &format!("Model {id}"))?;
    Ok(OlsSection { names, fit, table })
}

fn run_one(frame: &ObservationFrame, config: &ModelConfig, spec: &BenchSpec) -> ModelEntry {
    let hybrid = config.validate().and_then(|_| impute(frame, &spec.impute_column, &config.strategy));
    let regressors: Vec<&str> = spec.regressors.iter().map(String::as_str).collect();
    let (dataset, ols, cv) = match hybrid {
        Err(e) => {
            let na = e.to_string();
            (Outcome::Na { na: na.clone() }, Outcome::Na { na: na.clone() }, Outcome::Na { na })
        }
        Ok(h) => {
            let target = h.frame.column(&h.target).expect("imputed column exists");
            let fingerprint = DatasetFingerprint {
                rows: h.frame.n_rows(),
                missing: target.len() - target.observed_count(),
                synthetic: h.synthetic_count(),
            };
            let ols = Outcome::from_result(ols_section(&h.frame, spec, config.id));
            let cv = Outcome::from_result(cross_validate(
                &h.frame,
                &spec.response,
                &regressors,
                &config.learner,
                spec.folds,
                spec.seed,
            ));
            (Outcome::Value(fingerprint), ols, cv)
        }
    };
    ModelEntry {
        id: config.id,
        strategy: config.strategy.name().to_string(),
        learner: config.learner.name().to_string(),
        dataset,
        ols,
        cv,
    }
}

/// Runs every config; failures become NA entries instead of aborting.
pub fn run_benchmark(frame: &ObservationFrame, configs: &[ModelConfig], spec: &BenchSpec) -> BenchmarkReport {
    let models = configs.par_iter().map(|c| run_one(frame, c, spec)).collect();
    let input_missing = frame.column(&spec.impute_column).map(|s| s.len() - s.observed_count()).unwrap_or(0);
    BenchmarkReport {
        spec: spec.clone(),
        input_rows: frame.n_rows(),
        input_missing,
        models,
        caveats: CAVEATS.iter().map(|s| s.to_string()).collect(),
    }
}

impl BenchmarkReport {
    pub fn entry(&self, id: u8) -> Option<&ModelEntry> {
        self.models.iter().find(|m| m.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize") + "\n"
    }

    /// OLS tables followed by the cross-validation summary.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "response: {}  regressors: {}  imputed column: {}",
            self.spec.response,
            self.spec.regressors.join(", "),
            self.spec.impute_column
        );
        let _ = writeln!(
            out,
            "input rows: {}  missing in imputed column: {}  folds: {}  seed: {}\n",
            self.input_rows, self.input_missing, self.spec.folds, self.spec.seed
        );
        let _ = writeln!(out, "OLS regression results\n");
        for m in &self.models {
            match &m.ols {
                Outcome::Value(s) => {
                    let _ = writeln!(out, "{}", s.table);
                }
                Outcome::Na { na } => {
                    let _ = writeln!(out, "Model {}: NA ({na})\n", m.id);
                }
            }
        }
        let _ = writeln!(out, "Cross-validated results");
        let _ = writeln!(
            out,
            "{:<6} {:<13} {:<7} {:>6} {:>6} {:>11} {:>12} {:>12}",
            "model", "strategy", "learner", "rows", "synth", "average MAE", "average MSE", "average R2"
        );
        for m in &self.models {
            let (rows, synth) = match &m.dataset {
                Outcome::Value(d) => (d.rows.to_string(), d.synthetic.to_string()),
                Outcome::Na { .. } => ("NA".into(), "NA".into()),
            };
            let _ = write!(out, "{:<6} {:<13} {:<7} {rows:>6} {synth:>6} ", m.id, m.strategy, m.learner);
            match &m.cv {
                Outcome::Value(cv) => {
                    let r2 = cv.r2.map_or("NA".to_string(), |r| format!("{r:.2}"));
                    let _ = writeln!(out, "{:>11.3} {:>12.3} {r2:>12}", cv.mae, cv.mse);
                }
                Outcome::Na { na } => {
                    let _ = writeln!(out, "{:>11} {:>12} {:>12}  ({na})", "NA", "NA", "NA");
                }
            }
        }
        let _ = writeln!(out, "\nCaveats");
        for c in &self.caveats {
            let _ = writeln!(out, "- {c}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn metrics_by_hand() {
        let m = metrics(&[1.0, 2.0], &[1.0, 4.0]).unwrap();
        assert_eq!(m.mae, 1.0);
        assert_eq!(m.mse, 2.0);
        assert_eq!(m.r2, Some(-7.0));
        let perfect = metrics(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!((perfect.mae, perfect.mse, perfect.r2), (0.0, 0.0, Some(1.0)));
        let flat = metrics(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(flat.r2, Some(0.0));
    }

    #[test]
    fn metrics_errors() {
        assert!(matches!(metrics(&[1.0], &[1.0, 2.0]), Err(Error::DimensionMismatch(_))));
        assert_eq!(metrics(&[], &[]), Err(Error::EmptyInput));
        assert_eq!(metrics(&[2.0, 2.0], &[1.0, 3.0]).unwrap().r2, None);
    }

    #[test]
    fn fold_sizes() {
        let folds = kfold_split(10, 5, 1).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let mut sizes: Vec<usize> = kfold_split(10, 3, 1).unwrap().iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![3, 3, 4]);
        assert_eq!(kfold_split(10, 3, 8).unwrap(), kfold_split(10, 3, 8).unwrap());
        assert_eq!(kfold_split(3, 1, 0), Err(Error::BadK { n: 3, k: 1 }));
        assert_eq!(kfold_split(3, 4, 0), Err(Error::BadK { n: 3, k: 4 }));
    }

    #[test]
    fn config_ids_match_strategies() {
        let ok = ModelConfig { id: 3, strategy: ImputationStrategy::GlobalMean, learner: Learner::Ols };
        assert!(ok.validate().is_ok());
        let bad = ModelConfig { id: 2, ..ok };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn empty_config_list_gives_empty_report() {
        let frame = ObservationFrame::new(vec![]).unwrap();
        let spec = BenchSpec {
            response: "y".into(),
            regressors: vec!["x".into()],
            impute_column: "x".into(),
            folds: 5,
            seed: 0,
        };
        assert!(run_benchmark(&frame, &[], &spec).models.is_empty());
    }

    proptest! {
        #[test]
        fn folds_partition_indices(n in 2usize..200, k in 2usize..20, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let folds = kfold_split(n, k, seed).unwrap();
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            for f in &folds {
                prop_assert!(f.len() == n / k || f.len() == n.div_ceil(k));
            }
        }

        #[test]
        fn power_mean_inequality(pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..50)) {
            let (t, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let m = metrics(&t, &p).unwrap();
            prop_assert!(m.mae >= 0.0 && m.mse >= 0.0);
            prop_assert!(m.mae * m.mae <= m.mse * (1.0 + 1e-12) + 1e-300);
            if let Some(r2) = m.r2 { prop_assert!(r2 <= 1.0); }
        }
    }
}
