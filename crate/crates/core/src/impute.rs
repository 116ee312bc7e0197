//! The five dataset constructions compared by the benchmark.
//!
//! Every strategy that fills cells leaves observed values bit-identical and
//! records per-row provenance for the imputed column.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{fit_forest, ForestHyper};
use crate::frame::{complete_rows, ObservationFrame, Series};
use crate::rng::{self, domain};

pub const DEFAULT_MC_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum ImputationStrategy {
    Passthrough,
    DropMissing,
    GlobalMean,
    MonteCarlo { draws: usize, seed: u64 },
    ModelBased { hyper: ForestHyper, features: Vec<String>, seed: u64 },
}

impl ImputationStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            ImputationStrategy::Passthrough => "passthrough",
            ImputationStrategy::DropMissing => "drop_missing",
            ImputationStrategy::GlobalMean => "global_mean",
            ImputationStrategy::MonteCarlo { .. } => "monte_carlo",
            ImputationStrategy::ModelBased { .. } => "model_based",
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, ImputationStrategy::MonteCarlo { .. } | ImputationStrategy::ModelBased { .. })
    }
}

/// Where a cell of the imputed column came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Real,
    Synthetic(String),
    /// Still missing after the strategy ran.
    Absent,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Real => f.write_str("real"),
            Provenance::Synthetic(by) => write!(f, "synthetic:{by}"),
            Provenance::Absent => f.write_str("absent"),
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Provenance {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        match s.as_str() {
            "real" => Ok(Provenance::Real),
            "absent" => Ok(Provenance::Absent),
            other => other
                .strip_prefix("synthetic:")
                .map(|by| Provenance::Synthetic(by.to_string()))
                .ok_or_else(|| serde::de::Error::custom(format!("unknown provenance `{other}`"))),
        }
    }
}

/// A frame whose `target` column mixes real and synthetic cells.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridFrame {
    pub frame: ObservationFrame,
    pub target: String,
    pub provenance: Vec<Provenance>,
}

impl HybridFrame {
    fn from_mask(frame: ObservationFrame, target: &str) -> Result<Self> {
        let provenance = frame
            .column(target)?
            .mask()
            .iter()
            .map(|&o| if o { Provenance::Real } else { Provenance::Absent })
            .collect();
        Ok(HybridFrame { frame, target: target.to_string(), provenance })
    }

    pub fn synthetic_count(&self) -> usize {
        self.provenance.iter().filter(|p| matches!(p, Provenance::Synthetic(_))).count()
    }

    /// Rows whose target cell is still missing.
    pub fn unfilled_rows(&self) -> Vec<usize> {
        self.provenance.iter().enumerate().filter(|(_, p)| **p == Provenance::Absent).map(|(i, _)| i).collect()
    }
}

fn mean_std(observed: &[f64]) -> (f64, f64) {
    let n = observed.len() as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let std = if observed.len() > 1 {
        (observed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Fills every missing slot with the mean of the observed slots.
pub fn global_mean_impute(values: &Series) -> Result<Series> {
    let observed = values.observed_values();
    if observed.is_empty() {
        return Err(Error::NoObservedValues);
    }
    let (mean, _) = mean_std(&observed);
    let mut out = values.clone();
    for i in 0..out.len() {
        if !out.is_observed(i) {
            out.set(i, mean);
        }
    }
    Ok(out)
}

/// Fills each missing slot with the average of `draws` samples from
/// `Normal(mean_obs, std_obs)`. Row `i` uses random stream `(seed, i)`.
pub fn monte_carlo_impute(values: &Series, draws: usize, seed: u64) -> Result<Series> {
    if draws == 0 {
        return Err(Error::InvalidStrategy("monte carlo draws must be at least 1".into()));
    }
    let observed = values.observed_values();
    if observed.is_empty() {
        return Err(Error::NoObservedValues);
    }
    let (mean, std) = mean_std(&observed);
    let fills: Vec<(usize, f64)> = (0..values.len())
        .into_par_iter()
        .filter(|&i| !values.is_observed(i))
        .map(|i| {
            if std == 0.0 {
                return (i, mean);
            }
            let mut rng = rng::stream(seed, domain::MONTE_CARLO, i as u64);
            let z: f64 = (0..draws).map(|_| rng::standard_normal(&mut rng)).sum::<f64>() / draws as f64;
            (i, mean + std * z)
        })
        .collect();
    let mut out = values.clone();
    for (i, v) in fills {
        out.set(i, v);
    }
    Ok(out)
}

/// Trains a forest on rows where `target` and all `features` are observed,
/// then predicts the missing target cells whose features are observed.
pub fn model_based_impute(
    frame: &ObservationFrame,
    target: &str,
    features: &[String],
    hyper: &ForestHyper,
    seed: u64,
) -> Result<HybridFrame> {
    let target_series = frame.column(target)?;
    if features.is_empty() {
        return Err(Error::InvalidStrategy("model-based imputation needs at least one feature".into()));
    }
    if features.iter().any(|f| f == target) {
        return Err(Error::InvalidStrategy(format!("feature set contains the target `{target}`")));
    }
    let feature_cols = features.iter().map(|f| frame.column(f)).collect::<Result<Vec<_>>>()?;
    let mut hybrid = HybridFrame::from_mask(frame.clone(), target)?;
    if target_series.is_complete() {
        return Ok(hybrid);
    }

    let row_features = |i: usize| -> Option<Vec<f64>> { feature_cols.iter().map(|c| c.get(i)).collect() };
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut pending = Vec::new();
    for i in 0..frame.n_rows() {
        match (target_series.get(i), row_features(i)) {
            (Some(t), Some(f)) => {
                x.push(f);
                y.push(t);
            }
            (None, Some(f)) => pending.push((i, f)),
            _ => {}
        }
    }
    if y.len() < 2 {
        return Err(Error::InsufficientTrainingRows(y.len()));
    }
    let hyper = ForestHyper { seed, ..hyper.clone() };
    let model = fit_forest(&x, &y, &hyper)?;
    let rows: Vec<Vec<f64>> = pending.iter().map(|(_, f)| f.clone()).collect();
    let predictions = model.predict(&rows)?;

    let mut filled = target_series.clone();
    for ((i, _), value) in pending.iter().zip(predictions) {
        filled.set(*i, value);
        hybrid.provenance[*i] = Provenance::Synthetic("model_based".into());
    }
    hybrid.frame.replace_column(target, filled)?;
    Ok(hybrid)
}

/// Applies `strategy` to the `target` column of `frame`.
pub fn impute(frame: &ObservationFrame, target: &str, strategy: &ImputationStrategy) -> Result<HybridFrame> {
    let series = frame.column(target)?;
    let fill_with = |filled: Series| -> Result<HybridFrame> {
        let mut hybrid = HybridFrame::from_mask(frame.clone(), target)?;
        for p in hybrid.provenance.iter_mut().filter(|p| **p == Provenance::Absent) {
            *p = Provenance::Synthetic(strategy.name().into());
        }
        hybrid.frame.replace_column(target, filled)?;
        Ok(hybrid)
    };
    match strategy {
        ImputationStrategy::Passthrough => HybridFrame::from_mask(frame.clone(), target),
        ImputationStrategy::DropMissing => HybridFrame::from_mask(complete_rows(frame, &[target])?, target),
        ImputationStrategy::GlobalMean => fill_with(global_mean_impute(series)?),
        ImputationStrategy::MonteCarlo { draws, seed } => fill_with(monte_carlo_impute(series, *draws, *seed)?),
        ImputationStrategy::ModelBased { hyper, features, seed } => {
            model_based_impute(frame, target, features, hyper, *seed)
        }
    }
}
